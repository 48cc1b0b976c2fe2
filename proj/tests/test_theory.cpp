#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "clusterfeat/theory.hpp"
#include "oracles.hpp"

using namespace clusterfeat;

namespace {

// Exact alpha by a quadrature route: enumerate the 2^N sign corners and
// average sigma'(s^T Delta + G) over G ~ N(0, V^2) with Gauss-Hermite nodes.
Eigen::VectorXd alpha_by_quadrature(const Eigen::VectorXd& w, const DataModel& model,
                                    const Activation& act) {
  const int n = model.n_clusters();
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  double v2 = 0.0;
  for (int j = 0; j < model.dim(); ++j) {
    delta(model.partition.cluster_of(j)) += noise_mean(model.noise[j]) * w(j);
    v2 += w(j) * w(j) * noise_variance(model.noise[j]);
  }
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  for (std::size_t idx = 0; idx < model.target.size(); ++idx) {
    double dot = 0.0;
    std::vector<int> s(n);
    for (int i = 0; i < n; ++i) {
      s[i] = (idx >> i) & 1u ? -1 : 1;
      dot += s[i] * delta(i);
    }
    const double smoothed = oracles::gaussian_expect(
        [&](double z) { return act.derivative(z); }, dot, v2, 96);
    for (int i = 0; i < n; ++i)
      alpha(i) += model.target[idx] * s[i] * smoothed;
  }
  return alpha / static_cast<double>(model.target.size());
}

BooleanFunction random_target(int n, Rng& rng) {
  std::vector<double> values(1u << n);
  for (double& v : values) v = rng.uniform(-1.5, 1.5);
  return BooleanFunction(n, values);
}

}  // namespace

TEST_CASE("identity activation reduces alpha to degree-1 coefficients") {
  Rng rng(61);
  const auto act = Activation::polynomial({0.0, 1.0});  // sigma'(z) = 1
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_target(3, rng);
    const auto model = make_bsc_model(3, 12, 0.15, f);
    Eigen::VectorXd w(12);
    for (int j = 0; j < 12; ++j) w(j) = rng.normal(0.0, 0.5);
    const auto res = alpha_population(w, model, act);
    CHECK(res.provenance == "population_exact");
    for (int i = 0; i < 3; ++i) {
      const std::size_t singleton = std::size_t{1} << i;
      CHECK(res.alpha(i) == doctest::Approx(f.fourier()[singleton]).epsilon(1e-12));
    }
  }
}

TEST_CASE("alpha_population matches the quadrature oracle") {
  Rng rng(62);
  const auto act = Activation::truncated_exp(5);
  const auto f = random_target(3, rng);
  const auto model = make_gaussian_mixture_model(3, 9, 0.8, 0.4, f);
  Eigen::VectorXd w(9);
  for (int j = 0; j < 9; ++j) w(j) = rng.normal(0.0, 0.4);
  const auto res = alpha_population(w, model, act);
  const Eigen::VectorXd want = alpha_by_quadrature(w, model, act);
  for (int i = 0; i < 3; ++i)
    CHECK(res.alpha(i) == doctest::Approx(want(i)).epsilon(1e-9));
  // Smoothing variance is sum_j w_j^2 tau_j^2.
  double v2 = 0.0;
  for (int j = 0; j < 9; ++j) v2 += w(j) * w(j) * 0.4;
  CHECK(res.smoothing_variance == doctest::Approx(v2).epsilon(1e-12));
}

TEST_CASE("homogeneous alpha agrees with the c-table route") {
  Rng rng(63);
  for (int trial = 0; trial < 8; ++trial) {
    const auto f = random_target(3, rng);
    const auto via_margin = majority_margin(f);
    const auto res = alpha_homogeneous(f, 0.2);
    CHECK(res.provenance == "homogeneous_fourier");
    for (int i = 0; i < 3; ++i)
      CHECK(res.alpha(i) == doctest::Approx(via_margin.alpha(i)).epsilon(1e-12));
  }
}

TEST_CASE("homogeneous alpha flips the majority term past delta = 1/2") {
  Rng rng(64);
  const auto f = random_target(3, rng);
  const auto maj = BooleanFunction::majority(3);
  for (int i = 0; i < 3; ++i) {
    // Direct evaluation of (fhat({i}) + sign * E[f s_i Maj]) / 2.
    const std::size_t singleton = std::size_t{1} << i;
    double cross = 0.0;
    for (std::size_t idx = 0; idx < 8; ++idx) {
      const int s_i = (idx >> i) & 1u ? -1 : 1;
      cross += f[idx] * s_i * maj[idx];
    }
    cross /= 8.0;
    const double lo = alpha_homogeneous(f, 0.2).alpha(i);
    const double hi = alpha_homogeneous(f, 0.8).alpha(i);
    CHECK(lo == doctest::Approx(0.5 * (f.fourier()[singleton] + cross)).epsilon(1e-12));
    CHECK(hi == doctest::Approx(0.5 * (f.fourier()[singleton] - cross)).epsilon(1e-12));
  }
}

TEST_CASE("gradient statistic agrees with exhaustive enumeration") {
  Rng rng(65);
  const auto f = BooleanFunction::majority(3);
  const auto model = make_bsc_model(3, 6, 0.1, f);
  const auto act = Activation::truncated_exp(3);
  Eigen::VectorXd w(6);
  for (int j = 0; j < 6; ++j) w(j) = rng.normal(0.0, 0.5);

  // d = 6 binary coordinates and 3 binary signs: 2^9 equally structured terms.
  Eigen::VectorXd exact = Eigen::VectorXd::Zero(6);
  const double delta = 0.1;
  for (std::size_t sm = 0; sm < 8; ++sm) {
    std::vector<int> s(3);
    for (int i = 0; i < 3; ++i) s[i] = (sm >> i) & 1u ? -1 : 1;
    const double y = f.eval(s);
    for (std::size_t xm = 0; xm < 64; ++xm) {
      double prob = 1.0 / 8.0;
      Eigen::VectorXd x(6);
      for (int j = 0; j < 6; ++j) {
        const int xi = (xm >> j) & 1u ? -1 : 1;
        prob *= (xi == 1) ? 1.0 - delta : delta;
        x(j) = s[model.partition.cluster_of(j)] * xi;
      }
      const double weight = prob * y * act.derivative(w.dot(x));
      exact += weight * x;
    }
  }

  Rng mc_rng(66);
  const auto est = population_gradient_mc(w, model, act, 40000, mc_rng);
  REQUIRE(est.mean.size() == 6);
  for (int j = 0; j < 6; ++j) {
    CHECK(est.se(j) > 0.0);
    CHECK(std::abs(est.mean(j) - exact(j)) < 4.0 * est.se(j) + 1e-9);
  }
}

TEST_CASE("projection grid on a fully separated example") {
  Eigen::VectorXd alpha(3), v(3);
  alpha << 1.0, 2.0, 4.0;
  v << 1.0, 1.0, 1.0;
  const auto grid = projection_grid(alpha, v, 1.0, 1.0);
  REQUIRE(grid.levels() == 8);
  const std::vector<double> want_u = {-7, -5, -3, -1, 1, 3, 5, 7};
  for (int m = 0; m < 8; ++m) CHECK(grid.u[m] == doctest::Approx(want_u[m]));
  CHECK(grid.min_gap == doctest::Approx(2.0));
  // Corner 0 is all-plus (u = +7); flipping all signs lands at -7.
  CHECK(grid.level_of[0] == 7);
  CHECK(grid.level_of[7] == 0);
  // Every target is consistent when corners never share a level.
  CHECK(projection_consistent(BooleanFunction::parity(3), grid));
}

TEST_CASE("projection grid merges coinciding corners") {
  Eigen::VectorXd alpha(3), v(3);
  alpha << 1.0, 1.0, 0.0;
  v << 1.0, 1.0, 1.0;
  const auto grid = projection_grid(alpha, v, 1.0, 1.0);
  REQUIRE(grid.levels() == 3);  // {-2, 0, 2}
  CHECK(grid.u[0] == doctest::Approx(-2.0));
  CHECK(grid.u[1] == doctest::Approx(0.0));
  CHECK(grid.u[2] == doctest::Approx(2.0));
  CHECK(grid.min_gap == doctest::Approx(2.0));
  // Parity still depends on the collapsed third sign: inconsistent.
  CHECK_FALSE(projection_consistent(BooleanFunction::parity(3), grid));
  // A function of s_0 s_1 alone is fine on this grid.
  BooleanFunction pair_parity(3, {1, -1, -1, 1, 1, -1, -1, 1});
  CHECK(projection_consistent(pair_parity, grid));
}

TEST_CASE("degenerate grid has one level and infinite gap") {
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(2);
  const auto grid = projection_grid(alpha, v, 1.0, 1.0);
  CHECK(grid.levels() == 1);
  CHECK(std::isinf(grid.min_gap));
  CHECK(projection_consistent(BooleanFunction(2, {3, 3, 3, 3}), grid));
  CHECK_FALSE(projection_consistent(BooleanFunction::parity(2), grid));
}

TEST_CASE("minimum-norm certificate interpolates the grid") {
  Rng rng(67);
  Eigen::VectorXd alpha(3), v(3);
  alpha << 1.0, 2.0, 4.0;
  v << 1.0, 1.0, 1.0;
  const auto grid = projection_grid(alpha, v, 1.0, 1.0);
  const auto f = random_target(3, rng);
  Eigen::VectorXd biases(64);
  for (int h = 0; h < 64; ++h) biases(h) = rng.uniform(-10.0, 10.0);
  const auto act = Activation::relu();
  const auto cert = build_certificate(grid, f, biases, act);
  CHECK(cert.residual <= 1e-8);
  CHECK(cert.norm2 == doctest::Approx(cert.a.norm()));
  CHECK(cert.condition >= 1.0);

  // Replay the interpolation by hand at every corner.
  for (std::size_t idx = 0; idx < 8; ++idx) {
    double u = 0.0;
    for (int i = 0; i < 3; ++i) u += ((idx >> i) & 1u ? -1.0 : 1.0) * alpha(i);
    double out = 0.0;
    for (int h = 0; h < 64; ++h) out += cert.a(h) * act.value(u + biases(h));
    CHECK(out == doctest::Approx(f[idx]).epsilon(1e-7));
  }
}

TEST_CASE("certificate on a single-level grid matches a constant") {
  const auto grid = projection_grid(Eigen::VectorXd::Zero(2),
                                    Eigen::VectorXd::Ones(2), 1.0, 1.0);
  Eigen::VectorXd biases(3);
  biases << 0.5, 1.0, 2.0;
  const BooleanFunction f(2, {1.5, 1.5, 1.5, 1.5});
  const auto cert = build_certificate(grid, f, biases, Activation::relu());
  CHECK(cert.residual <= 1e-12);
  double out = 0.0;
  for (int h = 0; h < 3; ++h) out += cert.a(h) * std::max(0.0, biases(h));
  CHECK(out == doctest::Approx(1.5));
}

TEST_CASE("too few features raise a certificate error") {
  Rng rng(68);
  Eigen::VectorXd alpha(3), v(3);
  alpha << 1.0, 2.0, 4.0;
  v << 1.0, 1.0, 1.0;
  const auto grid = projection_grid(alpha, v, 1.0, 1.0);
  const auto f = random_target(3, rng);
  Eigen::VectorXd biases(2);
  biases << 0.0, 1.0;
  try {
    build_certificate(grid, f, biases, Activation::relu());
    FAIL("expected CertificateError");
  } catch (const CertificateError& e) {
    CHECK(e.condition >= 1e12);
    CHECK(e.unhit_intervals == -1);
  }
}

TEST_CASE("doubling the feature count roughly halves the squared norm") {
  Eigen::VectorXd alpha(3), v(3);
  alpha << 1.0, 2.0, 4.0;
  v << 1.0, 1.0, 1.0;
  const auto grid = projection_grid(alpha, v, 1.0, 1.0);
  const auto act = Activation::relu();
  Rng rng(69);
  const auto f = random_target(3, rng);
  double ratio_sum = 0.0;
  const int seeds = 20;
  for (int t = 0; t < seeds; ++t) {
    Rng trial = rng.split(t);
    Eigen::VectorXd small(48), big(96);
    for (int h = 0; h < 48; ++h) small(h) = trial.uniform(-10.0, 10.0);
    for (int h = 0; h < 96; ++h) big(h) = trial.uniform(-10.0, 10.0);
    const double n_small = build_certificate(grid, f, small, act).norm2;
    const double n_big = build_certificate(grid, f, big, act).norm2;
    ratio_sum += (n_small * n_small) / (n_big * n_big);
  }
  const double mean_ratio = ratio_sum / seeds;
  CHECK(mean_ratio > 1.4);
  CHECK(mean_ratio < 2.6);
}

TEST_CASE("triangular certificate by hand on two levels") {
  Eigen::VectorXd alpha(1), v(1);
  alpha << 1.0;
  v << 1.0;
  const auto grid = projection_grid(alpha, v, 1.0, 1.0);  // u = {-1, +1}
  // Index 0 is s = +1; make f(+1) = 2 and f(-1) = 0.
  const BooleanFunction f(1, {2.0, 0.0});
  Eigen::VectorXd biases(4);
  biases << 1.45, -0.55, 3.0, 0.7;
  // Default window delta_sel = Delta/4 = 0.5 puts the intervals at
  // [1.25, 1.5] and [-0.75, -0.5]; only the first two biases qualify.
  const auto cert = build_certificate_triangular(grid, f, biases);
  REQUIRE(cert.chosen.size() == 2);
  CHECK(cert.chosen[0] == 0);
  CHECK(cert.chosen[1] == 1);
  CHECK(cert.a(0) == doctest::Approx(0.0));                 // f at u = -1 is 0
  CHECK(cert.a(1) == doctest::Approx(2.0 / 0.45));          // relu(1 - 0.55)
  CHECK(cert.a(2) == 0.0);
  CHECK(cert.a(3) == 0.0);
  CHECK(cert.residual <= 1e-12);
  CHECK(cert.a_inf == doctest::Approx(2.0 / 0.45));
  CHECK(cert.bound == doctest::Approx(2.0));                // 2 max|f| / Delta
}

TEST_CASE("triangular certificate reports unhit intervals") {
  Eigen::VectorXd alpha(1), v(1);
  alpha << 1.0;
  v << 1.0;
  const auto grid = projection_grid(alpha, v, 1.0, 1.0);
  const BooleanFunction f(1, {2.0, 0.0});
  Eigen::VectorXd biases(1);
  biases << 3.0;
  try {
    build_certificate_triangular(grid, f, biases);
    FAIL("expected CertificateError");
  } catch (const CertificateError& e) {
    CHECK(e.unhit_intervals == 2);
    CHECK(e.condition == 0.0);
  }
}

TEST_CASE("both certificate routes interpolate the same values") {
  Rng rng(70);
  Eigen::VectorXd alpha(2), v(2);
  alpha << 1.0, 3.0;
  v << 1.0, 1.0;
  const auto grid = projection_grid(alpha, v, 1.0, 1.0);  // u = {-4,-2,2,4}
  const auto f = random_target(2, rng);
  Eigen::VectorXd biases(300);
  for (int h = 0; h < 300; ++h) biases(h) = rng.uniform(-5.0, 5.0);
  const auto act = Activation::relu();
  const auto dense = build_certificate(grid, f, biases, act);
  const auto sparse = build_certificate_triangular(grid, f, biases);
  CHECK(dense.residual <= 1e-8);
  CHECK(sparse.residual <= 1e-8);
  for (std::size_t idx = 0; idx < 4; ++idx) {
    double u = 0.0;
    for (int i = 0; i < 2; ++i) u += ((idx >> i) & 1u ? -1.0 : 1.0) * alpha(i);
    double out_dense = 0.0, out_sparse = 0.0;
    for (int h = 0; h < 300; ++h) {
      out_dense += dense.a(h) * act.value(u + biases(h));
      out_sparse += sparse.a(h) * act.value(u + biases(h));
    }
    CHECK(out_dense == doctest::Approx(out_sparse).epsilon(1e-6));
  }
}

TEST_CASE("anti-concentration probe basics") {
  Rng rng(71);
  const auto model = make_bsc_model(3, 12, 0.2, BooleanFunction::majority(3));
  const auto rep = anti_concentration_probe(model, Activation::truncated_exp(3), 40, rng);
  REQUIRE(rep.gaps.size() == 40);
  for (std::size_t i = 0; i + 1 < rep.gaps.size(); ++i)
    CHECK(rep.gaps[i] <= rep.gaps[i + 1]);
  CHECK(rep.quantile(0.1) <= rep.quantile(0.9));
  CHECK(rep.fraction_below(1e-6) <= rep.fraction_below(1.0));
  CHECK(rep.quantile(0.0) == rep.gaps.front());
  CHECK(rep.quantile(1.0) == rep.gaps.back());

  // A constant target separates nothing, so every gap is infinite.
  const auto flat_model = make_bsc_model(2, 4, 0.2, BooleanFunction(2, {1, 1, 1, 1}));
  Rng rng2(72);
  const auto flat = anti_concentration_probe(flat_model, Activation::truncated_exp(3), 5, rng2);
  for (double g : flat.gaps) CHECK(std::isinf(g));
  CHECK(flat.fraction_below(100.0) == 0.0);
}

TEST_CASE("hermite coefficient variance closed forms") {
  // k = 0, a = 1, mu = 1, M = 2: terms 1 and (2!/0!) (1/2) / 1 = 1, total 2.
  CHECK(hermite_coeff_variance(0, 1.0, 1.0, 2) == doctest::Approx(2.0));
  // M = 4 adds r = 2: (4!/0!) (1/4) / 2 = 3, total 1 + 1 + 9 = 11.
  CHECK(hermite_coeff_variance(0, 1.0, 1.0, 4) == doctest::Approx(11.0));
  // k = 1, M = 3: 1 + [(3!/1!) (1/2)]^2 = 10.
  CHECK(hermite_coeff_variance(1, 1.0, 1.0, 3) == doctest::Approx(10.0));
  // Top coefficient keeps only r = 0: a^k.
  CHECK(hermite_coeff_variance(5, 1.3, 0.7, 5) == doctest::Approx(std::pow(1.3, 5)));
  // Above the degree nothing survives.
  CHECK(hermite_coeff_variance(3, 1.0, 1.0, 2) == 0.0);
  // Nondecreasing in the degree cutoff.
  for (int m = 1; m < 8; ++m)
    CHECK(hermite_coeff_variance(1, 1.0, 0.5, m) <=
          hermite_coeff_variance(1, 1.0, 0.5, m + 1));
  CHECK_THROWS_AS(hermite_coeff_variance(-1, 1.0, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(hermite_coeff_variance(0, 0.0, 1.0, 2), std::invalid_argument);
}

TEST_CASE("small ball bound formula") {
  CHECK(small_ball_bound(3, 0.5, 0.25) ==
        doctest::Approx(4.0 * std::sqrt(2.0 / std::numbers::pi) * 2.0));
  CHECK_THROWS_AS(small_ball_bound(0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(small_ball_bound(3, 1.0, 0.0), std::invalid_argument);
}
