#include "doctest.h"

#include <cmath>
#include <vector>

#include "clusterfeat/boolean_analysis.hpp"
#include "clusterfeat/rng.hpp"
#include "oracles.hpp"

using clusterfeat::BooleanFunction;

TEST_CASE("walsh_hadamard round trips and preserves energy") {
  clusterfeat::Rng rng(31);
  const int n = 8;
  std::vector<double> values(1u << n);
  for (double& v : values) v = rng.uniform(-1.0, 1.0);

  const auto coeffs = clusterfeat::walsh_hadamard(values);
  const auto back = clusterfeat::inverse_walsh_hadamard(coeffs);
  for (std::size_t i = 0; i < values.size(); ++i)
    CHECK(back[i] == doctest::Approx(values[i]).epsilon(1e-12));

  // Parseval: E[f^2] = sum of squared coefficients.
  double mean_sq = 0.0;
  for (double v : values) mean_sq += v * v;
  mean_sq /= static_cast<double>(values.size());
  double coeff_sq = 0.0;
  for (double c : coeffs) coeff_sq += c * c;
  CHECK(coeff_sq == doctest::Approx(mean_sq).epsilon(1e-12));
}

TEST_CASE("fourier matches the direct character sum") {
  clusterfeat::Rng rng(32);
  const int n = 6;
  std::vector<double> values(1u << n);
  for (double& v : values) v = rng.uniform(-2.0, 2.0);
  const BooleanFunction f(n, values);
  for (std::size_t t = 0; t < values.size(); ++t)
    CHECK(f.fourier()[t] ==
          doctest::Approx(oracles::fourier_brute(values, t)).epsilon(1e-12));
}

TEST_CASE("parity concentrates on the full set") {
  const auto f = BooleanFunction::parity(3);
  // Index bit set <=> that sign is -1, so the all-plus corner maps to +1.
  CHECK(f[0] == 1.0);
  CHECK(f[1] == -1.0);
  CHECK(f[7] == -1.0);
  for (std::size_t t = 0; t < 8; ++t)
    CHECK(f.fourier()[t] == doctest::Approx(t == 7 ? 1.0 : 0.0));
  CHECK(f.variance() == doctest::Approx(1.0));
}

TEST_CASE("dictator concentrates on its coordinate") {
  const auto f = BooleanFunction::dictator(3);
  for (std::size_t idx = 0; idx < 8; ++idx)
    CHECK(f[idx] == ((idx & 1u) ? -1.0 : 1.0));
  for (std::size_t t = 0; t < 8; ++t)
    CHECK(f.fourier()[t] == doctest::Approx(t == 1 ? 1.0 : 0.0));
}

TEST_CASE("majority_coefficient matches brute-force transforms") {
  for (int n : {3, 5, 7}) {
    const auto f = BooleanFunction::majority(n);
    for (int k = 0; k <= n; ++k) {
      // All size-k subsets share one coefficient; spot-check the prefix mask.
      const std::size_t mask = (k == 0) ? 0 : ((1u << k) - 1u);
      const double brute = oracles::fourier_brute(f.values(), mask);
      CHECK(clusterfeat::majority_coefficient(n, k) ==
            doctest::Approx(brute).epsilon(1e-12));
      if (k % 2 == 0) CHECK(clusterfeat::majority_coefficient(n, k) == 0.0);
    }
  }
  // Closed-form anchors for Maj_3.
  CHECK(clusterfeat::majority_coefficient(3, 1) == doctest::Approx(0.5));
  CHECK(clusterfeat::majority_coefficient(3, 3) == doctest::Approx(-0.5));
}

TEST_CASE("majority_coefficient validates arguments") {
  CHECK_THROWS_AS(clusterfeat::majority_coefficient(4, 1), std::invalid_argument);
  CHECK_THROWS_AS(clusterfeat::majority_coefficient(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(clusterfeat::majority_coefficient(3, -1), std::invalid_argument);
}

TEST_CASE("c_table follows the membership rule") {
  const int n = 3;
  const Eigen::MatrixXd c = clusterfeat::c_table(n);
  REQUIRE(c.rows() == 8);
  REQUIRE(c.cols() == 3);
  for (std::size_t t = 0; t < 8; ++t) {
    const int size = __builtin_popcount(static_cast<unsigned>(t));
    for (int i = 0; i < n; ++i) {
      const bool member = (t >> i) & 1u;
      double want;
      if (member && size == 1) want = 1.0;
      else if (member) want = clusterfeat::majority_coefficient(n, size - 1);
      else want = clusterfeat::majority_coefficient(n, size + 1);
      CHECK(c(static_cast<Eigen::Index>(t), i) == doctest::Approx(want));
    }
  }
}

TEST_CASE("margins of the three named targets") {
  const auto parity = clusterfeat::majority_margin(BooleanFunction::parity(3));
  CHECK(parity.margin == doctest::Approx(0.0));

  const auto maj = clusterfeat::majority_margin(BooleanFunction::majority(3));
  CHECK(maj.margin == doctest::Approx(1.0));
  for (int i = 0; i < 3; ++i) CHECK(maj.alpha(i) == doctest::Approx(0.25));

  const auto dict = clusterfeat::majority_margin(BooleanFunction::dictator(3));
  CHECK(dict.margin == doctest::Approx(2.0));
  CHECK(dict.alpha(0) == doctest::Approx(0.5));
  CHECK(dict.alpha(1) == doctest::Approx(0.0));
  CHECK(dict.alpha(2) == doctest::Approx(0.0));
}

TEST_CASE("constant functions have infinite margin") {
  const BooleanFunction f(3, std::vector<double>(8, 1.0));
  CHECK(std::isinf(clusterfeat::majority_margin(f).margin));
}

TEST_CASE("normalized rescales variance to one") {
  const BooleanFunction f(2, {3.0, 1.0, 1.0, 1.0});
  const auto g = f.normalized();
  CHECK(g.variance() == doctest::Approx(1.0));
  // The whole table is divided by the standard deviation, mean included.
  CHECK(g.mean() == doctest::Approx(f.mean() / std::sqrt(f.variance())));
  const BooleanFunction constant(2, {2.0, 2.0, 2.0, 2.0});
  CHECK_THROWS_AS(constant.normalized(), std::invalid_argument);
}

TEST_CASE("eval agrees with table indexing") {
  const auto f = BooleanFunction::majority(3);
  CHECK(f.eval({1, 1, 1}) == f[0]);
  CHECK(f.eval({-1, 1, 1}) == f[1]);
  CHECK(f.eval({1, -1, 1}) == f[2]);
  CHECK(f.eval({-1, -1, -1}) == f[7]);
  CHECK_THROWS_AS(f.eval({1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(f.eval({1, 1, 2}), std::invalid_argument);
}

TEST_CASE("named_target dispatches and validates") {
  CHECK(clusterfeat::named_target("parity", 3).kind() == "parity");
  CHECK(clusterfeat::named_target("majority", 5).kind() == "majority");
  CHECK(clusterfeat::named_target("dictator", 2).kind() == "dictator");
  CHECK_THROWS_AS(clusterfeat::named_target("nope", 3), std::invalid_argument);
  CHECK_THROWS_AS(clusterfeat::named_target("majority", 4), std::invalid_argument);
}

TEST_CASE("table sizes must be powers of two") {
  CHECK_THROWS_AS(BooleanFunction(2, {1.0, -1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(clusterfeat::walsh_hadamard({1.0, 2.0, 3.0}), std::invalid_argument);
}
