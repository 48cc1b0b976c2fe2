#include "clusterfeat/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "clusterfeat/linalg.hpp"

namespace clusterfeat {

AlphaVector alpha_population(const Eigen::VectorXd& w, const DataModel& model,
                             const Activation& act) {
  if (w.size() != model.dim())
    throw std::invalid_argument("alpha_population: w must have one entry per coordinate");
  const int n = model.n_clusters();
  Eigen::VectorXd delta_m = Eigen::VectorXd::Zero(n);
  double v2 = 0.0;
  for (int j = 0; j < model.dim(); ++j) {
    delta_m[model.partition.cluster_of(j)] += noise_mean(model.noise[j]) * w[j];
    v2 += w[j] * w[j] * noise_variance(model.noise[j]);
  }
  const auto& f = model.target;
  const std::size_t sz = f.size();
  AlphaVector out;
  out.alpha = Eigen::VectorXd::Zero(n);
  out.smoothing_variance = v2;
  out.provenance = "population_exact";
  for (std::size_t idx = 0; idx < sz; ++idx) {
    double t = 0.0;
    for (int i = 0; i < n; ++i)
      t += ((idx >> i) & 1 ? -1.0 : 1.0) * delta_m[i];
    const double s = smoothed_derivative(act, v2, t);
    for (int i = 0; i < n; ++i)
      out.alpha[i] += f[idx] * ((idx >> i) & 1 ? -1.0 : 1.0) * s;
  }
  out.alpha /= static_cast<double>(sz);
  return out;
}

AlphaVector alpha_homogeneous(const BooleanFunction& f, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("alpha_homogeneous: delta outside [0, 1]");
  const int n = f.n();
  if (n % 2 == 0)
    throw std::invalid_argument("alpha_homogeneous: N must be odd");
  const double sign = delta <= 0.5 ? 1.0 : -1.0;
  const BooleanFunction maj = BooleanFunction::majority(n);
  const std::size_t sz = f.size();
  AlphaVector out;
  out.alpha = Eigen::VectorXd::Zero(n);
  out.smoothing_variance = 0.0;
  out.provenance = "homogeneous_fourier";
  // alpha_i = (E[f s_i] + sign * E[f s_i Maj]) / 2; both terms exact sums.
  for (std::size_t idx = 0; idx < sz; ++idx) {
    for (int i = 0; i < n; ++i) {
      const double si = (idx >> i) & 1 ? -1.0 : 1.0;
      out.alpha[i] += f[idx] * si * (1.0 + sign * maj[idx]);
    }
  }
  out.alpha /= 2.0 * static_cast<double>(sz);
  return out;
}

MeanWithError population_gradient_mc(const Eigen::VectorXd& w,
                                     const DataModel& model, const Activation& act,
                                     int n_samples, Rng& rng) {
  if (w.size() != model.dim())
    throw std::invalid_argument("population_gradient_mc: dimension mismatch");
  if (n_samples < 2)
    throw std::invalid_argument("population_gradient_mc: need at least 2 samples");
  const int d = model.dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(d);
  for (int t = 0; t < n_samples; ++t) {
    Sample s = sample_one(model, rng);
    const double factor = s.y * act.derivative(w.dot(s.x));
    for (int j = 0; j < d; ++j) {
      const double g = factor * s.x[j];
      sum[j] += g;
      sum_sq[j] += g * g;
    }
  }
  MeanWithError out;
  out.mean = sum / n_samples;
  out.se.resize(d);
  for (int j = 0; j < d; ++j) {
    const double var =
        std::max(0.0, sum_sq[j] / n_samples - out.mean[j] * out.mean[j]);
    out.se[j] = std::sqrt(var / (n_samples - 1));
  }
  return out;
}

ProjectionGrid projection_grid(const Eigen::VectorXd& alpha,
                               const Eigen::VectorXd& v, double gamma, double tau,
                               double dedup_tol) {
  if (alpha.size() != v.size())
    throw std::invalid_argument("projection_grid: alpha and v must be the same length");
  const int n = static_cast<int>(alpha.size());
  if (n < 1 || n > 20) throw std::invalid_argument("projection_grid: need 1 <= N <= 20");
  ProjectionGrid grid;
  grid.alpha_tilde = gamma * tau * alpha.cwiseProduct(v);
  const std::size_t sz = std::size_t{1} << n;
  std::vector<double> raw(sz);
  for (std::size_t idx = 0; idx < sz; ++idx) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += ((idx >> i) & 1 ? -1.0 : 1.0) * grid.alpha_tilde[i];
    raw[idx] = acc;
  }
  std::vector<std::size_t> order(sz);
  for (std::size_t i = 0; i < sz; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
  grid.level_of.assign(sz, -1);
  for (std::size_t r = 0; r < sz; ++r) {
    const double val = raw[order[r]];
    if (grid.u.empty() || val - grid.u.back() > dedup_tol) grid.u.push_back(val);
    grid.level_of[order[r]] = static_cast<int>(grid.u.size()) - 1;
  }
  grid.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m < grid.u.size(); ++m)
    grid.min_gap = std::min(grid.min_gap, grid.u[m] - grid.u[m - 1]);
  return grid;
}

bool projection_consistent(const BooleanFunction& f, const ProjectionGrid& grid) {
  if (f.size() != grid.level_of.size())
    throw std::invalid_argument("projection_consistent: arity mismatch");
  std::vector<double> rep(grid.u.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    double& r = rep[grid.level_of[idx]];
    if (std::isnan(r))
      r = f[idx];
    else if (r != f[idx])
      return false;
  }
  return true;
}

namespace {

// f restricted to grid levels; requires consistency.
Eigen::VectorXd level_targets(const ProjectionGrid& grid, const BooleanFunction& f) {
  if (!projection_consistent(f, grid))
    throw CertificateError(
        "certificate: target is not projection-consistent on this grid", 0.0, -1);
  Eigen::VectorXd targets(grid.levels());
  for (std::size_t idx = 0; idx < f.size(); ++idx)
    targets[grid.level_of[idx]] = f[idx];
  return targets;
}

}  // namespace

Certificate build_certificate(const ProjectionGrid& grid, const BooleanFunction& f,
                              const Eigen::VectorXd& biases, const Activation& act) {
  const int m = grid.levels();
  const int n = static_cast<int>(biases.size());
  if (n < m)
    throw CertificateError("build_certificate: fewer biases than grid levels",
                           std::numeric_limits<double>::infinity(), -1);
  Eigen::VectorXd targets = level_targets(grid, f);
  Eigen::MatrixXd phi(m, n);
  for (int r = 0; r < m; ++r)
    for (int h = 0; h < n; ++h) phi(r, h) = act.value(grid.u[r] + biases[h]);

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cond = sv(m - 1) > 0.0
                          ? sv(0) / sv(m - 1)
                          : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12))
    throw CertificateError(
        "build_certificate: feature matrix condition estimate " +
            std::to_string(cond) +
            " exceeds 1e12; draw more or better-spread biases",
        cond, -1);
  auto min_norm_solve = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
    return svd.matrixV() *
           (sv.cwiseInverse().asDiagonal() * (svd.matrixU().transpose() * rhs));
  };
  Certificate cert;
  cert.a = min_norm_solve(targets);
  // One refinement pass recovers the digits the first solve loses on
  // nearly touching grid levels.
  cert.a += min_norm_solve(targets - phi * cert.a);
  cert.biases = biases;
  cert.residual = (phi * cert.a - targets).cwiseAbs().maxCoeff();
  cert.condition = cond;
  cert.norm2 = cert.a.norm();
  return cert;
}

TriangularCertificate build_certificate_triangular(const ProjectionGrid& grid,
                                                   const BooleanFunction& f,
                                                   const Eigen::VectorXd& biases,
                                                   double delta_sel) {
  const int m = grid.levels();
  if (m < 1) throw std::invalid_argument("build_certificate_triangular: empty grid");
  const double gap = grid.min_gap;
  if (m > 1 && !(gap > 0.0))
    throw std::invalid_argument("build_certificate_triangular: zero grid gap");
  if (delta_sel <= 0.0) delta_sel = std::isfinite(gap) ? gap / 4.0 : 1.0;
  if (std::isfinite(gap) && !(delta_sel < gap / 2.0))
    throw std::invalid_argument(
        "build_certificate_triangular: delta_sel must sit in (0, Delta/2)");

  Eigen::VectorXd targets = level_targets(grid, f);

  // One drawn bias inside each [-u_j + delta_sel/2, -u_j + delta_sel].
  std::vector<int> chosen(m, -1);
  int unhit = 0;
  for (int j = 0; j < m; ++j) {
    const double lo = -grid.u[j] + delta_sel / 2.0;
    const double hi = -grid.u[j] + delta_sel;
    for (int h = 0; h < biases.size(); ++h) {
      if (biases[h] >= lo && biases[h] <= hi) {
        chosen[j] = h;
        break;
      }
    }
    if (chosen[j] < 0) ++unhit;
  }
  if (unhit > 0)
    throw CertificateError("build_certificate_triangular: " +
                               std::to_string(unhit) +
                               " of " + std::to_string(m) +
                               " bias intervals were not hit; draw more biases",
                           0.0, unhit);

  // M(l, j) = ReLU(u_l + b_j) is lower triangular with positive diagonal in
  // sorted-level order; forward substitution gives the interpolant.
  Eigen::MatrixXd tri(m, m);
  for (int l = 0; l < m; ++l)
    for (int j = 0; j < m; ++j)
      tri(l, j) = std::max(0.0, grid.u[l] + biases[chosen[j]]);
  Eigen::VectorXd c(m);
  for (int l = 0; l < m; ++l) {
    double acc = targets[l];
    for (int j = 0; j < l; ++j) acc -= tri(l, j) * c[j];
    c[l] = acc / tri(l, l);
  }

  TriangularCertificate cert;
  cert.a = Eigen::VectorXd::Zero(biases.size());
  for (int j = 0; j < m; ++j) cert.a[chosen[j]] += c[j];
  cert.chosen = std::move(chosen);
  cert.a_inf = cert.a.cwiseAbs().maxCoeff();
  const double f_max = targets.cwiseAbs().maxCoeff();
  cert.bound = std::isfinite(gap) ? 2.0 / gap * f_max
                                  : std::numeric_limits<double>::infinity();
  cert.residual = (tri * c - targets).cwiseAbs().maxCoeff();
  return cert;
}

double AntiConcentrationReport::quantile(double q) const {
  if (gaps.empty()) throw std::logic_error("AntiConcentrationReport: no trials");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
  const double pos = q * (gaps.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, gaps.size() - 1);
  const double frac = pos - lo;
  return gaps[lo] * (1.0 - frac) + gaps[hi] * frac;
}

double AntiConcentrationReport::fraction_below(double eps) const {
  if (gaps.empty()) throw std::logic_error("AntiConcentrationReport: no trials");
  std::size_t count = 0;
  for (double g : gaps)
    if (g < eps) ++count;
  return static_cast<double>(count) / gaps.size();
}

AntiConcentrationReport anti_concentration_probe(const DataModel& model,
                                                 const Activation& act, int trials,
                                                 Rng& rng) {
  if (trials < 1) throw std::invalid_argument("anti_concentration_probe: trials >= 1");
  const int d = model.dim();
  const int n = model.n_clusters();
  const auto& f = model.target;
  const std::size_t sz = f.size();
  AntiConcentrationReport rep;
  rep.gaps.reserve(trials);
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  Eigen::VectorXd w(d);
  for (int t = 0; t < trials; ++t) {
    for (int j = 0; j < d; ++j) w[j] = sd * rng.normal();
    const Eigen::VectorXd alpha = alpha_population(w, model, act).alpha;
    std::vector<double> proj(sz);
    for (std::size_t idx = 0; idx < sz; ++idx) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += ((idx >> i) & 1 ? -1.0 : 1.0) * alpha[i];
      proj[idx] = acc;
    }
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < sz; ++a)
      for (std::size_t b = a + 1; b < sz; ++b)
        if (f[a] != f[b]) gap = std::min(gap, std::abs(proj[a] - proj[b]));
    rep.gaps.push_back(gap);
  }
  std::sort(rep.gaps.begin(), rep.gaps.end());
  return rep;
}

double hermite_coeff_variance(int k, double a, double mu, int degree) {
  if (k < 0 || degree < 0)
    throw std::invalid_argument("hermite_coeff_variance: k and degree must be >= 0");
  if (!(a > 0.0) || !(mu >= 0.0))
    throw std::invalid_argument("hermite_coeff_variance: need a > 0, mu >= 0");
  if (k > degree) return 0.0;
  double total = 0.0;
  for (int r = 0; r <= (degree - k) / 2; ++r) {
    // term = ((k+2r)!/k!) * (mu/2)^r / r!
    double term = 1.0;
    for (int i = k + 1; i <= k + 2 * r; ++i) term *= i;
    for (int i = 1; i <= r; ++i) term *= (mu / 2.0) / i;
    total += term * term;
  }
  return std::pow(a, k) * total;
}

double small_ball_bound(int n, double tau, double s_min) {
  if (n < 1 || !(tau >= 0.0) || !(s_min > 0.0))
    throw std::invalid_argument("small_ball_bound: bad arguments");
  return (n + 1) * std::sqrt(2.0 / std::numbers::pi) * tau / s_min;
}

}  // namespace clusterfeat
