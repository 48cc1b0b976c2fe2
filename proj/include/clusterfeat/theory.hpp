#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clusterfeat/latent_data.hpp"
#include "clusterfeat/network.hpp"

namespace clusterfeat {

struct AlphaVector {
  Eigen::VectorXd alpha;
  double smoothing_variance;  // V^2 = sum_j w_j^2 tau_j^2 behind the S_v
  std::string provenance;     // "population_exact" or "homogeneous_fourier"
};

// alpha_i(w) = E_s[f(s) s_i S_{V^2}(s^T Delta_m(w))] with
// (Delta_m(w))_i = sum_{j in C_i} m_j w_j.  Exact 2^N enumeration.
AlphaVector alpha_population(const Eigen::VectorXd& w, const DataModel& model,
                             const Activation& act);

// Homogeneous-channel / ReLU / all-equal-weights limit:
// alpha_i = (fhat({i}) + sign(1-2delta) * E[f(s) s_i Maj_N(s)]) / 2,
// evaluated exactly from the Fourier table and the c table.
AlphaVector alpha_homogeneous(const BooleanFunction& f, double delta);

struct MeanWithError {
  Eigen::VectorXd mean;  // one entry per coordinate
  Eigen::VectorXd se;    // standard error of the mean
};

// Monte Carlo estimate of the population gradient statistic
// g(w_j) = E[y sigma'(w^T x) x_j], all coordinates from shared draws.
MeanWithError population_gradient_mc(const Eigen::VectorXd& w,
                                     const DataModel& model, const Activation& act,
                                     int n_samples, Rng& rng);

struct ProjectionGrid {
  Eigen::VectorXd alpha_tilde;   // gamma * tau * alpha_i * v_i
  std::vector<double> u;         // sorted distinct projection values
  std::vector<int> level_of;     // size 2^N; grid index of each corner
  double min_gap;                // +inf when only one level
  int levels() const { return static_cast<int>(u.size()); }
};

ProjectionGrid projection_grid(const Eigen::VectorXd& alpha,
                               const Eigen::VectorXd& v, double gamma, double tau,
                               double dedup_tol = 1e-12);

// True iff no two corners with different f share a grid level.
bool projection_consistent(const BooleanFunction& f, const ProjectionGrid& grid);

class CertificateError : public std::runtime_error {
 public:
  CertificateError(const std::string& msg, double condition, int unhit)
      : std::runtime_error(msg), condition(condition), unhit_intervals(unhit) {}
  double condition;     // feature matrix condition estimate (certificate route), else 0
  int unhit_intervals;  // triangular route, else -1
};

struct Certificate {
  Eigen::VectorXd a;  // one weight per supplied bias
  Eigen::VectorXd biases;
  double residual;    // max_m |sum_h a_h sigma(u_m + b_h) - f_m|
  double condition;   // singular value ratio of Phi
  double norm2;       // ||a||_2
};

// Minimum-norm interpolation of f on the grid levels by the bias features
// sigma(u_m + b_h), solved through the SVD of Phi directly (the explicit
// Gram matrix would square the conditioning, which close grid levels cannot
// afford).  Throws CertificateError when the condition estimate exceeds 1e12
// (more or better-spread biases needed).
Certificate build_certificate(const ProjectionGrid& grid, const BooleanFunction& f,
                              const Eigen::VectorXd& biases, const Activation& act);

struct TriangularCertificate {
  Eigen::VectorXd a;         // sparse over the supplied biases
  std::vector<int> chosen;   // drawn-bias index picked for each grid level
  double a_inf;              // ||a||_inf
  double bound;              // (2/Delta) * max_m |f_m|, the guaranteed cap
  double residual;
};

// ReLU-specific one-bias-per-level construction: picks one drawn bias in each
// interval [-u_j + delta_sel/2, -u_j + delta_sel], solves the resulting
// lower-triangular system by forward substitution.  delta_sel <= 0 defaults
// to Delta/4.  Throws CertificateError listing unhit intervals on failure.
TriangularCertificate build_certificate_triangular(const ProjectionGrid& grid,
                                                   const BooleanFunction& f,
                                                   const Eigen::VectorXd& biases,
                                                   double delta_sel = -1.0);

struct AntiConcentrationReport {
  std::vector<double> gaps;  // sorted; min_{f(s) != f(t)} |alpha^T (s - t)| per trial
  double quantile(double q) const;
  double fraction_below(double eps) const;
};

// Draws w ~ N(0, I_d/d) per trial and measures how close the projection
// alpha(w) comes to collapsing two corners the target separates.
AntiConcentrationReport anti_concentration_probe(const DataModel& model,
                                                 const Activation& act, int trials,
                                                 Rng& rng);

// Variance of the k-th Hermite coefficient of the Gaussian-smoothed random
// activation: s_k^2 = a^k * sum_r [ ((k+2r)!/k!) * (mu/2)^r / r! ]^2 over
// 0 <= r <= floor((M-k)/2).
double hermite_coeff_variance(int k, double a, double mu, int degree);

// (N+1) * sqrt(2/pi) * tau / s_min
double small_ball_bound(int n, double tau, double s_min);

}  // namespace clusterfeat
