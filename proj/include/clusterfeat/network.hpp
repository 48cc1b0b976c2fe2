#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "clusterfeat/rng.hpp"

namespace clusterfeat {

// ReLU or a real polynomial sum_k coeffs[k] z^k.  The ReLU derivative at the
// kink is taken to be 0 (subgradient choice used consistently by training).
class Activation {
 public:
  static Activation relu();
  static Activation polynomial(std::vector<double> coeffs);
  // sum_{k=1}^{degree} z^k / k!; handy smooth default, all smoothed
  // derivatives positive.
  static Activation truncated_exp(int degree);

  bool is_relu() const { return relu_; }
  bool is_polynomial() const { return !relu_; }
  int degree() const;
  const std::vector<double>& coeffs() const;

  double value(double z) const;
  double derivative(double z) const;

  std::string kind() const { return relu_ ? "relu" : "polynomial"; }

 private:
  Activation() = default;
  bool relu_ = false;
  std::vector<double> coeffs_;
};

nlohmann::json activation_to_json(const Activation& act);
Activation activation_from_json(const nlohmann::json& j);

// Coefficients of t -> E_{G~N(0,v)}[p(t+G)] for a polynomial p, via the even
// Gaussian moments E[G^{2m}] = v^m (2m-1)!!.
std::vector<double> gaussian_smooth_poly(const std::vector<double>& coeffs,
                                         double v);

// S_v(t) = E_{G~N(0,v)}[sigma'(t+G)].  Polynomials in closed form; ReLU through
// S_v(t) = Phi(t/sqrt(v)).  ReLU with v=0 falls back to the raw derivative and
// rejects t=0 (the kink has no canonical value).
double smoothed_derivative(const Activation& act, double v, double t);

// k-th derivative of S_v at 0.  Polynomial activations only; identically 0
// above the degree of sigma'.
double smoothed_derivative_order(const Activation& act, double v, int k);

struct ActivationCheck {
  std::vector<double> s_k;  // S^(k)_{mu + v_sum/d}(0) for k = 0..N
  double min_abs;
  bool pass;              // min_abs >= c0
  bool degree_warning;    // degree(sigma) < 2^N: cannot separate all levels
};

ActivationCheck check_activation_assumption(const Activation& act, double mu,
                                            double v_sum, double d, int n,
                                            double c0);

struct TwoLayerNet {
  Eigen::MatrixXd w;  // hidden x dim
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  Activation act;

  int hidden() const { return static_cast<int>(w.rows()); }
  int dim() const { return static_cast<int>(w.cols()); }
};

double forward(const TwoLayerNet& net, const Eigen::VectorXd& x);
// One output per row of x.
Eigen::VectorXd forward(const TwoLayerNet& net, const Eigen::MatrixXd& x);

// Algorithm-1 start: rows of w ~ N(0, I_d/d), a = tau * ones, b = 0.
TwoLayerNet init_layerwise(int hidden, int dim, double tau,
                           const Activation& act, Rng& rng);
// Homogeneous-channel variant: every first-layer weight exactly 1/sqrt(d).
TwoLayerNet init_deterministic(int hidden, int dim, double tau,
                               const Activation& act);

nlohmann::json net_to_json(const TwoLayerNet& net);
TwoLayerNet net_from_json(const nlohmann::json& j);

}  // namespace clusterfeat
