#include "clusterfeat/network.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "clusterfeat/io.hpp"

namespace clusterfeat {

Activation Activation::relu() {
  Activation a;
  a.relu_ = true;
  return a;
}

Activation Activation::polynomial(std::vector<double> coeffs) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.empty())
    throw std::invalid_argument("Activation::polynomial: empty coefficient list");
  for (double c : coeffs)
    if (!std::isfinite(c))
      throw std::invalid_argument("Activation::polynomial: non-finite coefficient");
  Activation a;
  a.coeffs_ = std::move(coeffs);
  return a;
}

Activation Activation::truncated_exp(int degree) {
  if (degree < 1) throw std::invalid_argument("truncated_exp: degree must be >= 1");
  std::vector<double> c(degree + 1, 0.0);
  double fact = 1.0;
  for (int k = 1; k <= degree; ++k) {
    fact *= k;
    c[k] = 1.0 / fact;
  }
  return polynomial(std::move(c));
}

int Activation::degree() const {
  if (relu_) throw std::logic_error("Activation::degree: not a polynomial");
  return static_cast<int>(coeffs_.size()) - 1;
}

const std::vector<double>& Activation::coeffs() const {
  if (relu_) throw std::logic_error("Activation::coeffs: not a polynomial");
  return coeffs_;
}

double Activation::value(double z) const {
  if (relu_) return z > 0.0 ? z : 0.0;
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * z + coeffs_[k];
  return acc;
}

double Activation::derivative(double z) const {
  if (relu_) return z > 0.0 ? 1.0 : 0.0;
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) acc = acc * z + k * coeffs_[k];
  return acc;
}

nlohmann::json activation_to_json(const Activation& act) {
  if (act.is_relu()) return {{"kind", "relu"}};
  return {{"kind", "polynomial"}, {"coeffs", act.coeffs()}};
}

Activation activation_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"kind", "coeffs"}, "activation");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "relu") return Activation::relu();
  if (kind == "polynomial")
    return Activation::polynomial(j.at("coeffs").get<std::vector<double>>());
  throw std::invalid_argument("activation_from_json: unknown kind '" + kind + "'");
}

std::vector<double> gaussian_smooth_poly(const std::vector<double>& coeffs,
                                         double v) {
  if (!(v >= 0.0)) throw std::invalid_argument("gaussian_smooth_poly: v must be >= 0");
  const int deg = static_cast<int>(coeffs.size()) - 1;
  // moments[m] = E[G^m]
  std::vector<double> moments(deg + 1, 0.0);
  moments[0] = 1.0;
  for (int m = 2; m <= deg; m += 2) moments[m] = moments[m - 2] * v * (m - 1);
  std::vector<double> out(coeffs.size(), 0.0);
  // E[(t+G)^r] = sum_m C(r,m) E[G^m] t^{r-m}
  for (int r = 0; r <= deg; ++r) {
    if (coeffs[r] == 0.0) continue;
    double binom = 1.0;
    for (int m = 0; m <= r; ++m) {
      if (m > 0) binom = binom * (r - m + 1) / m;
      if (moments[m] != 0.0) out[r - m] += coeffs[r] * binom * moments[m];
    }
  }
  return out;
}

namespace {

std::vector<double> poly_derivative(const std::vector<double>& coeffs) {
  if (coeffs.size() <= 1) return {0.0};
  std::vector<double> d(coeffs.size() - 1);
  for (std::size_t k = 1; k < coeffs.size(); ++k) d[k - 1] = k * coeffs[k];
  return d;
}

double poly_eval(const std::vector<double>& coeffs, double t) {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * t + coeffs[k];
  return acc;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double smoothed_derivative(const Activation& act, double v, double t) {
  if (!(v >= 0.0)) throw std::invalid_argument("smoothed_derivative: v must be >= 0");
  if (act.is_relu()) {
    if (v == 0.0) {
      if (t == 0.0)
        throw std::invalid_argument(
            "smoothed_derivative: ReLU kink at t=0 with no smoothing");
      return t > 0.0 ? 1.0 : 0.0;
    }
    return normal_cdf(t / std::sqrt(v));
  }
  return poly_eval(gaussian_smooth_poly(poly_derivative(act.coeffs()), v), t);
}

double smoothed_derivative_order(const Activation& act, double v, int k) {
  if (k < 0) throw std::invalid_argument("smoothed_derivative_order: k must be >= 0");
  if (act.is_relu())
    throw std::invalid_argument(
        "smoothed_derivative_order: closed-form orders need a polynomial");
  const auto smoothed = gaussian_smooth_poly(poly_derivative(act.coeffs()), v);
  if (k >= static_cast<int>(smoothed.size())) return 0.0;
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return fact * smoothed[k];
}

ActivationCheck check_activation_assumption(const Activation& act, double mu,
                                            double v_sum, double d, int n,
                                            double c0) {
  if (!act.is_polynomial())
    throw std::invalid_argument("check_activation_assumption: polynomial sigma only");
  if (!(d > 0.0) || n < 1 || !(c0 > 0.0) || !(mu >= 0.0) || !(v_sum >= 0.0))
    throw std::invalid_argument("check_activation_assumption: bad arguments");
  const double v = mu + v_sum / d;
  ActivationCheck out;
  out.s_k.resize(n + 1);
  for (int k = 0; k <= n; ++k) out.s_k[k] = smoothed_derivative_order(act, v, k);
  out.min_abs = std::abs(out.s_k[0]);
  for (double s : out.s_k) out.min_abs = std::min(out.min_abs, std::abs(s));
  out.pass = out.min_abs >= c0;
  out.degree_warning = n < 31 && act.degree() < (1 << n);
  return out;
}

double forward(const TwoLayerNet& net, const Eigen::VectorXd& x) {
  if (x.size() != net.dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  Eigen::VectorXd z = net.w * x + net.b;
  double acc = 0.0;
  for (int h = 0; h < net.hidden(); ++h) acc += net.a[h] * net.act.value(z[h]);
  return acc;
}

Eigen::VectorXd forward(const TwoLayerNet& net, const Eigen::MatrixXd& x) {
  if (x.cols() != net.dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  Eigen::MatrixXd z = x * net.w.transpose();
  z.rowwise() += net.b.transpose();
  for (int r = 0; r < z.rows(); ++r)
    for (int c = 0; c < z.cols(); ++c) z(r, c) = net.act.value(z(r, c));
  return z * net.a;
}

TwoLayerNet init_layerwise(int hidden, int dim, double tau,
                           const Activation& act, Rng& rng) {
  if (hidden < 1 || dim < 1)
    throw std::invalid_argument("init_layerwise: hidden and dim must be positive");
  Eigen::MatrixXd w(hidden, dim);
  const double sd = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int h = 0; h < hidden; ++h)
    for (int j = 0; j < dim; ++j) w(h, j) = sd * rng.normal();
  return TwoLayerNet{std::move(w), Eigen::VectorXd::Constant(hidden, tau),
                     Eigen::VectorXd::Zero(hidden), act};
}

TwoLayerNet init_deterministic(int hidden, int dim, double tau,
                               const Activation& act) {
  if (hidden < 1 || dim < 1)
    throw std::invalid_argument("init_deterministic: hidden and dim must be positive");
  return TwoLayerNet{Eigen::MatrixXd::Constant(
                         hidden, dim, 1.0 / std::sqrt(static_cast<double>(dim))),
                     Eigen::VectorXd::Constant(hidden, tau),
                     Eigen::VectorXd::Zero(hidden), act};
}

nlohmann::json net_to_json(const TwoLayerNet& net) {
  std::vector<double> w(net.w.size());
  for (int h = 0; h < net.hidden(); ++h)
    for (int j = 0; j < net.dim(); ++j) w[h * net.dim() + j] = net.w(h, j);
  return {{"n", net.hidden()},
          {"d", net.dim()},
          {"activation", activation_to_json(net.act)},
          {"W", w},
          {"a", std::vector<double>(net.a.begin(), net.a.end())},
          {"b", std::vector<double>(net.b.begin(), net.b.end())}};
}

TwoLayerNet net_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"n", "d", "activation", "W", "a", "b"}, "net");
  const int n = j.at("n").get<int>();
  const int d = j.at("d").get<int>();
  auto w = j.at("W").get<std::vector<double>>();
  auto a = j.at("a").get<std::vector<double>>();
  auto b = j.at("b").get<std::vector<double>>();
  if (static_cast<int>(w.size()) != n * d)
    throw std::invalid_argument("net_from_json: W has wrong size");
  if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n)
    throw std::invalid_argument("net_from_json: a or b has wrong size");
  Eigen::MatrixXd wm(n, d);
  for (int h = 0; h < n; ++h)
    for (int jj = 0; jj < d; ++jj) wm(h, jj) = w[h * d + jj];
  return TwoLayerNet{std::move(wm), Eigen::Map<Eigen::VectorXd>(a.data(), n),
                     Eigen::Map<Eigen::VectorXd>(b.data(), n),
                     activation_from_json(j.at("activation"))};
}

}  // namespace clusterfeat
