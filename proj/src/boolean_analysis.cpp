#include "clusterfeat/boolean_analysis.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace clusterfeat {

namespace {

constexpr int kMaxN = 20;  // 2^N tables are the contract; past this they aren't.

void check_n(int n) {
  if (n < 1 || n > kMaxN)
    throw std::invalid_argument("BooleanFunction: need 1 <= N <= 20, got " +
                                std::to_string(n));
}

void butterfly(std::vector<double>& v) {
  const std::size_t sz = v.size();
  for (std::size_t len = 1; len < sz; len <<= 1) {
    for (std::size_t i = 0; i < sz; i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = v[j], b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
    }
  }
}

// Exact for the ranges used here (arguments stay well under 2^53).
double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

}  // namespace

std::vector<double> walsh_hadamard(std::vector<double> values) {
  if (values.empty() || (values.size() & (values.size() - 1)) != 0)
    throw std::invalid_argument("walsh_hadamard: length must be a power of two");
  butterfly(values);
  const double norm = 1.0 / static_cast<double>(values.size());
  for (double& x : values) x *= norm;
  return values;
}

std::vector<double> inverse_walsh_hadamard(std::vector<double> coeffs) {
  if (coeffs.empty() || (coeffs.size() & (coeffs.size() - 1)) != 0)
    throw std::invalid_argument("inverse_walsh_hadamard: length must be a power of two");
  butterfly(coeffs);
  return coeffs;
}

BooleanFunction::BooleanFunction(int n, std::vector<double> values,
                                 std::string kind)
    : n_(n), kind_(std::move(kind)), values_(std::move(values)) {
  check_n(n);
  if (values_.size() != (std::size_t{1} << n))
    throw std::invalid_argument("BooleanFunction: table size must be 2^N");
  for (double v : values_)
    if (!std::isfinite(v))
      throw std::invalid_argument("BooleanFunction: non-finite table entry");
  fourier_ = walsh_hadamard(values_);
}

BooleanFunction BooleanFunction::parity(int n) {
  check_n(n);
  std::vector<double> v(std::size_t{1} << n);
  for (std::size_t idx = 0; idx < v.size(); ++idx)
    v[idx] = (std::popcount(idx) & 1) ? -1.0 : 1.0;
  return BooleanFunction(n, std::move(v), "parity");
}

BooleanFunction BooleanFunction::majority(int n) {
  check_n(n);
  if (n % 2 == 0)
    throw std::invalid_argument("majority: N must be odd (no tie-breaking)");
  std::vector<double> v(std::size_t{1} << n);
  for (std::size_t idx = 0; idx < v.size(); ++idx)
    v[idx] = (n - 2 * std::popcount(idx) > 0) ? 1.0 : -1.0;
  return BooleanFunction(n, std::move(v), "majority");
}

BooleanFunction BooleanFunction::dictator(int n) {
  check_n(n);
  std::vector<double> v(std::size_t{1} << n);
  for (std::size_t idx = 0; idx < v.size(); ++idx)
    v[idx] = (idx & 1) ? -1.0 : 1.0;
  return BooleanFunction(n, std::move(v), "dictator");
}

double BooleanFunction::eval(const std::vector<int>& signs) const {
  if (static_cast<int>(signs.size()) != n_)
    throw std::invalid_argument("BooleanFunction::eval: wrong arity");
  std::size_t idx = 0;
  for (int b = 0; b < n_; ++b) {
    if (signs[b] == -1)
      idx |= std::size_t{1} << b;
    else if (signs[b] != 1)
      throw std::invalid_argument("BooleanFunction::eval: signs must be +-1");
  }
  return values_[idx];
}

double BooleanFunction::variance() const {
  double s = 0.0;
  for (std::size_t t = 1; t < fourier_.size(); ++t) s += fourier_[t] * fourier_[t];
  return s;
}

BooleanFunction BooleanFunction::normalized() const {
  const double var = variance();
  if (var <= 0.0)
    throw std::invalid_argument("BooleanFunction::normalized: constant function");
  std::vector<double> v = values_;
  const double scale = 1.0 / std::sqrt(var);
  for (double& x : v) x *= scale;
  return BooleanFunction(n_, std::move(v), kind_ == "table" ? "table" : kind_);
}

BooleanFunction named_target(const std::string& name, int n) {
  if (name == "parity") return BooleanFunction::parity(n);
  if (name == "majority") return BooleanFunction::majority(n);
  if (name == "dictator") return BooleanFunction::dictator(n);
  throw std::invalid_argument("named_target: unknown target '" + name + "'");
}

double majority_coefficient(int n, int k) {
  check_n(n);
  if (n % 2 == 0)
    throw std::invalid_argument("majority_coefficient: N must be odd");
  if (k < 0 || k > n)
    throw std::invalid_argument("majority_coefficient: need 0 <= k <= N");
  if (k % 2 == 0) return 0.0;  // Maj_N is odd, even levels vanish
  const int sign = ((k - 1) / 2) % 2 ? -1 : 1;
  const double central = binomial(n - 1, (n - 1) / 2) * std::pow(0.5, n - 1);
  return sign * binomial((n - 1) / 2, (k - 1) / 2) / binomial(n - 1, k - 1) *
         central;
}

Eigen::MatrixXd c_table(int n) {
  check_n(n);
  if (n % 2 == 0) throw std::invalid_argument("c_table: N must be odd");
  const std::size_t sz = std::size_t{1} << n;
  // Only N distinct Maj^ values show up; precompute them.
  std::vector<double> maj(n + 2, 0.0);
  for (int k = 0; k <= n; ++k) maj[k] = majority_coefficient(n, k);
  maj[n + 1] = 0.0;  // |T|+1 can reach N+1, which is even anyway
  Eigen::MatrixXd c(sz, n);
  for (std::size_t t = 0; t < sz; ++t) {
    const int card = std::popcount(t);
    for (int i = 0; i < n; ++i) {
      const bool in = (t >> i) & 1;
      if (in && card == 1)
        c(t, i) = 1.0;
      else if (in)
        c(t, i) = maj[card - 1];
      else
        c(t, i) = maj[card + 1];
    }
  }
  return c;
}

MarginResult majority_margin(const BooleanFunction& f) {
  const int n = f.n();
  if (n % 2 == 0) throw std::invalid_argument("majority_margin: N must be odd");
  const Eigen::MatrixXd c = c_table(n);
  const auto& fhat = f.fourier();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  for (std::size_t t = 0; t < fhat.size(); ++t)
    if (fhat[t] != 0.0) alpha += 0.5 * fhat[t] * c.row(t).transpose();

  // u(s) = sum_i s_i * 2 alpha_i per corner, then scan disagreeing pairs.
  const std::size_t sz = f.size();
  std::vector<double> u(sz);
  for (std::size_t idx = 0; idx < sz; ++idx) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += ((idx >> i) & 1 ? -1.0 : 1.0) * 2.0 * alpha[i];
    u[idx] = acc;
  }
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < sz; ++a)
    for (std::size_t b = a + 1; b < sz; ++b)
      if (f[a] != f[b]) margin = std::min(margin, std::abs(u[a] - u[b]));
  return {std::move(alpha), margin};
}

}  // namespace clusterfeat
