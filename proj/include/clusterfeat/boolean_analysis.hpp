#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace clusterfeat {

// In-place Walsh-Hadamard butterfly.  Forward maps a value table to Fourier
// coefficients fhat(T) = E_s[f(s) chi_T(s)] (includes the 2^-N), inverse maps
// coefficients back to values.  Length must be a power of two.
std::vector<double> walsh_hadamard(std::vector<double> values);
std::vector<double> inverse_walsh_hadamard(std::vector<double> coeffs);

// f : {-1,+1}^N -> R as a table of 2^N values.  Bit b of the index set means
// s_b = -1, so index 0 is the all-plus corner.  Immutable after construction.
class BooleanFunction {
 public:
  BooleanFunction(int n, std::vector<double> values,
                  std::string kind = "table");

  static BooleanFunction parity(int n);
  static BooleanFunction majority(int n);  // n odd
  static BooleanFunction dictator(int n);  // f(s) = s_0

  int n() const { return n_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t index) const { return values_[index]; }
  // Evaluate on an explicit sign vector (entries +-1).
  double eval(const std::vector<int>& signs) const;

  const std::vector<double>& values() const { return values_; }
  // Indexed by subset mask T.
  const std::vector<double>& fourier() const { return fourier_; }

  double mean() const { return fourier_[0]; }
  double variance() const;

  // f / sqrt(Var f); the mean is left alone, only the scale is pinned.
  // Throws on constant f.
  BooleanFunction normalized() const;

  // "parity" / "majority" / "dictator" / "table"; drives serialization.
  const std::string& kind() const { return kind_; }

 private:
  int n_;
  std::string kind_;
  std::vector<double> values_;
  std::vector<double> fourier_;
};

BooleanFunction named_target(const std::string& name, int n);

// Fourier coefficient of Maj_N on any subset of size k (it only depends on
// the size).  Zero for even k; N must be odd, 0 <= k <= N.
double majority_coefficient(int n, int k);

// c[T][i]: 1 when T = {i}; Maj^_N(|T|-1) when i is in T with |T| > 1;
// Maj^_N(|T|+1) when i is not in T.  Rows indexed by subset mask.
Eigen::MatrixXd c_table(int n);

struct MarginResult {
  Eigen::VectorXd alpha;  // alpha_i = (1/2) sum_T fhat(T) c[T][i]
  double margin;          // min over f(s) != f(t) of |sum_i (s_i - t_i) 2 alpha_i|
};

// Margin of f under the majority-smoothing projection; +inf for constant f.
MarginResult majority_margin(const BooleanFunction& f);

}  // namespace clusterfeat
