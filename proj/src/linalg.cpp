#include "clusterfeat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace clusterfeat {

static double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a, double tol,
                               int max_sweeps) {
  if (a.rows() != a.cols()) throw std::invalid_argument("symmetric_eigen: matrix not square");
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd m = 0.5 * (a + a.transpose());  // symmetrize roundoff
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(m.norm(), std::numeric_limits<double>::min());

  int sweep = 0;
  while (off_diagonal_norm(m) > tol * scale) {
    if (++sweep > max_sweeps)
      throw std::runtime_error("symmetric_eigen: Jacobi sweeps did not converge");
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        // Stable tangent of the rotation angle, smaller root.
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd diag = m.diagonal();
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return diag[i] > diag[j]; });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = diag[order[k]];
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

double condition_from_spectrum(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw std::invalid_argument("condition_from_spectrum: empty spectrum");
  const double hi = values.maxCoeff();
  const double lo = values.minCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Eigen::VectorXd eigen_solve(const SymmetricEigen& eig, const Eigen::VectorXd& b) {
  Eigen::VectorXd proj = eig.vectors.transpose() * b;
  for (int k = 0; k < proj.size(); ++k) proj[k] /= eig.values[k];
  return eig.vectors * proj;
}

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("hungarian: cost matrix not square");
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials formulation, rows/columns 1-based with a dummy 0 slot.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(n);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) match[p[j] - 1] = j - 1;
  return match;
}

}  // namespace clusterfeat
