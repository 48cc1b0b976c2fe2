#pragma once

#include <Eigen/Dense>

namespace clusterfeat {

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column k pairs with values[k]
};

// Cyclic Jacobi rotations on a symmetric matrix.  Converges when the
// off-diagonal Frobenius mass drops below tol * ||A||_F; throws if the sweep
// cap is hit first.  Plenty for the desk scales used here (d <= 2000).
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a, double tol = 1e-12,
                               int max_sweeps = 60);

// lambda_max / lambda_min of a symmetric PSD matrix given its spectrum;
// returns +inf when the smallest eigenvalue is <= 0.
double condition_from_spectrum(const Eigen::VectorXd& values);

// Solve A x = b through an existing eigendecomposition of symmetric A.
Eigen::VectorXd eigen_solve(const SymmetricEigen& eig, const Eigen::VectorXd& b);

// Minimal-cost assignment on a square cost matrix (Hungarian algorithm,
// O(n^3) potentials form).  Returns the column matched to each row.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

}  // namespace clusterfeat
