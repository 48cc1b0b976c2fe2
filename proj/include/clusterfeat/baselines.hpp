#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clusterfeat/linalg.hpp"
#include "clusterfeat/rng.hpp"

namespace clusterfeat {

// (1/B) X^T X with rows as samples.  Deliberately uncentered: the model has
// E[x] = 0, and the cluster structure lives in the second moment.
Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& x);

struct RecoveredPartition {
  std::vector<int> labels;  // contiguous from 0 in order of first appearance
  int n_found;
  std::string method;
  Eigen::VectorXd eigenvalues;  // spectral route only (top N), else empty
};

// Declare i ~ j when |C_ij| >= threshold, then take connected components.
RecoveredPartition covariance_threshold_cluster(const Eigen::MatrixXd& cov,
                                                double threshold);

// Rows of the top-N eigenvector embedding, k-means with `restarts` restarts;
// the first restart seeds centroids from the most common coordinate sign
// patterns, the rest from random rows.
RecoveredPartition spectral_cluster(const Eigen::MatrixXd& cov, int n_clusters,
                                    Rng& rng, int restarts = 50);

// Fraction of coordinates misassigned under the best label matching
// (exhaustive for <= 8 labels, Hungarian beyond).
double partition_error(const std::vector<int>& found, const std::vector<int>& truth);

// Canonical homogeneous-channel operating point: (1-2delta)^2 / 2.
double bsc_edge_threshold(double delta);

// ceil(16 ln(d) / (1-2delta)^4) samples make thresholding reliable.
std::int64_t bsc_sample_budget(int dim, double delta);

}  // namespace clusterfeat
