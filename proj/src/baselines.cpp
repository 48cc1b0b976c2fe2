#include "clusterfeat/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace clusterfeat {

Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& x) {
  if (x.rows() < 1) throw std::invalid_argument("empirical_covariance: no samples");
  return x.transpose() * x / static_cast<double>(x.rows());
}

namespace {

// Union-find with path halving.
struct DisjointSets {
  explicit DisjointSets(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
  std::vector<int> parent;
};

std::vector<int> relabel_contiguous(const std::vector<int>& raw, int* n_out) {
  std::vector<int> labels(raw.size(), -1);
  std::vector<int> seen;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    auto it = std::find(seen.begin(), seen.end(), raw[j]);
    if (it == seen.end()) {
      seen.push_back(raw[j]);
      labels[j] = static_cast<int>(seen.size()) - 1;
    } else {
      labels[j] = static_cast<int>(it - seen.begin());
    }
  }
  *n_out = static_cast<int>(seen.size());
  return labels;
}

}  // namespace

RecoveredPartition covariance_threshold_cluster(const Eigen::MatrixXd& cov,
                                                double threshold) {
  if (cov.rows() != cov.cols())
    throw std::invalid_argument("covariance_threshold_cluster: matrix not square");
  if (!(threshold >= 0.0))
    throw std::invalid_argument("covariance_threshold_cluster: negative threshold");
  const int d = static_cast<int>(cov.rows());
  DisjointSets ds(d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (std::abs(cov(i, j)) >= threshold) ds.unite(i, j);
  std::vector<int> roots(d);
  for (int j = 0; j < d; ++j) roots[j] = ds.find(j);
  RecoveredPartition out;
  out.labels = relabel_contiguous(roots, &out.n_found);
  out.method = "covariance_threshold";
  return out;
}

namespace {

double kmeans_assign(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& centroids,
                     std::vector<int>* labels) {
  const int n = static_cast<int>(rows.rows());
  const int k = static_cast<int>(centroids.rows());
  double inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < k; ++c) {
      const double dist = (rows.row(i) - centroids.row(c)).squaredNorm();
      if (dist < best) {
        best = dist;
        arg = c;
      }
    }
    (*labels)[i] = arg;
    inertia += best;
  }
  return inertia;
}

double kmeans_run(const Eigen::MatrixXd& rows, Eigen::MatrixXd centroids,
                  std::vector<int>* labels) {
  const int n = static_cast<int>(rows.rows());
  const int k = static_cast<int>(centroids.rows());
  double inertia = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<int> next(n);
    inertia = kmeans_assign(rows, centroids, &next);
    if (next == *labels) break;
    *labels = next;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, rows.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row((*labels)[i]) += rows.row(i);
      ++counts[(*labels)[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(c) = sums.row(c) / counts[c];
      } else {
        // Re-seed an empty centroid at the point farthest from its own.
        int far = 0;
        double far_dist = -1.0;
        for (int i = 0; i < n; ++i) {
          const double dist =
              (rows.row(i) - centroids.row((*labels)[i])).squaredNorm();
          if (dist > far_dist) {
            far_dist = dist;
            far = i;
          }
        }
        centroids.row(c) = rows.row(far);
      }
    }
  }
  return inertia;
}

// Centroids from the N most populous sign patterns of the embedding rows.
Eigen::MatrixXd sign_pattern_seeds(const Eigen::MatrixXd& rows, int k, Rng& rng) {
  const int n = static_cast<int>(rows.rows());
  const int c = static_cast<int>(rows.cols());
  std::vector<std::size_t> pattern(n);
  for (int i = 0; i < n; ++i) {
    std::size_t p = 0;
    for (int j = 0; j < c; ++j)
      if (rows(i, j) < 0) p |= std::size_t{1} << j;
    pattern[i] = p;
  }
  std::vector<std::size_t> uniq = pattern;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<std::pair<int, std::size_t>> by_count;
  for (std::size_t p : uniq) {
    int count = 0;
    for (std::size_t q : pattern)
      if (q == p) ++count;
    by_count.emplace_back(count, p);
  }
  std::sort(by_count.begin(), by_count.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  Eigen::MatrixXd seeds(k, c);
  for (int s = 0; s < k; ++s) {
    if (s < static_cast<int>(by_count.size())) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(c);
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (pattern[i] == by_count[s].second) {
          mean += rows.row(i);
          ++count;
        }
      seeds.row(s) = mean / count;
    } else {
      seeds.row(s) = rows.row(rng.uniform_int(0, n - 1));
    }
  }
  return seeds;
}

}  // namespace

RecoveredPartition spectral_cluster(const Eigen::MatrixXd& cov, int n_clusters,
                                    Rng& rng, int restarts) {
  if (cov.rows() != cov.cols())
    throw std::invalid_argument("spectral_cluster: matrix not square");
  const int d = static_cast<int>(cov.rows());
  if (n_clusters < 1 || n_clusters > d)
    throw std::invalid_argument("spectral_cluster: bad cluster count");
  if (d > 2000)
    throw std::invalid_argument("spectral_cluster: d > 2000 is outside the intended scale");
  if (restarts < 1) throw std::invalid_argument("spectral_cluster: restarts >= 1");

  const SymmetricEigen eig = symmetric_eigen(cov, 1e-10);
  Eigen::MatrixXd embedding = eig.vectors.leftCols(n_clusters);

  std::vector<int> best_labels(d, -1);
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Eigen::MatrixXd seeds(n_clusters, n_clusters);
    if (r == 0) {
      seeds = sign_pattern_seeds(embedding, n_clusters, rng);
    } else {
      for (int c = 0; c < n_clusters; ++c)
        seeds.row(c) = embedding.row(rng.uniform_int(0, d - 1));
    }
    std::vector<int> labels(d, -1);
    const double inertia = kmeans_run(embedding, seeds, &labels);
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }

  RecoveredPartition out;
  out.labels = relabel_contiguous(best_labels, &out.n_found);
  out.method = "spectral";
  out.eigenvalues = eig.values.head(n_clusters);
  return out;
}

double partition_error(const std::vector<int>& found,
                       const std::vector<int>& truth) {
  if (found.size() != truth.size() || found.empty())
    throw std::invalid_argument("partition_error: label vectors must match in size");
  int kf = 0, kt = 0;
  for (int v : found) {
    if (v < 0) throw std::invalid_argument("partition_error: negative label");
    kf = std::max(kf, v + 1);
  }
  for (int v : truth) {
    if (v < 0) throw std::invalid_argument("partition_error: negative label");
    kt = std::max(kt, v + 1);
  }
  const int k = std::max(kf, kt);  // pad the confusion matrix to square
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t j = 0; j < found.size(); ++j)
    confusion(found[j], truth[j]) += 1.0;

  double matched = 0.0;
  if (k <= 8) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double score = 0.0;
      for (int i = 0; i < k; ++i) score += confusion(i, perm[i]);
      matched = std::max(matched, score);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const std::vector<int> match = hungarian(-confusion);
    for (int i = 0; i < k; ++i) matched += confusion(i, match[i]);
  }
  return 1.0 - matched / static_cast<double>(found.size());
}

double bsc_edge_threshold(double delta) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("bsc_edge_threshold: delta outside [0, 1]");
  const double m = 1.0 - 2.0 * delta;
  return 0.5 * m * m;
}

std::int64_t bsc_sample_budget(int dim, double delta) {
  if (dim < 2) throw std::invalid_argument("bsc_sample_budget: dim too small");
  if (!(delta >= 0.0 && delta < 0.5))
    throw std::invalid_argument("bsc_sample_budget: need delta in [0, 0.5)");
  const double m = 1.0 - 2.0 * delta;
  return static_cast<std::int64_t>(std::ceil(16.0 * std::log(dim) / (m * m * m * m)));
}

}  // namespace clusterfeat
