#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "clusterfeat/boolean_analysis.hpp"
#include "clusterfeat/rng.hpp"

namespace clusterfeat {

// Per-coordinate magnitude law for xi_j.  Rademacher takes value +1 with
// probability 1 - flip_prob, -1 otherwise.
struct RademacherNoise {
  double flip_prob;
};
struct GaussianNoise {
  double mean;
  double variance;
};
struct TableNoise {
  std::vector<double> values;
  std::vector<double> probs;  // must sum to 1 within 1e-12
};
using NoiseLaw = std::variant<RademacherNoise, GaussianNoise, TableNoise>;

double noise_mean(const NoiseLaw& law);
double noise_variance(const NoiseLaw& law);
void validate_noise(const NoiseLaw& law);

class ClusterPartition {
 public:
  ClusterPartition(int n_clusters, std::vector<int> assignment);
  // Equal contiguous blocks; requires dim % n_clusters == 0.
  static ClusterPartition contiguous(int n_clusters, int dim);

  int n_clusters() const { return n_clusters_; }
  int dim() const { return static_cast<int>(assignment_.size()); }
  int cluster_of(int j) const { return assignment_[j]; }
  const std::vector<int>& assignment() const { return assignment_; }
  const std::vector<std::vector<int>>& members() const { return members_; }
  std::vector<int> sizes() const;

 private:
  int n_clusters_;
  std::vector<int> assignment_;
  std::vector<std::vector<int>> members_;
};

// x_j = s_{c(j)} * xi_j with s uniform on {-1,+1}^N and y = f(s).
struct DataModel {
  ClusterPartition partition;
  std::vector<NoiseLaw> noise;  // one law per coordinate
  BooleanFunction target;

  DataModel(ClusterPartition partition, std::vector<NoiseLaw> noise,
            BooleanFunction target);

  int dim() const { return partition.dim(); }
  int n_clusters() const { return partition.n_clusters(); }
};

// Homogeneous binary symmetric channel: every coordinate Rademacher(delta).
DataModel make_bsc_model(int n_clusters, int dim, double delta,
                         BooleanFunction target);

// Gaussian magnitudes, shared variance, per-coordinate means.
DataModel make_gaussian_mixture_model(int n_clusters, int dim,
                                      const Eigen::VectorXd& means,
                                      double variance, BooleanFunction target);
DataModel make_gaussian_mixture_model(int n_clusters, int dim, double mean,
                                      double variance, BooleanFunction target);

struct Sample {
  Eigen::VectorXd x;
  std::vector<int> s;  // latent signs, +-1
  double y;
};

// Struct-of-arrays batch; row b is one sample.
struct Batch {
  Eigen::MatrixXd x;
  Eigen::MatrixXi s;
  Eigen::VectorXd y;
  int size() const { return static_cast<int>(y.size()); }
};

Sample sample_one(const DataModel& model, Rng& rng);
Batch sample_batch(const DataModel& model, int batch, Rng& rng);

struct SignalStats {
  Eigen::VectorXd v;  // v_i = sum_{j in C_i} m_j^2
  double v_min;
  double v_sum;
  double mu;         // (1/d) sum_j tau_j^2
  double snr_ratio;  // v_sum / d
};
SignalStats signal_stats(const DataModel& model);

struct IdentifiabilityReport {
  double balance_ratio;  // v_min / v_sum (0 when v_sum = 0)
  double snr_ratio;      // v_sum / d
  bool pass_balance;
  bool pass_snr;
  bool pass;
};
IdentifiabilityReport check_identifiability(const DataModel& model, double c);

// E[x x^T]: m_i m_j within a cluster, m_j^2 + tau_j^2 on the diagonal,
// zero across clusters.
Eigen::MatrixXd population_covariance(const DataModel& model);

nlohmann::json model_to_json(const DataModel& model);
DataModel model_from_json(const nlohmann::json& j);

nlohmann::json target_to_json(const BooleanFunction& f);
BooleanFunction target_from_json(const nlohmann::json& j);

}  // namespace clusterfeat
