#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "clusterfeat/latent_data.hpp"
#include "clusterfeat/network.hpp"
#include "clusterfeat/rng.hpp"
#include "clusterfeat/training.hpp"

namespace clusterfeat {

// Model template shared by the sweep/baseline/certify configs.  The swept
// axis overrides dim or delta per cell.
DataModel model_from_template(const nlohmann::json& tmpl,
                              std::optional<int> dim_override = {},
                              std::optional<double> delta_override = {});

Activation activation_from_config(const nlohmann::json& j);

struct ExperimentRecord {
  std::string config_hash;
  std::uint64_t seed;
  std::string axis;
  double value;
  std::int64_t samples;  // -1 when not reached
  bool censored;
  bool failed;
  std::string error;
  double final_mse;
  double final_abs_err;
  double final_accuracy;
  double wall_time_s;  // written to timings.csv only, so results stay
                       // byte-identical across reruns
};

struct AggregateRow {
  std::string axis;
  double value;
  int n_seeds;
  int n_reached;
  int n_censored;
  int n_failed;
  double mean_samples;  // over reached cells; NaN if none
  double ci95;          // 1.96 * sd / sqrt(n_reached)
};

struct SweepResult {
  std::string hash;
  nlohmann::json config;
  std::vector<ExperimentRecord> records;
  std::vector<AggregateRow> aggregate;
};

SweepResult run_sweep(const nlohmann::json& config, int jobs);
// Writes config.json, results.csv, results.json, aggregate.csv, timings.csv
// into out/<hash>/ and returns that directory.
std::filesystem::path write_sweep(const SweepResult& result,
                                  const std::filesystem::path& out);

struct BaselineRecord {
  std::string config_hash;
  std::uint64_t seed;
  std::string method;
  std::int64_t budget;
  double error;  // partition_error vs truth
  bool failed;
  std::string message;
  double wall_time_s;
};

struct BaselineAggregate {
  std::string method;
  std::int64_t budget;
  int n_seeds;
  double mean_error;
  double ci95;
};

struct BaselineResult {
  std::string hash;
  nlohmann::json config;
  std::vector<BaselineRecord> records;
  std::vector<BaselineAggregate> aggregate;
};

BaselineResult run_baseline_compare(const nlohmann::json& config, int jobs);
std::filesystem::path write_baselines(const BaselineResult& result,
                                      const std::filesystem::path& out);

struct CertifyRecord {
  int trial;
  bool consistent;  // projection consistency of the drawn grid
  bool built;       // certificate construction succeeded
  double condition;  // kept-spectrum ratio of the smoothed normal system
  double residual;   // worst grid-node |NN - f| of the noise-optimal fit
  double norm2;      // second-layer weight norm
  int levels;        // grid levels after noise-scale merging
  double min_gap;    // over merged levels
  double pop_abs_error;  // MC estimate of E|y - NN|; +inf when not built
  std::string error;
};

struct CertifyResult {
  std::string hash;
  nlohmann::json config;
  std::vector<CertifyRecord> records;
  int n_inconsistent;
  int n_failed;
  double median_pop_error;  // over all trials, failures count as +inf
  double mean_pop_error;    // over built trials
};

CertifyResult run_certify(const nlohmann::json& config, int jobs);
std::filesystem::path write_certify(const CertifyResult& result,
                                    const std::filesystem::path& out);

struct TabularDataset {
  Eigen::MatrixXd features;  // rows x selected
  std::vector<int> labels;   // contiguous from 0
  std::vector<std::string> feature_names;  // selected, in rank order
  std::vector<int> selected_columns;       // original column indices
  std::vector<std::string> class_names;    // sorted label strings
  std::vector<int> train_rows;
  std::vector<int> test_rows;
  int skipped_rows;
  bool dim_clamped;
};

// Label-blind top-d dispersion selection plus a stratified split.
TabularDataset ingest(const std::filesystem::path& csv, int d,
                      double test_fraction, std::uint64_t seed);

Eigen::MatrixXd feature_correlation(const TabularDataset& ds);

// Synthetic CSV with the model's x as feature columns and y as the label
// column; makes the ingest path testable offline with known ground truth.
void generate_csv(const DataModel& model, int rows, std::uint64_t seed,
                  const std::filesystem::path& path);

struct DatasetTrainerConfig {
  int hidden = 64;
  double lr = 0.01;
  int batch = 32;
  int steps = 2000;
};

// One-vs-rest two-layer nets, square loss, minibatches drawn with replacement
// from the given training rows; returns test-split accuracy.
double train_on_dataset(const TabularDataset& ds,
                        const std::vector<int>& train_rows,
                        const DatasetTrainerConfig& cfg, Rng& rng);

struct AccuracyRecord {
  std::string config_hash;
  std::uint64_t seed;
  int d;
  int n;
  double accuracy;
  bool failed;
  std::string error;
};

struct AccuracyAggregate {
  int d;
  int n;
  int n_seeds;
  double mean_accuracy;
  double sd;  // plain +-1 standard deviation
};

struct AccuracyResult {
  std::string hash;
  nlohmann::json config;
  std::vector<AccuracyRecord> records;
  std::vector<AccuracyAggregate> aggregate;
};

AccuracyResult run_accuracy_vs_n(const nlohmann::json& config, int jobs);
std::filesystem::path write_accuracy(const AccuracyResult& result,
                                     const std::filesystem::path& out);

// Fast invariant suite behind the `selfcheck` subcommand; prints one line per
// check, returns the number of failures.
int selfcheck(std::uint64_t seed);

}  // namespace clusterfeat
