#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "clusterfeat/latent_data.hpp"
#include "clusterfeat/network.hpp"

namespace clusterfeat {

struct TracePoint {
  std::int64_t samples;  // training samples consumed when this eval ran
  double mse;            // mean (y - NN)^2 on fresh held-out draws
  double abs_err;        // mean |y - NN|
  double accuracy;       // sign agreement; NaN when the target is not +-1 valued
};

struct TrainTrace {
  std::vector<TracePoint> points;
  std::int64_t samples_used = 0;
  bool diverged = false;
};

struct EvalSettings {
  int period_steps = 50;
  int samples = 10000;
};

// Gradients of the batch objective L = mean over the batch of (y - NN)^2 / 2.
struct GradientValue {
  double loss;
  Eigen::MatrixXd w;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};
GradientValue loss_gradients(const TwoLayerNet& net, const Batch& batch);

// sigma(w x + b) for each sample row; the phase-2 design matrix.
Eigen::MatrixXd hidden_features(const TwoLayerNet& net, const Eigen::MatrixXd& x);

struct TracePoint evaluate(const TwoLayerNet& net, const DataModel& model,
                           int samples, std::int64_t samples_used, Rng& eval_rng);

// Full-gradient steps on the first layer only (a and b frozen).  Throws on a
// non-finite gradient.
void phase1_train(TwoLayerNet& net, const DataModel& model, int steps, int batch,
                  double lr, Rng& data_rng);

struct Phase2Settings {
  int steps = 2000;
  int batch = 64;
  double lr = -1.0;         // <= 0: 1 / (2 * mean ||phi||^2) on the first batch
  double bias_range = 0.0;  // biases ~ U[-A, A], drawn once then frozen
  bool average_iterates = false;
  EvalSettings eval;
};

// Redraws b, then runs SGD on the second layer only (a); convex in a.
// Divergence (loss > 1000x initial) stops early and flags the trace.
TrainTrace phase2_train(TwoLayerNet& net, const DataModel& model,
                        const Phase2Settings& cfg, Rng& bias_rng, Rng& data_rng,
                        Rng& eval_rng);

struct LayerwiseConfig {
  int hidden = 64;
  double tau = -1.0;     // <= 0: sqrt(v_sum) / (sqrt(d) * log d)
  double gamma1 = -1.0;  // <= 0: 1 / sqrt(v_sum)
  double gamma2 = -1.0;  // <= 0: adaptive (see Phase2Settings::lr)
  double bias_range = -1.0;  // <= 0: max(2*max_m|u_m|, grid gap) from the
                             // projection grid of the first hidden row
  int t1 = 1;
  int t2 = 2000;
  int batch = -1;  // <= 0: ceil(N * log(d * log(1/eps))^2 * d / v_sum), eps = .01
  bool average_iterates = false;
  bool deterministic_init = false;
  EvalSettings eval;
};

// Resolves every defaulted (<= 0) field against the model.
LayerwiseConfig resolve_defaults(LayerwiseConfig cfg, const DataModel& model,
                                 const Activation& act);

struct TrainResult {
  TwoLayerNet net;
  TrainTrace trace;
};

TrainResult layerwise_train(const DataModel& model, const Activation& act,
                            const LayerwiseConfig& cfg, Rng& rng);

struct JointConfig {
  int hidden = 256;
  double lr = 1e-3;
  int batch = 64;
  std::int64_t max_samples = 10000000;
  double stop_mse = -1.0;  // < 0: run to max_samples
  EvalSettings eval;
};

// Plain SGD on all parameters, fresh batch every step, uniform init
// (W, b ~ U[+-1/sqrt(d)], a ~ U[+-1/sqrt(n)]).
TrainResult joint_sgd_train(const DataModel& model, const Activation& act,
                            const JointConfig& cfg, Rng& rng);

struct ThresholdResult {
  bool reached;
  std::int64_t samples;  // first eval point at or below the threshold
  bool censored;         // hit max_samples first
  TrainTrace trace;
};

ThresholdResult samples_to_threshold(const DataModel& model, const Activation& act,
                                     JointConfig cfg, double threshold, Rng& rng);
ThresholdResult samples_to_threshold(const DataModel& model, const Activation& act,
                                     const LayerwiseConfig& cfg, double threshold,
                                     Rng& rng);

// Trace serialization: CSV (samples,mse,abs_err,accuracy) and a JSON document
// carrying the seed and config hash next to the points.
std::string trace_to_csv(const TrainTrace& trace);
nlohmann::json trace_to_json(const TrainTrace& trace, std::uint64_t seed,
                             const std::string& config_hash);

}  // namespace clusterfeat
