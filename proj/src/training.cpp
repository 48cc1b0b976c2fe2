#include "clusterfeat/training.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "clusterfeat/io.hpp"
#include "clusterfeat/theory.hpp"

namespace clusterfeat {

namespace {

constexpr double kDivergenceFactor = 1000.0;

bool sign_valued(const BooleanFunction& f) {
  for (double v : f.values())
    if (std::abs(std::abs(v) - 1.0) > 1e-12) return false;
  return true;
}

void apply_activation(Eigen::MatrixXd& z, const Activation& act) {
  for (int r = 0; r < z.rows(); ++r)
    for (int c = 0; c < z.cols(); ++c) z(r, c) = act.value(z(r, c));
}

}  // namespace

Eigen::MatrixXd hidden_features(const TwoLayerNet& net, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = x * net.w.transpose();
  z.rowwise() += net.b.transpose();
  apply_activation(z, net.act);
  return z;
}

GradientValue loss_gradients(const TwoLayerNet& net, const Batch& batch) {
  const int bsz = batch.size();
  Eigen::MatrixXd z = batch.x * net.w.transpose();
  z.rowwise() += net.b.transpose();
  Eigen::MatrixXd phi = z;
  apply_activation(phi, net.act);
  Eigen::MatrixXd dphi(z.rows(), z.cols());
  for (int r = 0; r < z.rows(); ++r)
    for (int c = 0; c < z.cols(); ++c) dphi(r, c) = net.act.derivative(z(r, c));

  Eigen::VectorXd resid = phi * net.a - batch.y;
  GradientValue g;
  g.loss = 0.5 * resid.squaredNorm() / bsz;
  g.a = phi.transpose() * resid / bsz;
  // m(b,h) = resid_b * a_h * sigma'(z_bh); the shared factor of dL/db and dL/dW
  Eigen::MatrixXd m = (resid * net.a.transpose()).cwiseProduct(dphi);
  g.b = m.colwise().sum().transpose() / bsz;
  g.w = m.transpose() * batch.x / bsz;
  return g;
}

TracePoint evaluate(const TwoLayerNet& net, const DataModel& model, int samples,
                    std::int64_t samples_used, Rng& eval_rng) {
  Batch batch = sample_batch(model, samples, eval_rng);
  Eigen::VectorXd pred = forward(net, batch.x);
  Eigen::VectorXd resid = pred - batch.y;
  TracePoint p;
  p.samples = samples_used;
  p.mse = resid.squaredNorm() / samples;
  p.abs_err = resid.cwiseAbs().mean();
  if (sign_valued(model.target)) {
    int hits = 0;
    for (int i = 0; i < samples; ++i)
      if ((pred[i] > 0 ? 1.0 : -1.0) == batch.y[i]) ++hits;
    p.accuracy = static_cast<double>(hits) / samples;
  } else {
    p.accuracy = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

void phase1_train(TwoLayerNet& net, const DataModel& model, int steps, int batch,
                  double lr, Rng& data_rng) {
  if (steps < 0 || batch < 1) throw std::invalid_argument("phase1_train: bad steps/batch");
  for (int t = 0; t < steps; ++t) {
    Batch b = sample_batch(model, batch, data_rng);
    GradientValue g = loss_gradients(net, b);
    if (!g.w.allFinite())
      throw std::runtime_error("phase1_train: non-finite first-layer gradient at step " +
                               std::to_string(t));
    net.w -= lr * g.w;
  }
}

TrainTrace phase2_train(TwoLayerNet& net, const DataModel& model,
                        const Phase2Settings& cfg, Rng& bias_rng, Rng& data_rng,
                        Rng& eval_rng) {
  if (cfg.steps < 0 || cfg.batch < 1 || !(cfg.bias_range >= 0.0))
    throw std::invalid_argument("phase2_train: bad settings");
  for (int h = 0; h < net.hidden(); ++h)
    net.b[h] = bias_rng.uniform(-cfg.bias_range, cfg.bias_range);

  TrainTrace trace;
  double lr = cfg.lr;
  if (lr <= 0.0) {
    // Stable step for the convex quadratic in a: 1 / (2 * mean ||phi(x)||^2).
    Batch probe = sample_batch(model, cfg.batch, data_rng);
    trace.samples_used += cfg.batch;
    const double scale = hidden_features(net, probe.x).rowwise().squaredNorm().mean();
    lr = 0.5 / std::max(scale, 1e-12);
  }

  Eigen::VectorXd a_sum = Eigen::VectorXd::Zero(net.hidden());
  double initial_loss = -1.0;
  for (int t = 0; t < cfg.steps; ++t) {
    if (cfg.eval.period_steps > 0 && t % cfg.eval.period_steps == 0)
      trace.points.push_back(
          evaluate(net, model, cfg.eval.samples, trace.samples_used, eval_rng));
    Batch b = sample_batch(model, cfg.batch, data_rng);
    trace.samples_used += cfg.batch;
    GradientValue g = loss_gradients(net, b);
    if (!g.a.allFinite())
      throw std::runtime_error("phase2_train: non-finite second-layer gradient at step " +
                               std::to_string(t));
    if (initial_loss < 0.0) initial_loss = g.loss;
    if (g.loss > kDivergenceFactor * std::max(initial_loss, 1e-12)) {
      trace.diverged = true;
      break;
    }
    net.a -= lr * g.a;
    a_sum += net.a;
  }
  if (cfg.average_iterates && cfg.steps > 0 && !trace.diverged)
    net.a = a_sum / cfg.steps;
  trace.points.push_back(
      evaluate(net, model, cfg.eval.samples, trace.samples_used, eval_rng));
  return trace;
}

LayerwiseConfig resolve_defaults(LayerwiseConfig cfg, const DataModel& model,
                                 const Activation& act) {
  (void)act;
  const SignalStats st = signal_stats(model);
  if (st.v_sum <= 0.0)
    throw std::invalid_argument("resolve_defaults: v_sum = 0, defaults undefined");
  const double d = model.dim();
  if (cfg.tau <= 0.0) cfg.tau = std::sqrt(st.v_sum) / (std::sqrt(d) * std::log(d));
  if (cfg.gamma1 <= 0.0) cfg.gamma1 = 1.0 / std::sqrt(st.v_sum);
  if (cfg.batch <= 0) {
    const double eps = 0.01;
    const double lg = std::log(d * std::log(1.0 / eps));
    cfg.batch = static_cast<int>(
        std::ceil(model.n_clusters() * lg * lg * d / st.v_sum));
  }
  return cfg;
}

namespace {

// Bias half-range from the projection grid of the realized first hidden row:
// A = max(2 * max_m |u_m|, grid gap), wide enough that every unit can place
// its kink anywhere on the grid.
double default_bias_range(const DataModel& model, const Activation& act,
                          const Eigen::VectorXd& w_row, double gamma, double tau) {
  const AlphaVector av = alpha_population(w_row, model, act);
  const SignalStats st = signal_stats(model);
  const ProjectionGrid grid = projection_grid(av.alpha, st.v, gamma, tau);
  double umax = 0.0;
  for (double u : grid.u) umax = std::max(umax, std::abs(u));
  const double gap = std::isfinite(grid.min_gap) ? grid.min_gap : 0.0;
  return std::max(std::max(2.0 * umax, gap), 1e-8);
}

}  // namespace

TrainResult layerwise_train(const DataModel& model, const Activation& act,
                            const LayerwiseConfig& cfg_in, Rng& rng) {
  LayerwiseConfig cfg = resolve_defaults(cfg_in, model, act);
  Rng init_rng = rng.split(0);
  Rng phase1_rng = rng.split(1);
  Rng bias_rng = rng.split(2);
  Rng phase2_rng = rng.split(3);
  Rng eval_rng = rng.split(4);

  TrainResult out{cfg.deterministic_init
                      ? init_deterministic(cfg.hidden, model.dim(), cfg.tau, act)
                      : init_layerwise(cfg.hidden, model.dim(), cfg.tau, act,
                                       init_rng),
                  {}};

  phase1_train(out.net, model, cfg.t1, cfg.batch, cfg.gamma1, phase1_rng);
  std::int64_t phase1_samples = static_cast<std::int64_t>(cfg.t1) * cfg.batch;

  if (cfg.bias_range <= 0.0)
    cfg.bias_range = default_bias_range(model, act, out.net.w.row(0).transpose(),
                                        cfg.gamma1, cfg.tau);

  Phase2Settings p2;
  p2.steps = cfg.t2;
  p2.batch = cfg.batch;
  p2.lr = cfg.gamma2;
  p2.bias_range = cfg.bias_range;
  p2.average_iterates = cfg.average_iterates;
  p2.eval = cfg.eval;
  out.trace = phase2_train(out.net, model, p2, bias_rng, phase2_rng, eval_rng);
  out.trace.samples_used += phase1_samples;
  for (auto& p : out.trace.points) p.samples += phase1_samples;
  return out;
}

TrainResult joint_sgd_train(const DataModel& model, const Activation& act,
                            const JointConfig& cfg, Rng& rng) {
  if (cfg.hidden < 1 || cfg.batch < 1 || !(cfg.lr > 0.0))
    throw std::invalid_argument("joint_sgd_train: bad config");
  Rng init_rng = rng.split(0);
  Rng data_rng = rng.split(1);
  Rng eval_rng = rng.split(2);

  const int d = model.dim();
  const double wb = 1.0 / std::sqrt(static_cast<double>(d));
  const double ab = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  Eigen::MatrixXd w0(cfg.hidden, d);
  for (int h = 0; h < cfg.hidden; ++h)
    for (int j = 0; j < d; ++j) w0(h, j) = init_rng.uniform(-wb, wb);
  Eigen::VectorXd a0(cfg.hidden), b0(cfg.hidden);
  for (int h = 0; h < cfg.hidden; ++h) a0[h] = init_rng.uniform(-ab, ab);
  for (int h = 0; h < cfg.hidden; ++h) b0[h] = init_rng.uniform(-wb, wb);
  TrainResult out{TwoLayerNet{std::move(w0), std::move(a0), std::move(b0), act},
                  TrainTrace{}};

  TrainTrace& trace = out.trace;
  double initial_loss = -1.0;
  for (int step = 0;; ++step) {
    if (cfg.eval.period_steps > 0 && step % cfg.eval.period_steps == 0) {
      trace.points.push_back(
          evaluate(out.net, model, cfg.eval.samples, trace.samples_used, eval_rng));
      if (cfg.stop_mse >= 0.0 && trace.points.back().mse < cfg.stop_mse) break;
    }
    if (trace.samples_used + cfg.batch > cfg.max_samples) break;
    Batch b = sample_batch(model, cfg.batch, data_rng);
    trace.samples_used += cfg.batch;
    GradientValue g = loss_gradients(out.net, b);
    if (!g.w.allFinite() || !g.a.allFinite() || !g.b.allFinite())
      throw std::runtime_error("joint_sgd_train: non-finite gradient at step " +
                               std::to_string(step));
    if (initial_loss < 0.0) initial_loss = g.loss;
    if (g.loss > kDivergenceFactor * std::max(initial_loss, 1e-12)) {
      trace.diverged = true;
      break;
    }
    out.net.w -= cfg.lr * g.w;
    out.net.a -= cfg.lr * g.a;
    out.net.b -= cfg.lr * g.b;
  }
  return out;
}

namespace {

ThresholdResult threshold_from_trace(TrainResult&& res, double threshold) {
  ThresholdResult out;
  out.trace = std::move(res.trace);
  out.reached = false;
  out.samples = -1;
  for (const auto& p : out.trace.points) {
    if (p.mse < threshold) {
      out.reached = true;
      out.samples = p.samples;
      break;
    }
  }
  out.censored = !out.reached;
  return out;
}

}  // namespace

ThresholdResult samples_to_threshold(const DataModel& model, const Activation& act,
                                     JointConfig cfg, double threshold, Rng& rng) {
  cfg.stop_mse = threshold;
  return threshold_from_trace(joint_sgd_train(model, act, cfg, rng), threshold);
}

ThresholdResult samples_to_threshold(const DataModel& model, const Activation& act,
                                     const LayerwiseConfig& cfg, double threshold,
                                     Rng& rng) {
  return threshold_from_trace(layerwise_train(model, act, cfg, rng), threshold);
}

std::string trace_to_csv(const TrainTrace& trace) {
  CsvWriter csv({"samples", "mse", "abs_err", "accuracy"});
  for (const auto& p : trace.points)
    csv.row({std::to_string(p.samples), format_double(p.mse),
             format_double(p.abs_err), format_double(p.accuracy)});
  return csv.str();
}

nlohmann::json trace_to_json(const TrainTrace& trace, std::uint64_t seed,
                             const std::string& config_hash) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : trace.points)
    points.push_back({{"samples", p.samples},
                      {"mse", p.mse},
                      {"abs_err", p.abs_err},
                      {"accuracy", p.accuracy}});
  return {{"seed", seed},
          {"config_hash", config_hash},
          {"samples_used", trace.samples_used},
          {"diverged", trace.diverged},
          {"points", points}};
}

}  // namespace clusterfeat
