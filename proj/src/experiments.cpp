#include "clusterfeat/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "clusterfeat/baselines.hpp"
#include "clusterfeat/io.hpp"
#include "clusterfeat/linalg.hpp"
#include "clusterfeat/theory.hpp"

namespace clusterfeat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void parallel_cells(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct MeanCi {
  double mean;
  double ci95;
};

MeanCi mean_ci(const std::vector<double>& xs) {
  if (xs.empty()) return {kNaN, kNaN};
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (xs.size() - 1));
  return {mean, 1.96 * sd / std::sqrt(static_cast<double>(xs.size()))};
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  return xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

std::vector<std::uint64_t> seeds_from_config(const nlohmann::json& config) {
  auto seeds = config.at("seeds").get<std::vector<std::uint64_t>>();
  if (seeds.empty()) throw std::invalid_argument("config: empty seeds list");
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (std::size_t j = i + 1; j < seeds.size(); ++j)
      if (seeds[i] == seeds[j])
        throw std::invalid_argument("config: duplicate seed " +
                                    std::to_string(seeds[i]));
  return seeds;
}

std::filesystem::path run_dir(const std::filesystem::path& out,
                              const std::string& hash) {
  auto dir = out / hash;
  std::filesystem::create_directories(dir);
  return dir;
}

double poly_eval(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// Coefficients of x -> p(x + b).
std::vector<double> poly_shift(const std::vector<double>& p, double b) {
  const int deg = static_cast<int>(p.size()) - 1;
  std::vector<double> out(p.size(), 0.0);
  for (int j = 0; j <= deg; ++j) {
    double term = p[j];  // p_j * C(j,k) * b^{j-k}, walked down from k = j
    out[j] += term;
    for (int k = j - 1; k >= 0; --k) {
      term *= b * (k + 1) / static_cast<double>(j - k);
      out[k] += term;
    }
  }
  return out;
}

std::vector<double> poly_product(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace

DataModel model_from_template(const nlohmann::json& tmpl,
                              std::optional<int> dim_override,
                              std::optional<double> delta_override) {
  reject_unknown_keys(
      tmpl, {"family", "n_clusters", "dim", "delta", "target", "mean", "variance"},
      "model template");
  const std::string family = tmpl.at("family").get<std::string>();
  const int n = tmpl.at("n_clusters").get<int>();
  const int d = dim_override.value_or(tmpl.at("dim").get<int>());
  const double delta =
      delta_override.value_or(tmpl.value("delta", 0.0));
  nlohmann::json target_json = tmpl.at("target");
  target_json["n"] = n;
  BooleanFunction target = target_from_json(target_json);
  if (family == "bsc") return make_bsc_model(n, d, delta, std::move(target));
  if (family == "gaussian_mixture") {
    // Defaults moment-match the homogeneous channel at the same delta.
    const double mean = tmpl.value("mean", 1.0 - 2.0 * delta);
    const double variance = tmpl.value("variance", 4.0 * delta * (1.0 - delta));
    return make_gaussian_mixture_model(n, d, mean, variance, std::move(target));
  }
  throw std::invalid_argument("model template: unknown family '" + family + "'");
}

Activation activation_from_config(const nlohmann::json& j) {
  reject_unknown_keys(j, {"kind", "coeffs", "degree"}, "activation");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "truncated_exp")
    return Activation::truncated_exp(j.value("degree", 8));
  return activation_from_json(j);
}

// ---------------------------------------------------------------------------
// run_sweep

SweepResult run_sweep(const nlohmann::json& config, int jobs) {
  reject_unknown_keys(config,
                      {"model", "axis", "trainer", "activation", "threshold",
                       "seeds", "max_samples", "eval_period", "eval_samples"},
                      "sweep config");
  const nlohmann::json& axis = config.at("axis");
  reject_unknown_keys(axis, {"name", "values"}, "axis");
  const std::string axis_name = axis.at("name").get<std::string>();
  if (axis_name != "dim" && axis_name != "delta")
    throw std::invalid_argument("axis.name must be 'dim' or 'delta'");
  const auto values = axis.at("values").get<std::vector<double>>();
  if (values.empty()) throw std::invalid_argument("axis.values must be nonempty");
  const auto seeds = seeds_from_config(config);
  const double threshold = config.value("threshold", 0.05);
  const std::int64_t max_samples = config.value("max_samples", std::int64_t{10000000});
  EvalSettings eval;
  eval.period_steps = config.value("eval_period", 50);
  eval.samples = config.value("eval_samples", 10000);

  const nlohmann::json& trainer = config.at("trainer");
  const std::string trainer_kind = trainer.at("kind").get<std::string>();
  const Activation act = activation_from_config(
      config.value("activation", nlohmann::json{{"kind", "relu"}}));

  JointConfig joint;
  LayerwiseConfig layerwise;
  if (trainer_kind == "joint") {
    reject_unknown_keys(trainer, {"kind", "hidden", "lr", "batch"}, "trainer");
    joint.hidden = trainer.value("hidden", 256);
    joint.lr = trainer.value("lr", 1e-3);
    joint.batch = trainer.value("batch", 64);
    joint.max_samples = max_samples;
    joint.eval = eval;
  } else if (trainer_kind == "layerwise") {
    reject_unknown_keys(trainer,
                        {"kind", "hidden", "tau", "gamma1", "gamma2", "bias_range",
                         "t1", "t2", "batch", "average_iterates",
                         "deterministic_init"},
                        "trainer");
    layerwise.hidden = trainer.value("hidden", 64);
    layerwise.tau = trainer.value("tau", -1.0);
    layerwise.gamma1 = trainer.value("gamma1", -1.0);
    layerwise.gamma2 = trainer.value("gamma2", -1.0);
    layerwise.bias_range = trainer.value("bias_range", -1.0);
    layerwise.t1 = trainer.value("t1", 1);
    layerwise.t2 = trainer.value("t2", 2000);
    layerwise.batch = trainer.value("batch", -1);
    layerwise.average_iterates = trainer.value("average_iterates", false);
    layerwise.deterministic_init = trainer.value("deterministic_init", false);
    layerwise.eval = eval;
  } else {
    throw std::invalid_argument("trainer.kind must be 'joint' or 'layerwise'");
  }
  // Validate the template once up front so config errors surface before any
  // cell runs.
  (void)model_from_template(config.at("model"));

  SweepResult out;
  out.config = config;
  out.hash = config_hash(config);
  const int n_cells = static_cast<int>(values.size() * seeds.size());
  out.records.resize(n_cells);

  parallel_cells(n_cells, jobs, [&](int cell) {
    const int vi = cell / static_cast<int>(seeds.size());
    const int si = cell % static_cast<int>(seeds.size());
    ExperimentRecord& rec = out.records[cell];
    rec.config_hash = out.hash;
    rec.seed = seeds[si];
    rec.axis = axis_name;
    rec.value = values[vi];
    rec.samples = -1;
    rec.censored = false;
    rec.failed = false;
    rec.final_mse = rec.final_abs_err = rec.final_accuracy = kNaN;
    const auto start = std::chrono::steady_clock::now();
    try {
      DataModel model =
          axis_name == "dim"
              ? model_from_template(config.at("model"),
                                    static_cast<int>(values[vi]), {})
              : model_from_template(config.at("model"), {}, values[vi]);
      Rng rng(seeds[si]);
      Rng cell_rng = rng.split(static_cast<std::uint64_t>(vi));
      ThresholdResult res =
          trainer_kind == "joint"
              ? samples_to_threshold(model, act, joint, threshold, cell_rng)
              : samples_to_threshold(model, act, layerwise, threshold, cell_rng);
      rec.samples = res.samples;
      rec.censored = res.censored;
      if (!res.trace.points.empty()) {
        const TracePoint& last = res.trace.points.back();
        rec.final_mse = last.mse;
        rec.final_abs_err = last.abs_err;
        rec.final_accuracy = last.accuracy;
      }
      if (res.trace.diverged) {
        rec.failed = true;
        rec.error = "diverged";
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    rec.wall_time_s = elapsed_s(start);
  });

  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    AggregateRow row;
    row.axis = axis_name;
    row.value = values[vi];
    row.n_seeds = static_cast<int>(seeds.size());
    row.n_reached = row.n_censored = row.n_failed = 0;
    std::vector<double> reached;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const ExperimentRecord& rec = out.records[vi * seeds.size() + si];
      if (rec.failed)
        ++row.n_failed;
      else if (rec.censored)
        ++row.n_censored;
      else {
        ++row.n_reached;
        reached.push_back(static_cast<double>(rec.samples));
      }
    }
    const MeanCi mc = mean_ci(reached);
    row.mean_samples = mc.mean;
    row.ci95 = mc.ci95;
    out.aggregate.push_back(row);
  }
  return out;
}

std::filesystem::path write_sweep(const SweepResult& result,
                                  const std::filesystem::path& out) {
  const auto dir = run_dir(out, result.hash);
  write_text(dir / "config.json", result.config.dump(2) + "\n");

  CsvWriter results({"config_hash", "seed", "axis", "value", "samples", "censored",
                     "failed", "error", "final_mse", "final_abs_err",
                     "final_accuracy"});
  CsvWriter timings({"config_hash", "seed", "axis", "value", "wall_time_s"});
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : result.records) {
    results.row({r.config_hash, std::to_string(r.seed), r.axis,
                 format_double(r.value), std::to_string(r.samples),
                 r.censored ? "1" : "0", r.failed ? "1" : "0", csv_safe(r.error),
                 format_double(r.final_mse), format_double(r.final_abs_err),
                 format_double(r.final_accuracy)});
    timings.row({r.config_hash, std::to_string(r.seed), r.axis,
                 format_double(r.value), format_double(r.wall_time_s)});
    records.push_back({{"config_hash", r.config_hash},
                       {"seed", r.seed},
                       {"axis", r.axis},
                       {"value", r.value},
                       {"samples", r.samples},
                       {"censored", r.censored},
                       {"failed", r.failed},
                       {"error", r.error},
                       {"final_mse", r.final_mse},
                       {"final_abs_err", r.final_abs_err},
                       {"final_accuracy", r.final_accuracy}});
  }
  results.write(dir / "results.csv");
  timings.write(dir / "timings.csv");
  write_text(dir / "results.json",
             nlohmann::json{{"config_hash", result.hash}, {"records", records}}
                     .dump(2) +
                 "\n");

  CsvWriter agg({"axis", "value", "n_seeds", "n_reached", "n_censored", "n_failed",
                 "mean_samples", "ci95"});
  for (const auto& a : result.aggregate)
    agg.row({a.axis, format_double(a.value), std::to_string(a.n_seeds),
             std::to_string(a.n_reached), std::to_string(a.n_censored),
             std::to_string(a.n_failed), format_double(a.mean_samples),
             format_double(a.ci95)});
  agg.write(dir / "aggregate.csv");
  return dir;
}

// ---------------------------------------------------------------------------
// run_baseline_compare

BaselineResult run_baseline_compare(const nlohmann::json& config, int jobs) {
  reject_unknown_keys(
      config, {"model", "budgets", "methods", "seeds", "threshold", "restarts"},
      "baselines config");
  const nlohmann::json& tmpl = config.at("model");
  if (tmpl.at("family").get<std::string>() != "bsc")
    throw std::invalid_argument("baselines: BSC-family model required");
  const DataModel probe = model_from_template(tmpl);
  const double delta = tmpl.value("delta", 0.0);

  std::vector<std::int64_t> budgets;
  if (config.contains("budgets"))
    budgets = config.at("budgets").get<std::vector<std::int64_t>>();
  else
    budgets = {bsc_sample_budget(probe.dim(), delta)};
  if (budgets.empty()) throw std::invalid_argument("baselines: empty budgets");

  std::vector<std::string> methods =
      config.value("methods", std::vector<std::string>{"threshold", "spectral"});
  for (const auto& m : methods)
    if (m != "threshold" && m != "spectral")
      throw std::invalid_argument("baselines: unknown method '" + m + "'");
  const auto seeds = seeds_from_config(config);
  const double edge_threshold = config.contains("threshold")
                                    ? config.at("threshold").get<double>()
                                    : bsc_edge_threshold(delta);
  const int restarts = config.value("restarts", 50);

  BaselineResult out;
  out.config = config;
  out.hash = config_hash(config);
  const int n_cells =
      static_cast<int>(methods.size() * budgets.size() * seeds.size());
  out.records.resize(n_cells);

  parallel_cells(n_cells, jobs, [&](int cell) {
    const int per_method = static_cast<int>(budgets.size() * seeds.size());
    const int mi = cell / per_method;
    const int bi = (cell % per_method) / static_cast<int>(seeds.size());
    const int si = cell % static_cast<int>(seeds.size());
    BaselineRecord& rec = out.records[cell];
    rec.config_hash = out.hash;
    rec.seed = seeds[si];
    rec.method = methods[mi];
    rec.budget = budgets[bi];
    rec.error = kNaN;
    rec.failed = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      DataModel model = model_from_template(tmpl);
      Rng rng(seeds[si]);
      Rng cell_rng = rng.split(static_cast<std::uint64_t>(bi));
      Batch batch = sample_batch(model, static_cast<int>(budgets[bi]), cell_rng);
      const Eigen::MatrixXd cov = empirical_covariance(batch.x);
      RecoveredPartition found =
          methods[mi] == "threshold"
              ? covariance_threshold_cluster(cov, edge_threshold)
              : spectral_cluster(cov, model.n_clusters(), cell_rng, restarts);
      rec.error = partition_error(found.labels, model.partition.assignment());
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.message = e.what();
    }
    rec.wall_time_s = elapsed_s(start);
  });

  for (std::size_t mi = 0; mi < methods.size(); ++mi)
    for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
      std::vector<double> errs;
      for (std::size_t si = 0; si < seeds.size(); ++si) {
        const auto& rec =
            out.records[(mi * budgets.size() + bi) * seeds.size() + si];
        if (!rec.failed) errs.push_back(rec.error);
      }
      const MeanCi mc = mean_ci(errs);
      out.aggregate.push_back({methods[mi], budgets[bi],
                               static_cast<int>(errs.size()), mc.mean, mc.ci95});
    }
  return out;
}

std::filesystem::path write_baselines(const BaselineResult& result,
                                      const std::filesystem::path& out) {
  const auto dir = run_dir(out, result.hash);
  write_text(dir / "config.json", result.config.dump(2) + "\n");
  CsvWriter results(
      {"config_hash", "seed", "method", "budget", "error", "failed", "message"});
  CsvWriter timings({"config_hash", "seed", "method", "budget", "wall_time_s"});
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : result.records) {
    results.row({r.config_hash, std::to_string(r.seed), r.method,
                 std::to_string(r.budget), format_double(r.error),
                 r.failed ? "1" : "0", csv_safe(r.message)});
    timings.row({r.config_hash, std::to_string(r.seed), r.method,
                 std::to_string(r.budget), format_double(r.wall_time_s)});
    records.push_back({{"config_hash", r.config_hash},
                       {"seed", r.seed},
                       {"method", r.method},
                       {"budget", r.budget},
                       {"error", r.error},
                       {"failed", r.failed},
                       {"message", r.message}});
  }
  results.write(dir / "results.csv");
  timings.write(dir / "timings.csv");
  write_text(dir / "results.json",
             nlohmann::json{{"config_hash", result.hash}, {"records", records}}
                     .dump(2) +
                 "\n");
  CsvWriter agg({"method", "budget", "n_seeds", "mean_error", "ci95"});
  for (const auto& a : result.aggregate)
    agg.row({a.method, std::to_string(a.budget), std::to_string(a.n_seeds),
             format_double(a.mean_error), format_double(a.ci95)});
  agg.write(dir / "aggregate.csv");
  return dir;
}

// ---------------------------------------------------------------------------
// run_certify

CertifyResult run_certify(const nlohmann::json& config, int jobs) {
  reject_unknown_keys(config,
                      {"model", "trials", "hidden", "activation", "gamma", "tau",
                       "bias_range", "mc_samples", "c0", "seed"},
                      "certify config");
  const DataModel probe = model_from_template(config.at("model"));
  const Activation act = activation_from_config(config.value(
      "activation", nlohmann::json{{"kind", "truncated_exp"}, {"degree", 8}}));
  const SignalStats stats = signal_stats(probe);
  const double c0 = config.value("c0", 0.01);
  const ActivationCheck check = check_activation_assumption(
      act, stats.mu, stats.v_sum, probe.dim(), probe.n_clusters(), c0);
  if (!check.pass)
    throw std::invalid_argument(
        "certify: activation fails the smoothed-derivative lower bound (min " +
        format_double(check.min_abs) + " < c0 " + format_double(c0) + ")");

  const int trials = config.value("trials", 50);
  const int hidden = config.value("hidden", 64);
  const int mc_samples = config.value("mc_samples", 100000);
  const std::uint64_t seed = config.value("seed", std::uint64_t{0});
  double gamma = config.value("gamma", -1.0);
  double tau = config.value("tau", -1.0);
  if (gamma <= 0.0) gamma = 1.0 / std::sqrt(stats.v_sum);
  if (tau <= 0.0)
    tau = std::sqrt(stats.v_sum) / (std::sqrt(probe.dim()) * std::log(probe.dim()));
  const double bias_range_cfg = config.value("bias_range", -1.0);

  CertifyResult out;
  out.config = config;
  out.hash = config_hash(config);
  out.records.resize(trials);

  parallel_cells(trials, jobs, [&](int trial) {
    CertifyRecord& rec = out.records[trial];
    rec.trial = trial;
    rec.consistent = false;
    rec.built = false;
    rec.condition = rec.residual = rec.norm2 = kNaN;
    rec.levels = 0;
    rec.min_gap = kNaN;
    rec.pop_abs_error = kInf;
    try {
      DataModel model = model_from_template(config.at("model"));
      const int d = model.dim();
      Rng base(seed);
      Rng trial_rng = base.split(static_cast<std::uint64_t>(trial));
      Rng init_rng = trial_rng.split(0);
      Rng bias_rng = trial_rng.split(1);
      Rng mc_rng = trial_rng.split(2);

      Eigen::VectorXd w0(d);
      const double sd = 1.0 / std::sqrt(static_cast<double>(d));
      for (int j = 0; j < d; ++j) w0[j] = sd * init_rng.normal();

      const AlphaVector av = alpha_population(w0, model, act);

      // A fresh sample projects to gamma*tau*sum_i alpha_i s_i (v_i + W_i)
      // with W_i the within-cluster noise fluctuation; its variance sets the
      // resolution the deployed network can actually see.
      double proj_var = 0.0;
      for (int j = 0; j < d; ++j) {
        const double mj = noise_mean(model.noise[j]);
        const double scale =
            gamma * tau * av.alpha[model.partition.cluster_of(j)];
        proj_var += scale * scale * mj * mj * noise_variance(model.noise[j]);
      }

      ProjectionGrid grid = projection_grid(av.alpha, stats.v, gamma, tau);
      if (grid.levels() > 1) {
        // Levels closer than a couple of noise standard deviations are not
        // resolvable and only poison the conditioning of the fit.  Merge
        // them; whether the target stays well defined on the merged cells
        // is checked below like any other draw.
        const double span = grid.u.back() - grid.u.front();
        const double merge_tol =
            std::max(2.5 * std::sqrt(proj_var), 0.02 * span);
        grid = projection_grid(av.alpha, stats.v, gamma, tau, merge_tol);
        // Re-center each merged level on the mean of its members so the
        // noise model below is not systematically offset.
        std::vector<double> sum(grid.u.size(), 0.0);
        std::vector<int> count(grid.u.size(), 0);
        for (std::size_t idx = 0; idx < grid.level_of.size(); ++idx) {
          double raw = 0.0;
          for (int i = 0; i < model.n_clusters(); ++i)
            raw += ((idx >> i) & 1 ? -1.0 : 1.0) * grid.alpha_tilde[i];
          sum[grid.level_of[idx]] += raw;
          ++count[grid.level_of[idx]];
        }
        for (std::size_t r = 0; r < grid.u.size(); ++r)
          grid.u[r] = sum[r] / count[r];
      }
      rec.levels = grid.levels();
      rec.min_gap = grid.min_gap;
      rec.consistent = projection_consistent(model.target, grid);
      if (!rec.consistent) {
        rec.error = "projection-inconsistent draw";
        return;
      }

      // The grid span scales like gamma*tau*|alpha|*v while the activation
      // has a fixed unit scale, so feed the network the scale-matched
      // projection u/u_scale instead.  Everything the fit sees (levels,
      // noise, biases) lives in these normalized coordinates; the replay
      // applies the same factor to the first-layer row.  Without this the
      // feature family degenerates numerically whenever a draw lands on a
      // small |alpha|.
      double u_scale = 0.0;
      for (double u : grid.u) u_scale = std::max(u_scale, std::abs(u));
      if (!(u_scale > 0.0)) {
        rec.error = "degenerate draw: zero projection grid";
        return;
      }
      std::vector<double> t(grid.u.size());
      for (std::size_t r = 0; r < grid.u.size(); ++r) t[r] = grid.u[r] / u_scale;
      const double noise_var_t = proj_var / (u_scale * u_scale);

      const double bias_range = bias_range_cfg > 0.0 ? bias_range_cfg : 1.0;
      Eigen::VectorXd biases(hidden);
      for (int h = 0; h < hidden; ++h)
        biases[h] = bias_rng.uniform(-bias_range, bias_range);

      // Second layer minimizing the expected squared error of the deployed
      // network over fresh samples.  Under the projection noise this is a
      // least-squares fit through Gaussian-smoothed features; it stays
      // meaningful where exact interpolation would chase grid detail far
      // below the noise floor, and it collapses to interpolation as the
      // noise vanishes.
      const int m_levels = grid.levels();
      std::vector<double> level_mass(m_levels, 0.0), level_f(m_levels, 0.0);
      for (std::size_t idx = 0; idx < grid.level_of.size(); ++idx) {
        level_mass[grid.level_of[idx]] += 1.0 / grid.level_of.size();
        level_f[grid.level_of[idx]] = model.target[idx];
      }
      std::vector<std::vector<double>> shifted(hidden), smoothed(hidden);
      for (int h = 0; h < hidden; ++h) {
        shifted[h] = poly_shift(act.coeffs(), biases[h]);
        smoothed[h] = gaussian_smooth_poly(shifted[h], noise_var_t);
      }
      Eigen::MatrixXd gram(hidden, hidden);
      for (int h = 0; h < hidden; ++h)
        for (int g = h; g < hidden; ++g) {
          const std::vector<double> second_moment = gaussian_smooth_poly(
              poly_product(shifted[h], shifted[g]), noise_var_t);
          double acc = 0.0;
          for (int r = 0; r < m_levels; ++r)
            acc += level_mass[r] * poly_eval(second_moment, t[r]);
          gram(h, g) = gram(g, h) = acc;
        }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(hidden);
      for (int h = 0; h < hidden; ++h)
        for (int r = 0; r < m_levels; ++r)
          rhs[h] += level_mass[r] * level_f[r] * poly_eval(smoothed[h], t[r]);
      // Truncated pseudo-inverse: directions below the relative precision
      // floor carry no usable signal, everything above it is kept.  The
      // oscillatory combinations a parity target needs live in legitimately
      // small eigenvalues, so a fixed additive ridge would wipe them out.
      const SymmetricEigen eig = symmetric_eigen(gram);
      const double lambda_max = eig.values.maxCoeff();
      const double cutoff = 1e-14 * lambda_max;
      Eigen::VectorXd a = Eigen::VectorXd::Zero(hidden);
      double lambda_min_kept = lambda_max;
      for (int k = 0; k < hidden; ++k) {
        if (eig.values[k] <= cutoff) continue;
        lambda_min_kept = std::min(lambda_min_kept, eig.values[k]);
        a += (eig.vectors.col(k).dot(rhs) / eig.values[k]) * eig.vectors.col(k);
      }

      rec.built = true;
      rec.condition = lambda_max > 0.0 ? lambda_max / lambda_min_kept : 0.0;
      double worst = 0.0;
      for (int r = 0; r < m_levels; ++r) {
        double nn = 0.0;
        for (int h = 0; h < hidden; ++h)
          nn += a[h] * poly_eval(shifted[h], t[r]);
        worst = std::max(worst, std::abs(nn - level_f[r]));
      }
      rec.residual = worst;
      rec.norm2 = a.norm();

      // Idealized phase-1 row: the population-gradient direction
      // gamma*tau*(m_j alpha_{c(j)}), shared by every hidden unit; units
      // differ only in bias.  The certificate is built for the projection
      // s -> s^T alpha_tilde, so the replay keeps the signal direction and
      // leaves the initialization out; at desk-scale d the w0 carry-over
      // would drown a grid whose span shrinks like sqrt(d)/log(d) * alpha.
      // The 1/u_scale factor matches the row to the normalized coordinates
      // the second layer was fit in.
      Eigen::VectorXd w1(d);
      for (int j = 0; j < d; ++j)
        w1[j] = gamma * tau * noise_mean(model.noise[j]) *
                av.alpha[model.partition.cluster_of(j)] / u_scale;

      double abs_sum = 0.0;
      int done = 0;
      while (done < mc_samples) {
        const int block = std::min(4096, mc_samples - done);
        Batch batch = sample_batch(model, block, mc_rng);
        Eigen::VectorXd proj = batch.x * w1;
        for (int i = 0; i < block; ++i) {
          double nn = 0.0;
          for (int h = 0; h < hidden; ++h)
            nn += a[h] * act.value(proj[i] + biases[h]);
          abs_sum += std::abs(batch.y[i] - nn);
        }
        done += block;
      }
      rec.pop_abs_error = abs_sum / mc_samples;
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  });

  out.n_inconsistent = 0;
  out.n_failed = 0;
  std::vector<double> all_errors, built_errors;
  for (const auto& r : out.records) {
    if (!r.consistent) ++out.n_inconsistent;
    if (!r.built) ++out.n_failed;
    all_errors.push_back(r.pop_abs_error);
    if (r.built) built_errors.push_back(r.pop_abs_error);
  }
  out.median_pop_error = median_of(all_errors);
  out.mean_pop_error =
      built_errors.empty()
          ? kNaN
          : std::accumulate(built_errors.begin(), built_errors.end(), 0.0) /
                built_errors.size();
  return out;
}

std::filesystem::path write_certify(const CertifyResult& result,
                                    const std::filesystem::path& out) {
  const auto dir = run_dir(out, result.hash);
  write_text(dir / "config.json", result.config.dump(2) + "\n");
  CsvWriter results({"trial", "consistent", "built", "condition", "residual",
                     "norm2", "levels", "min_gap", "pop_abs_error", "error"});
  for (const auto& r : result.records)
    results.row({std::to_string(r.trial), r.consistent ? "1" : "0",
                 r.built ? "1" : "0", format_double(r.condition),
                 format_double(r.residual), format_double(r.norm2),
                 std::to_string(r.levels), format_double(r.min_gap),
                 format_double(r.pop_abs_error), csv_safe(r.error)});
  results.write(dir / "results.csv");
  write_text(dir / "results.json",
             nlohmann::json{{"config_hash", result.hash},
                            {"n_inconsistent", result.n_inconsistent},
                            {"n_failed", result.n_failed},
                            {"median_pop_error", result.median_pop_error},
                            {"mean_pop_error", result.mean_pop_error}}
                     .dump(2) +
                 "\n");
  CsvWriter agg({"n_trials", "n_inconsistent", "n_failed", "median_pop_error",
                 "mean_pop_error"});
  agg.row({std::to_string(result.records.size()),
           std::to_string(result.n_inconsistent), std::to_string(result.n_failed),
           format_double(result.median_pop_error),
           format_double(result.mean_pop_error)});
  agg.write(dir / "aggregate.csv");
  return dir;
}

// ---------------------------------------------------------------------------
// ingest and the tabular path

TabularDataset ingest(const std::filesystem::path& csv, int d,
                      double test_fraction, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("ingest: d must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("ingest: test_fraction must lie in (0, 1)");
  const CsvTable table = read_csv(csv);
  if (table.header.size() < 2)
    throw std::invalid_argument("ingest: need at least one feature column plus labels");
  const int n_features = static_cast<int>(table.header.size()) - 1;

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  int skipped = 0;
  for (const auto& cells : table.rows) {
    if (cells.size() != table.header.size()) {
      ++skipped;
      continue;
    }
    std::vector<double> row(n_features);
    bool ok = true;
    for (int j = 0; j < n_features; ++j) {
      try {
        std::size_t pos = 0;
        row[j] = std::stod(cells[j], &pos);
        if (pos != cells[j].size() || !std::isfinite(row[j])) ok = false;
      } catch (...) {
        ok = false;
      }
      if (!ok) break;
    }
    if (!ok) {
      ++skipped;
      continue;
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(cells[n_features]);
  }
  if (rows.empty()) throw std::invalid_argument("ingest: no usable rows");

  TabularDataset ds;
  ds.skipped_rows = skipped;

  // Label-blind ranking: dispersion (variance/mean) when every feature is
  // nonnegative, plain variance otherwise.
  const int n_rows = static_cast<int>(rows.size());
  bool any_negative = false;
  for (const auto& row : rows)
    for (double v : row)
      if (v < 0.0) any_negative = true;
  std::vector<double> score(n_features);
  for (int j = 0; j < n_features; ++j) {
    double mean = 0.0;
    for (const auto& row : rows) mean += row[j];
    mean /= n_rows;
    double var = 0.0;
    for (const auto& row : rows) var += (row[j] - mean) * (row[j] - mean);
    var /= n_rows;
    score[j] = any_negative ? var : (mean > 0.0 ? var / mean : 0.0);
  }
  std::vector<int> ranking(n_features);
  std::iota(ranking.begin(), ranking.end(), 0);
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](int a, int b) { return score[a] > score[b]; });

  ds.dim_clamped = d > n_features;
  const int keep = std::min(d, n_features);
  ds.selected_columns.assign(ranking.begin(), ranking.begin() + keep);
  for (int col : ds.selected_columns) ds.feature_names.push_back(table.header[col]);

  ds.features.resize(n_rows, keep);
  for (int i = 0; i < n_rows; ++i)
    for (int j = 0; j < keep; ++j) ds.features(i, j) = rows[i][ds.selected_columns[j]];

  // Classes contiguous from 0 in sorted label order.
  ds.class_names = raw_labels;
  std::sort(ds.class_names.begin(), ds.class_names.end());
  ds.class_names.erase(std::unique(ds.class_names.begin(), ds.class_names.end()),
                       ds.class_names.end());
  ds.labels.resize(n_rows);
  for (int i = 0; i < n_rows; ++i)
    ds.labels[i] = static_cast<int>(
        std::lower_bound(ds.class_names.begin(), ds.class_names.end(),
                         raw_labels[i]) -
        ds.class_names.begin());

  // Stratified split: per class, seeded shuffle, rounded test share.
  Rng rng(seed);
  Rng split_rng = rng.split(0);
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
    std::vector<int> members;
    for (int i = 0; i < n_rows; ++i)
      if (ds.labels[i] == static_cast<int>(c)) members.push_back(i);
    for (std::size_t i = members.size(); i-- > 1;)
      std::swap(members[i],
                members[split_rng.uniform_int(0, static_cast<std::int64_t>(i))]);
    const int n_test = static_cast<int>(
        std::floor(test_fraction * static_cast<double>(members.size()) + 0.5));
    for (std::size_t i = 0; i < members.size(); ++i)
      (static_cast<int>(i) < n_test ? ds.test_rows : ds.train_rows)
          .push_back(members[i]);
  }
  std::sort(ds.train_rows.begin(), ds.train_rows.end());
  std::sort(ds.test_rows.begin(), ds.test_rows.end());
  return ds;
}

Eigen::MatrixXd feature_correlation(const TabularDataset& ds) {
  const int n = static_cast<int>(ds.features.rows());
  const int k = static_cast<int>(ds.features.cols());
  Eigen::MatrixXd centered = ds.features;
  for (int j = 0; j < k; ++j) centered.col(j).array() -= centered.col(j).mean();
  Eigen::VectorXd sd(k);
  for (int j = 0; j < k; ++j) sd[j] = std::sqrt(centered.col(j).squaredNorm() / n);
  Eigen::MatrixXd corr = centered.transpose() * centered / n;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double denom = sd[i] * sd[j];
      corr(i, j) = denom > 0.0 ? corr(i, j) / denom : (i == j ? 1.0 : 0.0);
    }
  return corr;
}

void generate_csv(const DataModel& model, int rows, std::uint64_t seed,
                  const std::filesystem::path& path) {
  if (rows < 1) throw std::invalid_argument("generate_csv: rows must be positive");
  std::vector<std::string> header;
  for (int j = 0; j < model.dim(); ++j) header.push_back("f" + std::to_string(j));
  header.push_back("label");
  CsvWriter csv(header);
  Rng rng(seed);
  Rng data_rng = rng.split(0);
  for (int r = 0; r < rows; ++r) {
    Sample s = sample_one(model, data_rng);
    std::vector<std::string> cells;
    cells.reserve(model.dim() + 1);
    for (int j = 0; j < model.dim(); ++j) cells.push_back(format_double(s.x[j]));
    cells.push_back(format_double(s.y));
    csv.row(cells);
  }
  csv.write(path);
}

double train_on_dataset(const TabularDataset& ds,
                        const std::vector<int>& train_rows,
                        const DatasetTrainerConfig& cfg, Rng& rng) {
  if (train_rows.empty()) throw std::invalid_argument("train_on_dataset: no rows");
  const int n_classes = static_cast<int>(ds.class_names.size());
  const int d = static_cast<int>(ds.features.cols());
  const Activation act = Activation::relu();

  Rng init_rng = rng.split(0);
  Rng batch_rng = rng.split(1);

  std::vector<TwoLayerNet> nets;
  const double wb = 1.0 / std::sqrt(static_cast<double>(d));
  const double ab = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  for (int c = 0; c < n_classes; ++c) {
    Eigen::MatrixXd w(cfg.hidden, d);
    for (int h = 0; h < cfg.hidden; ++h)
      for (int j = 0; j < d; ++j) w(h, j) = init_rng.uniform(-wb, wb);
    Eigen::VectorXd a(cfg.hidden), b(cfg.hidden);
    for (int h = 0; h < cfg.hidden; ++h) a[h] = init_rng.uniform(-ab, ab);
    for (int h = 0; h < cfg.hidden; ++h) b[h] = init_rng.uniform(-wb, wb);
    nets.push_back(TwoLayerNet{std::move(w), std::move(a), std::move(b), act});
  }

  Batch batch;
  batch.x.resize(cfg.batch, d);
  batch.s.resize(0, 0);
  batch.y.resize(cfg.batch);
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<int> picks(cfg.batch);
    for (int b = 0; b < cfg.batch; ++b) {
      picks[b] = train_rows[batch_rng.uniform_int(
          0, static_cast<std::int64_t>(train_rows.size()) - 1)];
      batch.x.row(b) = ds.features.row(picks[b]);
    }
    for (int c = 0; c < n_classes; ++c) {
      for (int b = 0; b < cfg.batch; ++b)
        batch.y[b] = ds.labels[picks[b]] == c ? 1.0 : -1.0;
      GradientValue g = loss_gradients(nets[c], batch);
      if (!g.w.allFinite())
        throw std::runtime_error("train_on_dataset: non-finite gradient");
      nets[c].w -= cfg.lr * g.w;
      nets[c].a -= cfg.lr * g.a;
      nets[c].b -= cfg.lr * g.b;
    }
  }

  int hits = 0;
  for (int row : ds.test_rows) {
    const Eigen::VectorXd x = ds.features.row(row).transpose();
    int best = 0;
    double best_score = -kInf;
    for (int c = 0; c < n_classes; ++c) {
      const double score = forward(nets[c], x);
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    if (best == ds.labels[row]) ++hits;
  }
  return ds.test_rows.empty() ? kNaN
                              : static_cast<double>(hits) / ds.test_rows.size();
}

namespace {

// Proportional per-class subsample of the training rows.
std::vector<int> stratified_subsample(const TabularDataset& ds, int n, Rng& rng) {
  const int total = static_cast<int>(ds.train_rows.size());
  n = std::min(n, total);
  std::vector<std::vector<int>> per_class(ds.class_names.size());
  for (int row : ds.train_rows) per_class[ds.labels[row]].push_back(row);
  std::vector<int> counts(per_class.size());
  std::vector<std::pair<double, int>> fractional;
  int assigned = 0;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    const double share =
        static_cast<double>(n) * per_class[c].size() / static_cast<double>(total);
    counts[c] = static_cast<int>(std::floor(share));
    counts[c] = std::min(counts[c], static_cast<int>(per_class[c].size()));
    assigned += counts[c];
    fractional.emplace_back(share - std::floor(share), static_cast<int>(c));
  }
  std::sort(fractional.begin(), fractional.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [frac, c] : fractional) {
    if (assigned >= n) break;
    if (counts[c] < static_cast<int>(per_class[c].size())) {
      ++counts[c];
      ++assigned;
    }
  }
  std::vector<int> picked;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    auto& members = per_class[c];
    for (std::size_t i = members.size(); i-- > 1;)
      std::swap(members[i],
                members[rng.uniform_int(0, static_cast<std::int64_t>(i))]);
    picked.insert(picked.end(), members.begin(), members.begin() + counts[c]);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace

AccuracyResult run_accuracy_vs_n(const nlohmann::json& config, int jobs) {
  reject_unknown_keys(config,
                      {"csv", "dims", "train_sizes", "seeds", "test_fraction",
                       "split_seed", "trainer"},
                      "accuracy config");
  const std::string csv = config.at("csv").get<std::string>();
  const auto dims = config.at("dims").get<std::vector<int>>();
  const auto sizes = config.at("train_sizes").get<std::vector<int>>();
  if (dims.empty() || sizes.empty())
    throw std::invalid_argument("accuracy config: empty dims or train_sizes");
  const auto seeds = seeds_from_config(config);
  const double test_fraction = config.value("test_fraction", 0.2);
  const std::uint64_t split_seed = config.value("split_seed", std::uint64_t{0});
  DatasetTrainerConfig trainer;
  if (config.contains("trainer")) {
    const auto& t = config.at("trainer");
    reject_unknown_keys(t, {"hidden", "lr", "batch", "steps"}, "trainer");
    trainer.hidden = t.value("hidden", 64);
    trainer.lr = t.value("lr", 0.01);
    trainer.batch = t.value("batch", 32);
    trainer.steps = t.value("steps", 2000);
  }

  // One ingest at the largest d; smaller d are prefixes of the same ranking.
  const int d_max = *std::max_element(dims.begin(), dims.end());
  const TabularDataset full = ingest(csv, d_max, test_fraction, split_seed);

  AccuracyResult out;
  out.config = config;
  out.hash = config_hash(config);
  const int n_cells = static_cast<int>(dims.size() * sizes.size() * seeds.size());
  out.records.resize(n_cells);

  parallel_cells(n_cells, jobs, [&](int cell) {
    const int per_d = static_cast<int>(sizes.size() * seeds.size());
    const int di = cell / per_d;
    const int ni = (cell % per_d) / static_cast<int>(seeds.size());
    const int si = cell % static_cast<int>(seeds.size());
    AccuracyRecord& rec = out.records[cell];
    rec.config_hash = out.hash;
    rec.seed = seeds[si];
    rec.d = dims[di];
    rec.n = sizes[ni];
    rec.accuracy = kNaN;
    rec.failed = false;
    try {
      TabularDataset view = full;
      const int keep = std::min<int>(dims[di], full.features.cols());
      view.features = full.features.leftCols(keep).eval();
      view.feature_names.resize(keep);
      view.selected_columns.resize(keep);
      Rng rng(seeds[si]);
      Rng cell_rng = rng.split(static_cast<std::uint64_t>(di),
                               static_cast<std::uint64_t>(ni));
      Rng pick_rng = cell_rng.split(0);
      Rng train_rng = cell_rng.split(1);
      const std::vector<int> rows = stratified_subsample(view, sizes[ni], pick_rng);
      rec.accuracy = train_on_dataset(view, rows, trainer, train_rng);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });

  for (std::size_t di = 0; di < dims.size(); ++di)
    for (std::size_t ni = 0; ni < sizes.size(); ++ni) {
      std::vector<double> accs;
      for (std::size_t si = 0; si < seeds.size(); ++si) {
        const auto& rec =
            out.records[(di * sizes.size() + ni) * seeds.size() + si];
        if (!rec.failed) accs.push_back(rec.accuracy);
      }
      AccuracyAggregate agg;
      agg.d = dims[di];
      agg.n = sizes[ni];
      agg.n_seeds = static_cast<int>(accs.size());
      if (accs.empty()) {
        agg.mean_accuracy = agg.sd = kNaN;
      } else {
        agg.mean_accuracy =
            std::accumulate(accs.begin(), accs.end(), 0.0) / accs.size();
        double ss = 0.0;
        for (double a : accs) ss += (a - agg.mean_accuracy) * (a - agg.mean_accuracy);
        agg.sd = accs.size() > 1 ? std::sqrt(ss / (accs.size() - 1)) : 0.0;
      }
      out.aggregate.push_back(agg);
    }
  return out;
}

std::filesystem::path write_accuracy(const AccuracyResult& result,
                                     const std::filesystem::path& out) {
  const auto dir = run_dir(out, result.hash);
  write_text(dir / "config.json", result.config.dump(2) + "\n");
  CsvWriter results({"config_hash", "seed", "d", "n", "accuracy", "failed", "error"});
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : result.records) {
    results.row({r.config_hash, std::to_string(r.seed), std::to_string(r.d),
                 std::to_string(r.n), format_double(r.accuracy),
                 r.failed ? "1" : "0", csv_safe(r.error)});
    records.push_back({{"config_hash", r.config_hash},
                       {"seed", r.seed},
                       {"d", r.d},
                       {"n", r.n},
                       {"accuracy", r.accuracy},
                       {"failed", r.failed},
                       {"error", r.error}});
  }
  results.write(dir / "results.csv");
  write_text(dir / "results.json",
             nlohmann::json{{"config_hash", result.hash}, {"records", records}}
                     .dump(2) +
                 "\n");
  CsvWriter agg({"d", "n", "n_seeds", "mean_accuracy", "sd"});
  for (const auto& a : result.aggregate)
    agg.row({std::to_string(a.d), std::to_string(a.n), std::to_string(a.n_seeds),
             format_double(a.mean_accuracy), format_double(a.sd)});
  agg.write(dir / "aggregate.csv");
  return dir;
}

// ---------------------------------------------------------------------------
// selfcheck

namespace {

bool approximately(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

int selfcheck(std::uint64_t seed) {
  struct Check {
    const char* name;
    std::function<bool()> fn;
  };
  Rng rng(seed);

  std::vector<Check> checks;
  checks.push_back({"walsh_hadamard round trip", [&] {
    Rng r = rng.split(1);
    std::vector<double> v(256);
    for (auto& x : v) x = r.uniform(-1, 1);
    const auto back = inverse_walsh_hadamard(walsh_hadamard(v));
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!approximately(v[i], back[i], 1e-12)) return false;
    return true;
  }});
  checks.push_back({"parseval identity", [&] {
    Rng r = rng.split(2);
    std::vector<double> v(256);
    for (auto& x : v) x = r.uniform(-1, 1);
    double e2 = 0.0;
    for (double x : v) e2 += x * x;
    e2 /= v.size();
    double c2 = 0.0;
    for (double c : walsh_hadamard(v)) c2 += c * c;
    return approximately(e2, c2, 1e-12);
  }});
  checks.push_back({"majority coefficients vs brute force (N=5)", [&] {
    const BooleanFunction maj = BooleanFunction::majority(5);
    for (int k = 0; k <= 5; ++k) {
      // any subset of size k; use the lowest k bits
      const std::size_t mask = (std::size_t{1} << k) - 1;
      if (!approximately(maj.fourier()[mask], majority_coefficient(5, k), 1e-12))
        return false;
    }
    return true;
  }});
  checks.push_back({"gradients vs finite differences", [&] {
    Rng r = rng.split(3);
    for (const Activation& act :
         {Activation::relu(), Activation::truncated_exp(4)}) {
      TwoLayerNet net = init_layerwise(4, 6, 0.3, act, r);
      for (int h = 0; h < 4; ++h) net.b[h] = r.uniform(-0.5, 0.5);
      DataModel model = make_bsc_model(2, 6, 0.1, BooleanFunction::parity(2));
      Batch batch = sample_batch(model, 16, r);
      GradientValue g = loss_gradients(net, batch);
      const double eps = 1e-5;
      TwoLayerNet plus = net, minus = net;
      plus.w(1, 2) += eps;
      minus.w(1, 2) -= eps;
      const double fd = (loss_gradients(plus, batch).loss -
                         loss_gradients(minus, batch).loss) /
                        (2 * eps);
      if (!approximately(fd, g.w(1, 2), 1e-6 * std::max(1.0, std::abs(fd))))
        return false;
    }
    return true;
  }});
  checks.push_back({"sampling determinism", [&] {
    DataModel model = make_bsc_model(3, 12, 0.2, BooleanFunction::parity(3));
    Rng a(seed + 17), b(seed + 17);
    Batch ba = sample_batch(model, 32, a);
    Batch bb = sample_batch(model, 32, b);
    return ba.x == bb.x && ba.y == bb.y;
  }});
  checks.push_back({"signal stats on the homogeneous channel", [&] {
    DataModel model = make_bsc_model(3, 12, 0.2, BooleanFunction::parity(3));
    const SignalStats st = signal_stats(model);
    return approximately(st.v_sum, 12 * 0.36, 1e-12) &&
           approximately(st.mu, 0.64, 1e-12) &&
           approximately(st.v_min, 4 * 0.36, 1e-12);
  }});
  checks.push_back({"certificate interpolation", [&] {
    Rng r = rng.split(4);
    Eigen::VectorXd alpha(3);
    alpha << 1.0, 2.0, 4.0;
    const ProjectionGrid grid =
        projection_grid(alpha, Eigen::VectorXd::Ones(3), 1.0, 1.0);
    const BooleanFunction f = BooleanFunction::parity(3);
    Eigen::VectorXd biases(64);
    for (int h = 0; h < 64; ++h) biases[h] = r.uniform(-14, 14);
    const Certificate cert =
        build_certificate(grid, f, biases, Activation::relu());
    return cert.residual <= 1e-8;
  }});
  checks.push_back({"triangular certificate interpolation", [&] {
    Rng r = rng.split(5);
    Eigen::VectorXd alpha(3);
    alpha << 1.0, 2.0, 4.0;
    const ProjectionGrid grid =
        projection_grid(alpha, Eigen::VectorXd::Ones(3), 1.0, 1.0);
    const BooleanFunction f = BooleanFunction::parity(3);
    std::vector<double> pool;
    for (int j = 0; j < grid.levels(); ++j)
      pool.push_back(-grid.u[j] + grid.min_gap * 0.2);
    for (int extra = 0; extra < 40; ++extra) pool.push_back(r.uniform(-14, 14));
    Eigen::VectorXd biases =
        Eigen::Map<Eigen::VectorXd>(pool.data(), static_cast<int>(pool.size()));
    const TriangularCertificate cert =
        build_certificate_triangular(grid, f, biases);
    return cert.residual <= 1e-9 && std::isfinite(cert.a_inf) &&
           cert.bound > 0.0;
  }});
  checks.push_back({"hermite coefficient variance closed form", [&] {
    return approximately(hermite_coeff_variance(0, 1.0, 1.0, 2), 2.0, 1e-12);
  }});
  checks.push_back({"partition error under relabeling", [&] {
    std::vector<int> truth = {0, 0, 1, 1, 2, 2};
    std::vector<int> found = {2, 2, 0, 0, 1, 1};
    return partition_error(found, truth) == 0.0;
  }});

  int failures = 0;
  for (const auto& check : checks) {
    bool ok = false;
    try {
      ok = check.fn();
    } catch (const std::exception& e) {
      std::fprintf(stderr, "  (%s threw: %s)\n", check.name, e.what());
    }
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", check.name);
    if (!ok) ++failures;
  }
  return failures;
}

}  // namespace clusterfeat
