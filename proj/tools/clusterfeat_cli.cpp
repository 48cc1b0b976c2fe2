#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "clusterfeat/experiments.hpp"
#include "clusterfeat/io.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  return nlohmann::json::parse(in);
}

bool is_config_error(const std::exception& e) {
  return dynamic_cast<const nlohmann::json::exception*>(&e) != nullptr ||
         dynamic_cast<const std::invalid_argument*>(&e) != nullptr;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace clusterfeat;

  CLI::App app{"feature learning on latent cluster structure: sweeps, baselines, "
               "certificates, tabular ingestion"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int jobs = 1;
  auto* config_opt = app.add_option("--config", config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed, "seed override");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--jobs", jobs, "worker threads for independent cells")
      ->check(CLI::PositiveNumber);

  auto* cmd_generate = app.add_subcommand(
      "generate", "write a synthetic CSV sampled from a model template");
  auto* cmd_sweep_d = app.add_subcommand(
      "sweep-d", "samples-to-threshold sweep over input dimension");
  auto* cmd_sweep_delta = app.add_subcommand(
      "sweep-delta", "samples-to-threshold sweep over the noise level");
  auto* cmd_baselines = app.add_subcommand(
      "baselines", "covariance clustering baselines over sample budgets");
  auto* cmd_certify = app.add_subcommand(
      "certify", "population certificates from randomly drawn first layers");
  auto* cmd_ingest = app.add_subcommand(
      "ingest", "load a CSV, select top-d features, stratified split");
  auto* cmd_accuracy = app.add_subcommand(
      "accuracy-vs-n", "test accuracy curves over training-set size");
  auto* cmd_selfcheck =
      app.add_subcommand("selfcheck", "run the fast invariant suite");
  for (CLI::App* sub : {cmd_generate, cmd_sweep_d, cmd_sweep_delta, cmd_baselines,
                        cmd_certify, cmd_ingest, cmd_accuracy, cmd_selfcheck})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_selfcheck->parsed()) {
      const int failures = selfcheck(seed);
      std::printf("%d failure(s)\n", failures);
      return failures > 0 ? 1 : 0;
    }

    if (!config_opt->count())
      throw std::invalid_argument("--config is required for this subcommand");
    nlohmann::json cfg = load_config(config_path);

    if (cmd_generate->parsed()) {
      reject_unknown_keys(cfg, {"model", "rows", "seed"}, "generate config");
      if (seed_opt->count()) cfg["seed"] = seed;
      const DataModel model = model_from_template(cfg.at("model"));
      const int rows = cfg.at("rows").get<int>();
      const auto dir =
          std::filesystem::path(out_dir) / config_hash(cfg);
      std::filesystem::create_directories(dir);
      write_text(dir / "config.json", cfg.dump(2) + "\n");
      generate_csv(model, rows, cfg.value("seed", std::uint64_t{0}),
                   dir / "dataset.csv");
      std::printf("%s\n", (dir / "dataset.csv").string().c_str());
      return 0;
    }

    if (cmd_sweep_d->parsed() || cmd_sweep_delta->parsed()) {
      if (!cfg.contains("seeds") && seed_opt->count())
        cfg["seeds"] = nlohmann::json::array({seed});
      const std::string want = cmd_sweep_d->parsed() ? "dim" : "delta";
      if (cfg.at("axis").at("name").get<std::string>() != want)
        throw std::invalid_argument("config axis.name must be '" + want +
                                    "' for this subcommand");
      const SweepResult res = run_sweep(cfg, jobs);
      const auto dir = write_sweep(res, out_dir);
      for (const auto& a : res.aggregate)
        std::printf("%s=%s  reached %d/%d  mean samples %s +- %s\n",
                    a.axis.c_str(), format_double(a.value).c_str(), a.n_reached,
                    a.n_seeds, format_double(a.mean_samples).c_str(),
                    format_double(a.ci95).c_str());
      std::printf("wrote %s\n", dir.string().c_str());
      int failed = 0;
      for (const auto& r : res.records) failed += r.failed ? 1 : 0;
      return failed > 0 ? 1 : 0;
    }

    if (cmd_baselines->parsed()) {
      if (!cfg.contains("seeds") && seed_opt->count())
        cfg["seeds"] = nlohmann::json::array({seed});
      const BaselineResult res = run_baseline_compare(cfg, jobs);
      const auto dir = write_baselines(res, out_dir);
      for (const auto& a : res.aggregate)
        std::printf("%s  B=%lld  error %s +- %s\n", a.method.c_str(),
                    static_cast<long long>(a.budget),
                    format_double(a.mean_error).c_str(),
                    format_double(a.ci95).c_str());
      std::printf("wrote %s\n", dir.string().c_str());
      int failed = 0;
      for (const auto& r : res.records) failed += r.failed ? 1 : 0;
      return failed > 0 ? 1 : 0;
    }

    if (cmd_certify->parsed()) {
      if (seed_opt->count()) cfg["seed"] = seed;
      const CertifyResult res = run_certify(cfg, jobs);
      const auto dir = write_certify(res, out_dir);
      std::printf(
          "trials %zu  inconsistent %d  failed %d  median |err| %s  mean |err| "
          "%s\n",
          res.records.size(), res.n_inconsistent, res.n_failed,
          format_double(res.median_pop_error).c_str(),
          format_double(res.mean_pop_error).c_str());
      std::printf("wrote %s\n", dir.string().c_str());
      return res.n_failed > 0 ? 1 : 0;
    }

    if (cmd_ingest->parsed()) {
      reject_unknown_keys(cfg, {"csv", "d", "test_fraction", "correlation", "seed"},
                          "ingest config");
      if (seed_opt->count()) cfg["seed"] = seed;
      const TabularDataset ds =
          ingest(cfg.at("csv").get<std::string>(), cfg.at("d").get<int>(),
                 cfg.value("test_fraction", 0.2),
                 cfg.value("seed", std::uint64_t{0}));
      if (ds.dim_clamped)
        std::fprintf(stderr, "warning: d clamped to %d available features\n",
                     static_cast<int>(ds.features.cols()));
      if (ds.skipped_rows > 0)
        std::fprintf(stderr, "warning: skipped %d unreadable rows\n",
                     ds.skipped_rows);
      const auto dir = std::filesystem::path(out_dir) / config_hash(cfg);
      std::filesystem::create_directories(dir);
      write_text(dir / "config.json", cfg.dump(2) + "\n");
      nlohmann::json summary{{"config_hash", config_hash(cfg)},
                             {"rows", ds.features.rows()},
                             {"selected_features", ds.feature_names},
                             {"selected_columns", ds.selected_columns},
                             {"classes", ds.class_names},
                             {"train_rows", ds.train_rows.size()},
                             {"test_rows", ds.test_rows.size()},
                             {"skipped_rows", ds.skipped_rows},
                             {"dim_clamped", ds.dim_clamped}};
      write_text(dir / "ingest.json", summary.dump(2) + "\n");
      if (cfg.value("correlation", false)) {
        const Eigen::MatrixXd corr = feature_correlation(ds);
        CsvWriter csv(ds.feature_names);
        for (int i = 0; i < corr.rows(); ++i) {
          std::vector<std::string> cells;
          for (int j = 0; j < corr.cols(); ++j)
            cells.push_back(format_double(corr(i, j)));
          csv.row(cells);
        }
        csv.write(dir / "correlation.csv");
      }
      std::printf("wrote %s\n", dir.string().c_str());
      return 0;
    }

    if (cmd_accuracy->parsed()) {
      if (!cfg.contains("seeds") && seed_opt->count())
        cfg["seeds"] = nlohmann::json::array({seed});
      const AccuracyResult res = run_accuracy_vs_n(cfg, jobs);
      const auto dir = write_accuracy(res, out_dir);
      for (const auto& a : res.aggregate)
        std::printf("d=%d n=%d  accuracy %s +- %s\n", a.d, a.n,
                    format_double(a.mean_accuracy).c_str(),
                    format_double(a.sd).c_str());
      std::printf("wrote %s\n", dir.string().c_str());
      int failed = 0;
      for (const auto& r : res.records) failed += r.failed ? 1 : 0;
      return failed > 0 ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return is_config_error(e) ? 2 : 1;
  }
  return 0;
}
