#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "clusterfeat/baselines.hpp"
#include "clusterfeat/boolean_analysis.hpp"
#include "clusterfeat/experiments.hpp"
#include "clusterfeat/theory.hpp"
#include "clusterfeat/training.hpp"

namespace py = pybind11;
using namespace clusterfeat;

namespace {

Activation activation_by_name(const std::string& kind, int degree) {
  if (kind == "relu") return Activation::relu();
  if (kind == "truncated_exp") return Activation::truncated_exp(degree);
  throw std::invalid_argument("unknown activation: " + kind);
}

py::dict trace_dict(const TrainTrace& trace) {
  std::vector<std::int64_t> samples;
  std::vector<double> mse, abs_err, accuracy;
  for (const auto& p : trace.points) {
    samples.push_back(p.samples);
    mse.push_back(p.mse);
    abs_err.push_back(p.abs_err);
    accuracy.push_back(p.accuracy);
  }
  py::dict d;
  d["samples"] = samples;
  d["mse"] = mse;
  d["abs_err"] = abs_err;
  d["accuracy"] = accuracy;
  d["samples_used"] = trace.samples_used;
  d["diverged"] = trace.diverged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "two-layer feature learning on latent cluster structure";

  py::class_<DataModel>(m, "DataModel")
      .def_property_readonly("dim", &DataModel::dim)
      .def_property_readonly("n_clusters", &DataModel::n_clusters)
      .def("__repr__", [](const DataModel& model) {
        return "<DataModel N=" + std::to_string(model.n_clusters()) +
               " d=" + std::to_string(model.dim()) + ">";
      });

  m.def(
      "bsc_model",
      [](int n_clusters, int dim, double delta, const std::string& target) {
        return make_bsc_model(n_clusters, dim, delta,
                              named_target(target, n_clusters));
      },
      py::arg("n_clusters"), py::arg("dim"), py::arg("delta"),
      py::arg("target") = "parity");

  m.def(
      "gaussian_mixture_model",
      [](int n_clusters, int dim, double mean, double variance,
         const std::string& target) {
        return make_gaussian_mixture_model(n_clusters, dim, mean, variance,
                                           named_target(target, n_clusters));
      },
      py::arg("n_clusters"), py::arg("dim"), py::arg("mean"),
      py::arg("variance"), py::arg("target") = "parity");

  m.def(
      "sample",
      [](const DataModel& model, int count, std::uint64_t seed) {
        Rng rng(seed);
        Batch b = sample_batch(model, count, rng);
        return py::make_tuple(b.x, b.y);
      },
      py::arg("model"), py::arg("count"), py::arg("seed") = 0,
      "Draw (x, y) pairs; returns a (count x d) array and a length-count "
      "label vector.");

  m.def("signal_stats", [](const DataModel& model) {
    const SignalStats s = signal_stats(model);
    py::dict d;
    d["v"] = s.v;
    d["v_min"] = s.v_min;
    d["v_sum"] = s.v_sum;
    d["mu"] = s.mu;
    d["snr_ratio"] = s.snr_ratio;
    return d;
  });

  m.def("population_covariance", &population_covariance);
  m.def("walsh_hadamard", &walsh_hadamard,
        "Fourier coefficients of a +-1-indexed table, normalized by 2^-N.");
  m.def("majority_coefficient", &majority_coefficient, py::arg("n"),
        py::arg("subset_size"));
  m.def("majority_margin", [](const BooleanFunction& f) {
    return majority_margin(f).margin;
  });
  m.def("named_target", &named_target, py::arg("name"), py::arg("n"));

  py::class_<BooleanFunction>(m, "BooleanFunction")
      .def_property_readonly("n", &BooleanFunction::n)
      .def("fourier", &BooleanFunction::fourier);

  m.def("empirical_covariance", &empirical_covariance);
  m.def(
      "covariance_threshold_cluster",
      [](const Eigen::MatrixXd& cov, double threshold) {
        return covariance_threshold_cluster(cov, threshold).labels;
      },
      py::arg("cov"), py::arg("threshold"));
  m.def(
      "spectral_cluster",
      [](const Eigen::MatrixXd& cov, int n_clusters, std::uint64_t seed,
         int restarts) {
        Rng rng(seed);
        return spectral_cluster(cov, n_clusters, rng, restarts).labels;
      },
      py::arg("cov"), py::arg("n_clusters"), py::arg("seed") = 0,
      py::arg("restarts") = 50);
  m.def("partition_error", &partition_error, py::arg("found"), py::arg("truth"));
  m.def("bsc_edge_threshold", &bsc_edge_threshold, py::arg("delta"));
  m.def("bsc_sample_budget", &bsc_sample_budget, py::arg("dim"),
        py::arg("delta"));

  m.def(
      "joint_train",
      [](const DataModel& model, int hidden, double lr, int batch,
         std::int64_t max_samples, double stop_mse, std::uint64_t seed,
         const std::string& activation, int degree) {
        JointConfig cfg;
        cfg.hidden = hidden;
        cfg.lr = lr;
        cfg.batch = batch;
        cfg.max_samples = max_samples;
        cfg.stop_mse = stop_mse;
        Rng rng(seed);
        return trace_dict(
            joint_sgd_train(model, activation_by_name(activation, degree), cfg,
                            rng)
                .trace);
      },
      py::arg("model"), py::arg("hidden") = 256, py::arg("lr") = 1e-3,
      py::arg("batch") = 64, py::arg("max_samples") = 1000000,
      py::arg("stop_mse") = -1.0, py::arg("seed") = 0,
      py::arg("activation") = "relu", py::arg("degree") = 8);

  m.def(
      "layerwise_train",
      [](const DataModel& model, int hidden, int t2, std::uint64_t seed,
         const std::string& activation, int degree) {
        LayerwiseConfig cfg;
        cfg.hidden = hidden;
        cfg.t2 = t2;
        Rng rng(seed);
        return trace_dict(
            layerwise_train(model, activation_by_name(activation, degree), cfg,
                            rng)
                .trace);
      },
      py::arg("model"), py::arg("hidden") = 64, py::arg("t2") = 2000,
      py::arg("seed") = 0, py::arg("activation") = "truncated_exp",
      py::arg("degree") = 8);

  m.def(
      "samples_to_threshold",
      [](const DataModel& model, double threshold, int hidden, double lr,
         int batch, std::int64_t max_samples, std::uint64_t seed,
         const std::string& activation, int degree) {
        JointConfig cfg;
        cfg.hidden = hidden;
        cfg.lr = lr;
        cfg.batch = batch;
        cfg.max_samples = max_samples;
        Rng rng(seed);
        const ThresholdResult r = samples_to_threshold(
            model, activation_by_name(activation, degree), cfg, threshold, rng);
        py::dict d;
        d["reached"] = r.reached;
        d["samples"] = r.samples;
        d["censored"] = r.censored;
        d["trace"] = trace_dict(r.trace);
        return d;
      },
      py::arg("model"), py::arg("threshold") = 0.05, py::arg("hidden") = 256,
      py::arg("lr") = 1e-3, py::arg("batch") = 64,
      py::arg("max_samples") = 1000000, py::arg("seed") = 0,
      py::arg("activation") = "relu", py::arg("degree") = 8);

  m.def("hermite_coeff_variance", &hermite_coeff_variance, py::arg("k"),
        py::arg("a"), py::arg("mu"), py::arg("max_order"));
  m.def("selfcheck", &selfcheck, py::arg("seed") = 0);
}
