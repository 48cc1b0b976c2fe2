#include "clusterfeat/latent_data.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "clusterfeat/io.hpp"

namespace clusterfeat {

double noise_mean(const NoiseLaw& law) {
  return std::visit(
      [](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, RademacherNoise>) {
          return 1.0 - 2.0 * l.flip_prob;
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          return l.mean;
        } else {
          double m = 0.0;
          for (std::size_t i = 0; i < l.values.size(); ++i)
            m += l.values[i] * l.probs[i];
          return m;
        }
      },
      law);
}

double noise_variance(const NoiseLaw& law) {
  return std::visit(
      [&](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, RademacherNoise>) {
          return 4.0 * l.flip_prob * (1.0 - l.flip_prob);
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          return l.variance;
        } else {
          const double m = noise_mean(law);
          double s = 0.0;
          for (std::size_t i = 0; i < l.values.size(); ++i)
            s += (l.values[i] - m) * (l.values[i] - m) * l.probs[i];
          return s;
        }
      },
      law);
}

void validate_noise(const NoiseLaw& law) {
  std::visit(
      [](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, RademacherNoise>) {
          if (!(l.flip_prob >= 0.0 && l.flip_prob <= 1.0))
            throw std::invalid_argument("RademacherNoise: flip_prob outside [0, 1]");
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          if (!std::isfinite(l.mean) || !(l.variance >= 0.0))
            throw std::invalid_argument("GaussianNoise: bad mean or variance");
        } else {
          if (l.values.empty() || l.values.size() != l.probs.size())
            throw std::invalid_argument("TableNoise: values/probs size mismatch");
          double total = 0.0;
          for (std::size_t i = 0; i < l.probs.size(); ++i) {
            if (!(l.probs[i] >= 0.0))
              throw std::invalid_argument("TableNoise: negative probability");
            if (!std::isfinite(l.values[i]))
              throw std::invalid_argument("TableNoise: non-finite value");
            total += l.probs[i];
          }
          if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("TableNoise: probabilities must sum to 1");
        }
      },
      law);
}

ClusterPartition::ClusterPartition(int n_clusters, std::vector<int> assignment)
    : n_clusters_(n_clusters), assignment_(std::move(assignment)) {
  if (n_clusters < 1)
    throw std::invalid_argument("ClusterPartition: need at least one cluster");
  if (static_cast<int>(assignment_.size()) < n_clusters)
    throw std::invalid_argument("ClusterPartition: fewer coordinates than clusters");
  members_.resize(n_clusters);
  for (std::size_t j = 0; j < assignment_.size(); ++j) {
    const int c = assignment_[j];
    if (c < 0 || c >= n_clusters)
      throw std::invalid_argument("ClusterPartition: assignment out of range");
    members_[c].push_back(static_cast<int>(j));
  }
  for (const auto& m : members_)
    if (m.empty())
      throw std::invalid_argument("ClusterPartition: empty cluster");
}

ClusterPartition ClusterPartition::contiguous(int n_clusters, int dim) {
  if (n_clusters < 1 || dim < n_clusters || dim % n_clusters != 0)
    throw std::invalid_argument(
        "ClusterPartition::contiguous: dim must be a positive multiple of n_clusters");
  std::vector<int> assign(dim);
  const int k = dim / n_clusters;
  for (int j = 0; j < dim; ++j) assign[j] = j / k;
  return ClusterPartition(n_clusters, std::move(assign));
}

std::vector<int> ClusterPartition::sizes() const {
  std::vector<int> s(n_clusters_);
  for (int c = 0; c < n_clusters_; ++c) s[c] = static_cast<int>(members_[c].size());
  return s;
}

DataModel::DataModel(ClusterPartition partition_in, std::vector<NoiseLaw> noise_in,
                     BooleanFunction target_in)
    : partition(std::move(partition_in)),
      noise(std::move(noise_in)),
      target(std::move(target_in)) {
  if (static_cast<int>(noise.size()) != partition.dim())
    throw std::invalid_argument("DataModel: one noise law per coordinate required");
  if (target.n() != partition.n_clusters())
    throw std::invalid_argument("DataModel: target arity != number of clusters");
  for (const auto& law : noise) validate_noise(law);
}

DataModel make_bsc_model(int n_clusters, int dim, double delta,
                         BooleanFunction target) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("make_bsc_model: delta outside [0, 1]");
  auto part = ClusterPartition::contiguous(n_clusters, dim);
  std::vector<NoiseLaw> noise(dim, RademacherNoise{delta});
  return DataModel(std::move(part), std::move(noise), std::move(target));
}

DataModel make_gaussian_mixture_model(int n_clusters, int dim,
                                      const Eigen::VectorXd& means,
                                      double variance, BooleanFunction target) {
  if (means.size() != dim)
    throw std::invalid_argument("make_gaussian_mixture_model: need one mean per coordinate");
  auto part = ClusterPartition::contiguous(n_clusters, dim);
  std::vector<NoiseLaw> noise;
  noise.reserve(dim);
  for (int j = 0; j < dim; ++j)
    noise.push_back(GaussianNoise{means[j], variance});
  return DataModel(std::move(part), std::move(noise), std::move(target));
}

DataModel make_gaussian_mixture_model(int n_clusters, int dim, double mean,
                                      double variance, BooleanFunction target) {
  return make_gaussian_mixture_model(
      n_clusters, dim, Eigen::VectorXd::Constant(dim, mean), variance,
      std::move(target));
}

namespace {

double draw_noise(const NoiseLaw& law, Rng& rng) {
  return std::visit(
      [&](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, RademacherNoise>) {
          return rng.uniform() < 1.0 - l.flip_prob ? 1.0 : -1.0;
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          return rng.normal(l.mean, std::sqrt(l.variance));
        } else {
          const double u = rng.uniform();
          double acc = 0.0;
          for (std::size_t i = 0; i < l.probs.size(); ++i) {
            acc += l.probs[i];
            if (u < acc) return l.values[i];
          }
          return l.values.back();
        }
      },
      law);
}

}  // namespace

Sample sample_one(const DataModel& model, Rng& rng) {
  const int n = model.n_clusters();
  const int d = model.dim();
  Sample out;
  out.s.resize(n);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    out.s[i] = rng.uniform() < 0.5 ? 1 : -1;
    if (out.s[i] == -1) idx |= std::size_t{1} << i;
  }
  out.x.resize(d);
  for (int j = 0; j < d; ++j)
    out.x[j] = out.s[model.partition.cluster_of(j)] * draw_noise(model.noise[j], rng);
  out.y = model.target[idx];
  return out;
}

Batch sample_batch(const DataModel& model, int batch, Rng& rng) {
  if (batch < 1) throw std::invalid_argument("sample_batch: batch must be positive");
  const int n = model.n_clusters();
  const int d = model.dim();
  Batch out;
  out.x.resize(batch, d);
  out.s.resize(batch, n);
  out.y.resize(batch);
  for (int b = 0; b < batch; ++b) {
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
      const int si = rng.uniform() < 0.5 ? 1 : -1;
      out.s(b, i) = si;
      if (si == -1) idx |= std::size_t{1} << i;
    }
    for (int j = 0; j < d; ++j)
      out.x(b, j) =
          out.s(b, model.partition.cluster_of(j)) * draw_noise(model.noise[j], rng);
    out.y[b] = model.target[idx];
  }
  return out;
}

SignalStats signal_stats(const DataModel& model) {
  SignalStats st;
  const int n = model.n_clusters();
  st.v = Eigen::VectorXd::Zero(n);
  double tau2 = 0.0;
  for (int j = 0; j < model.dim(); ++j) {
    const double m = noise_mean(model.noise[j]);
    st.v[model.partition.cluster_of(j)] += m * m;
    tau2 += noise_variance(model.noise[j]);
  }
  st.v_min = st.v.minCoeff();
  st.v_sum = st.v.sum();
  st.mu = tau2 / model.dim();
  st.snr_ratio = st.v_sum / model.dim();
  return st;
}

IdentifiabilityReport check_identifiability(const DataModel& model, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("check_identifiability: c must be positive");
  const SignalStats st = signal_stats(model);
  IdentifiabilityReport rep;
  rep.balance_ratio = st.v_sum > 0.0 ? st.v_min / st.v_sum : 0.0;
  rep.snr_ratio = st.snr_ratio;
  rep.pass_balance = st.v_sum > 0.0 && rep.balance_ratio >= c;
  rep.pass_snr = st.v_sum > 0.0 && rep.snr_ratio >= c;
  rep.pass = rep.pass_balance && rep.pass_snr;
  return rep;
}

Eigen::MatrixXd population_covariance(const DataModel& model) {
  const int d = model.dim();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  std::vector<double> m(d);
  for (int j = 0; j < d; ++j) m[j] = noise_mean(model.noise[j]);
  for (const auto& cluster : model.partition.members())
    for (int j : cluster)
      for (int k : cluster)
        cov(j, k) = m[j] * m[k];
  for (int j = 0; j < d; ++j)
    cov(j, j) = m[j] * m[j] + noise_variance(model.noise[j]);
  return cov;
}

nlohmann::json target_to_json(const BooleanFunction& f) {
  if (f.kind() == "table")
    return {{"kind", "table"}, {"n", f.n()}, {"values", f.values()}};
  return {{"kind", f.kind()}, {"n", f.n()}};
}

BooleanFunction target_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"kind", "n", "values"}, "target");
  const std::string kind = j.at("kind").get<std::string>();
  const int n = j.at("n").get<int>();
  if (kind == "table")
    return BooleanFunction(n, j.at("values").get<std::vector<double>>());
  return named_target(kind, n);
}

namespace {

nlohmann::json noise_to_json(const NoiseLaw& law) {
  return std::visit(
      [](const auto& l) -> nlohmann::json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, RademacherNoise>) {
          return {{"kind", "rademacher"}, {"flip_prob", l.flip_prob}};
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          return {{"kind", "gaussian"}, {"mean", l.mean}, {"variance", l.variance}};
        } else {
          return {{"kind", "table"}, {"values", l.values}, {"probs", l.probs}};
        }
      },
      law);
}

NoiseLaw noise_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"kind", "flip_prob", "mean", "variance", "values", "probs"},
                      "noise");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rademacher") return RademacherNoise{j.at("flip_prob").get<double>()};
  if (kind == "gaussian")
    return GaussianNoise{j.at("mean").get<double>(), j.at("variance").get<double>()};
  if (kind == "table")
    return TableNoise{j.at("values").get<std::vector<double>>(),
                      j.at("probs").get<std::vector<double>>()};
  throw std::invalid_argument("noise_from_json: unknown kind '" + kind + "'");
}

}  // namespace

nlohmann::json model_to_json(const DataModel& model) {
  nlohmann::json noise = nlohmann::json::array();
  for (const auto& law : model.noise) noise.push_back(noise_to_json(law));
  return {{"n_clusters", model.n_clusters()},
          {"dim", model.dim()},
          {"assignment", model.partition.assignment()},
          {"noise", noise},
          {"target", target_to_json(model.target)}};
}

DataModel model_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"n_clusters", "dim", "assignment", "noise", "target"},
                      "model");
  const int n = j.at("n_clusters").get<int>();
  const int d = j.at("dim").get<int>();
  auto assignment = j.at("assignment").get<std::vector<int>>();
  if (static_cast<int>(assignment.size()) != d)
    throw std::invalid_argument("model_from_json: assignment length != dim");
  ClusterPartition part(n, std::move(assignment));
  std::vector<NoiseLaw> noise;
  for (const auto& nj : j.at("noise")) noise.push_back(noise_from_json(nj));
  return DataModel(std::move(part), std::move(noise),
                   target_from_json(j.at("target")));
}

}  // namespace clusterfeat
