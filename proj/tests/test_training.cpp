#include "doctest.h"

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "clusterfeat/training.hpp"
#include "oracles.hpp"

using namespace clusterfeat;

namespace {

TwoLayerNet random_net(int hidden, int dim, const Activation& act, Rng& rng) {
  TwoLayerNet net = init_layerwise(hidden, dim, 0.3, act, rng);
  for (int h = 0; h < hidden; ++h) {
    net.a(h) = rng.normal(0.0, 0.5);
    net.b(h) = rng.normal(0.0, 0.5);
  }
  return net;
}

Batch small_batch(const DataModel& model, int size, std::uint64_t seed) {
  Rng rng(seed);
  return sample_batch(model, size, rng);
}

double batch_loss(const TwoLayerNet& net, const Batch& batch) {
  const Eigen::VectorXd pred = forward(net, batch.x);
  return 0.5 * (batch.y - pred).squaredNorm() / batch.size();
}

}  // namespace

TEST_CASE("analytic gradients match central differences") {
  const auto model = make_bsc_model(2, 6, 0.2, BooleanFunction::parity(2));
  const Batch batch = small_batch(model, 16, 81);
  const double h = 1e-5;
  int net_id = 0;
  for (const Activation& act :
       {Activation::relu(), Activation::truncated_exp(4)}) {
    Rng rng(90 + net_id++);
    TwoLayerNet net = random_net(5, 6, act, rng);
    const GradientValue g = loss_gradients(net, batch);
    CHECK(g.loss == doctest::Approx(batch_loss(net, batch)).epsilon(1e-12));

    for (int r = 0; r < net.hidden(); ++r)
      for (int c = 0; c < net.dim(); ++c) {
        TwoLayerNet plus = net, minus = net;
        plus.w(r, c) += h;
        minus.w(r, c) -= h;
        const double fd = (batch_loss(plus, batch) - batch_loss(minus, batch)) / (2 * h);
        CHECK(g.w(r, c) == doctest::Approx(fd).epsilon(1e-5));
      }
    for (int r = 0; r < net.hidden(); ++r) {
      TwoLayerNet ap = net, am = net, bp = net, bm = net;
      ap.a(r) += h;
      am.a(r) -= h;
      bp.b(r) += h;
      bm.b(r) -= h;
      CHECK(g.a(r) == doctest::Approx((batch_loss(ap, batch) - batch_loss(am, batch)) / (2 * h))
                          .epsilon(1e-5));
      CHECK(g.b(r) == doctest::Approx((batch_loss(bp, batch) - batch_loss(bm, batch)) / (2 * h))
                          .epsilon(1e-5));
    }
  }
}

TEST_CASE("hidden_features is the activation of affine maps") {
  Rng rng(91);
  const auto act = Activation::truncated_exp(3);
  const TwoLayerNet net = random_net(4, 5, act, rng);
  Eigen::MatrixXd x(3, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) x(i, j) = rng.normal();
  const Eigen::MatrixXd phi = hidden_features(net, x);
  REQUIRE(phi.rows() == 3);
  REQUIRE(phi.cols() == 4);
  for (int i = 0; i < 3; ++i)
    for (int h = 0; h < 4; ++h) {
      const double z = net.w.row(h).dot(x.row(i)) + net.b(h);
      CHECK(phi(i, h) == doctest::Approx(act.value(z)).epsilon(1e-14));
    }
}

TEST_CASE("evaluate reports sign accuracy only for sign targets") {
  Rng rng(92);
  const auto model = make_bsc_model(2, 6, 0.2, BooleanFunction::parity(2));
  const TwoLayerNet net = random_net(4, 6, Activation::relu(), rng);
  Rng eval_rng(93);
  const TracePoint p = evaluate(net, model, 500, 123, eval_rng);
  CHECK(p.samples == 123);
  CHECK(p.mse >= 0.0);
  CHECK(p.abs_err >= 0.0);
  CHECK(p.accuracy >= 0.0);
  CHECK(p.accuracy <= 1.0);

  // Real-valued targets have no sign accuracy to report.
  const auto soft = make_bsc_model(2, 6, 0.2, BooleanFunction(2, {0.5, 1.0, -0.25, 0.0}));
  Rng eval_rng2(94);
  const TracePoint q = evaluate(net, soft, 200, 0, eval_rng2);
  CHECK(std::isnan(q.accuracy));
}

TEST_CASE("phase 1 moves only the first layer") {
  Rng rng(95);
  const auto model = make_bsc_model(2, 8, 0.1, BooleanFunction::parity(2));
  TwoLayerNet net = init_layerwise(6, 8, 0.2, Activation::truncated_exp(3), rng);
  const Eigen::VectorXd a0 = net.a, b0 = net.b;
  const Eigen::MatrixXd w0 = net.w;
  Rng data(96);
  phase1_train(net, model, 3, 32, 0.05, data);
  CHECK((net.a - a0).norm() == 0.0);
  CHECK((net.b - b0).norm() == 0.0);
  CHECK((net.w - w0).norm() > 0.0);
}

TEST_CASE("phase 2 approaches the least-squares optimum") {
  Rng rng(97);
  const auto model = make_bsc_model(2, 8, 0.1, BooleanFunction::parity(2));
  const auto act = Activation::truncated_exp(4);
  TwoLayerNet net = init_layerwise(12, 8, 0.2, act, rng);

  Phase2Settings cfg;
  cfg.steps = 4000;
  cfg.batch = 32;
  cfg.bias_range = 1.0;
  cfg.eval.period_steps = 1000;
  cfg.eval.samples = 500;
  Rng bias(98), data(99), eval(100);
  const TrainTrace trace = phase2_train(net, model, cfg, bias, data, eval);
  CHECK_FALSE(trace.diverged);
  // Automatic learning-rate selection burns one probe batch up front.
  CHECK(trace.samples_used == 4000 * 32 + cfg.batch);

  // The frozen-feature problem is convex; compare against normal equations
  // on an independent large sample.
  Rng check(101);
  const Batch sample = sample_batch(model, 4000, check);
  const Eigen::MatrixXd phi = hidden_features(net, sample.x);
  const Eigen::VectorXd a_star = oracles::normal_equations(phi, sample.y);
  const double sgd_loss = (sample.y - phi * net.a).squaredNorm() / sample.size();
  const double opt_loss = (sample.y - phi * a_star).squaredNorm() / sample.size();
  CHECK(sgd_loss <= opt_loss + 0.05);
}

TEST_CASE("phase 2 flags divergence instead of throwing") {
  Rng rng(102);
  const auto model = make_bsc_model(2, 8, 0.1, BooleanFunction::parity(2));
  TwoLayerNet net = init_layerwise(8, 8, 0.2, Activation::truncated_exp(4), rng);
  Phase2Settings cfg;
  cfg.steps = 500;
  cfg.batch = 8;
  cfg.lr = 1e6;  // guaranteed blow-up
  cfg.bias_range = 1.0;
  Rng bias(103), data(104), eval(105);
  const TrainTrace trace = phase2_train(net, model, cfg, bias, data, eval);
  CHECK(trace.diverged);
}

TEST_CASE("layerwise defaults follow the model statistics") {
  const auto model = make_bsc_model(3, 300, 0.1, BooleanFunction::parity(3));
  const auto stats = signal_stats(model);
  LayerwiseConfig cfg;
  const LayerwiseConfig full = resolve_defaults(cfg, model, Activation::relu());
  CHECK(full.tau == doctest::Approx(std::sqrt(stats.v_sum) /
                                    (std::sqrt(300.0) * std::log(300.0))));
  CHECK(full.gamma1 == doctest::Approx(1.0 / std::sqrt(stats.v_sum)));
  const double expected_batch =
      std::ceil(3.0 * std::pow(std::log(300.0 * std::log(100.0)), 2.0) * 300.0 /
                stats.v_sum);
  CHECK(full.batch == static_cast<int>(expected_batch));
  // The bias half-range depends on the realized first-layer rows, so it is
  // resolved inside layerwise_train, not here.
  CHECK(full.bias_range == -1.0);

  // Explicit values pass through untouched.
  LayerwiseConfig manual;
  manual.tau = 0.05;
  manual.batch = 17;
  const LayerwiseConfig kept = resolve_defaults(manual, model, Activation::relu());
  CHECK(kept.tau == 0.05);
  CHECK(kept.batch == 17);
}

TEST_CASE("joint training is deterministic and tracks sample usage") {
  const auto model = make_bsc_model(2, 8, 0.1, BooleanFunction::dictator(2));
  JointConfig cfg;
  cfg.hidden = 16;
  cfg.batch = 16;
  cfg.max_samples = 16 * 40;
  cfg.eval.period_steps = 10;
  cfg.eval.samples = 200;
  Rng r1(107), r2(107);
  const TrainResult a = joint_sgd_train(model, Activation::relu(), cfg, r1);
  const TrainResult b = joint_sgd_train(model, Activation::relu(), cfg, r2);
  CHECK((a.net.w - b.net.w).norm() == 0.0);
  CHECK((a.net.a - b.net.a).norm() == 0.0);
  CHECK(a.trace.samples_used == 16 * 40);
  REQUIRE(!a.trace.points.empty());
  for (const auto& p : a.trace.points) CHECK(p.samples <= cfg.max_samples);
}

TEST_CASE("evaluation cadence does not disturb the training stream") {
  const auto model = make_bsc_model(2, 8, 0.1, BooleanFunction::parity(2));
  JointConfig sparse_eval;
  sparse_eval.hidden = 8;
  sparse_eval.batch = 8;
  sparse_eval.max_samples = 8 * 30;
  sparse_eval.eval.period_steps = 30;
  sparse_eval.eval.samples = 100;
  JointConfig dense_eval = sparse_eval;
  dense_eval.eval.period_steps = 5;

  Rng r1(108), r2(108);
  const TrainResult a = joint_sgd_train(model, Activation::relu(), sparse_eval, r1);
  const TrainResult b = joint_sgd_train(model, Activation::relu(), dense_eval, r2);
  // Evaluating more often must not change what is learned.
  CHECK((a.net.w - b.net.w).norm() == 0.0);
  CHECK((a.net.a - b.net.a).norm() == 0.0);
  CHECK((a.net.b - b.net.b).norm() == 0.0);
  CHECK(b.trace.points.size() > a.trace.points.size());
}

TEST_CASE("layerwise trainer runs and improves on its start") {
  const auto model = make_bsc_model(2, 16, 0.05, BooleanFunction::dictator(2));
  LayerwiseConfig cfg;
  cfg.hidden = 32;
  cfg.t2 = 1500;
  cfg.batch = 64;
  cfg.eval.period_steps = 500;
  cfg.eval.samples = 400;
  Rng rng(109);
  const TrainResult res = layerwise_train(model, Activation::relu(), cfg, rng);
  CHECK_FALSE(res.trace.diverged);
  REQUIRE(res.trace.points.size() >= 2);
  CHECK(res.trace.points.back().mse < res.trace.points.front().mse);
  CHECK(res.trace.samples_used > 0);
}

TEST_CASE("samples_to_threshold reaches easy targets and censors impossible ones") {
  const auto model = make_bsc_model(2, 8, 0.05, BooleanFunction::dictator(2));
  JointConfig cfg;
  cfg.hidden = 32;
  cfg.batch = 16;
  cfg.max_samples = 16 * 600;
  cfg.eval.period_steps = 25;
  cfg.eval.samples = 400;

  Rng r1(110);
  const ThresholdResult easy = samples_to_threshold(model, Activation::relu(), cfg, 10.0, r1);
  CHECK(easy.reached);
  CHECK_FALSE(easy.censored);
  CHECK(easy.samples >= 0);

  Rng r2(111);
  const ThresholdResult hard = samples_to_threshold(model, Activation::relu(), cfg, 0.0, r2);
  CHECK_FALSE(hard.reached);
  CHECK(hard.censored);
  CHECK(hard.samples == -1);
}

TEST_CASE("trace serialization") {
  TrainTrace trace;
  trace.points.push_back({0, 1.5, 1.0, 0.5});
  trace.points.push_back({64, 0.75, 0.5, 0.75});
  trace.samples_used = 64;
  const std::string csv = trace_to_csv(trace);
  CHECK(csv.find("samples,mse,abs_err,accuracy") == 0);
  CHECK(csv.find("64,0.75,0.5,0.75") != std::string::npos);

  const auto j = trace_to_json(trace, 42, "deadbeefdeadbeef");
  CHECK(j.at("seed").get<std::uint64_t>() == 42);
  CHECK(j.at("config_hash").get<std::string>() == "deadbeefdeadbeef");
  CHECK(j.at("points").size() == 2);
  CHECK(j.at("samples_used").get<std::int64_t>() == 64);
  CHECK_FALSE(j.at("diverged").get<bool>());
}
