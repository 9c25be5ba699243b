#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "izf/data/preprocess.hpp"
#include "izf/errors.hpp"
#include "izf/flow/checkpoint.hpp"
#include "izf/numcore/autograd.hpp"
#include "izf/numcore/ops.hpp"
#include "izf/trainer/trainer.hpp"

using namespace izf;
using namespace izf::trainer;
using numcore::Tensor;

namespace {

flow::FlowModel toy_model(std::uint64_t seed = 3) {
  flow::FlowConfig fc;
  fc.d_v = 4;
  fc.d_c = 2;
  return flow::FlowModel::create(fc, seed);
}

std::vector<double> flat_parameters(const flow::FlowModel& m) {
  std::vector<double> out;
  for (const auto& p : m.parameters()) out.insert(out.end(), p.data().begin(), p.data().end());
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("Adam: zero gradient leaves the parameter unchanged") {
  auto w = Tensor::from({1, 3}, {0.5, -1.0, 2.0}, true);
  NamedParameters params{{"w", w}};
  AdamState state(params);
  w.mutable_grad();  // allocate zeros
  for (int i = 0; i < 5; ++i) state.step(params, {});
  CHECK(w.data()[0] == 0.5);
  CHECK(w.data()[1] == -1.0);
  CHECK(w.data()[2] == 2.0);
  CHECK(state.step_count() == 5);
}

TEST_CASE("Adam: constant unit gradient moves the first step by about -lr") {
  auto w = Tensor::scalar(0.0, true);
  NamedParameters params{{"w", w}};
  AdamState state(params);
  AdamSettings s;
  s.learning_rate = 0.1;
  w.mutable_grad()[0] = 1.0;
  state.step(params, s);
  CHECK(w.item() == doctest::Approx(-0.1).epsilon(1e-6));
  // with a constant gradient every bias-corrected step has the same size
  for (int i = 0; i < 9; ++i) state.step(params, s);
  CHECK(w.item() == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(state.first_moment()[0][0] == doctest::Approx(1.0 - std::pow(0.9, 10)));
}

TEST_CASE("Adam: non-finite gradient aborts the step and names the parameter") {
  auto a = Tensor::from({1, 2}, {1.0, 2.0}, true);
  auto b = Tensor::from({1, 2}, {3.0, 4.0}, true);
  NamedParameters params{{"block0.s_net.w1", a}, {"block0.t_net.b2", b}};
  AdamState state(params);
  a.mutable_grad()[0] = 1.0;
  b.mutable_grad()[1] = std::nan("");
  CHECK_THROWS_WITH_AS(state.step(params, {}), doctest::Contains("block0.t_net.b2[1]"), izf::NumericError);
  CHECK(a.data()[0] == 1.0);
  CHECK(state.step_count() == 0);
}

TEST_CASE("global-norm clipping rescales only above the threshold") {
  auto a = Tensor::from({1, 2}, {0.0, 0.0}, true);
  NamedParameters params{{"a", a}};
  a.mutable_grad()[0] = 30.0;
  a.mutable_grad()[1] = 40.0;
  CHECK(clip_grad_norm(params, 10.0) == doctest::Approx(50.0));
  CHECK(a.grad()[0] == doctest::Approx(6.0));
  CHECK(a.grad()[1] == doctest::Approx(8.0));
  CHECK(clip_grad_norm(params, 100.0) == doctest::Approx(10.0));
  CHECK(a.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("ablation switches only mask or negate loss weights") {
  TrainConfig c;
  CHECK(effective_weights(c) == losses::LossWeights{2.0, 1.0, 0.1});
  c.ablation = Ablation::no_lc;
  CHECK(effective_weights(c) == losses::LossWeights{2.0, 0.0, 0.1});
  c.ablation = Ablation::no_immd;
  CHECK(effective_weights(c) == losses::LossWeights{2.0, 1.0, 0.0});
  c.ablation = Ablation::no_lc_no_immd;
  CHECK(effective_weights(c) == losses::LossWeights{2.0, 0.0, 0.0});
  c.ablation = Ablation::positive_mmd;
  CHECK(effective_weights(c) == losses::LossWeights{2.0, 1.0, -0.1});
  for (auto a : {Ablation::none, Ablation::no_lc, Ablation::no_immd, Ablation::no_lc_no_immd, Ablation::positive_mmd}) {
    CHECK(ablation_from_string(to_string(a)) == a);
  }
  CHECK_THROWS_AS(ablation_from_string("bogus"), izf::ConfigError);
}

TEST_CASE("defaults follow the reported optimizer settings") {
  TrainConfig c;
  CHECK(c.learning_rate == 5e-4);
  CHECK(c.batch_size == 256);
  CHECK(c.adam_beta1 == 0.9);
  CHECK(c.adam_beta2 == 0.999);
  CHECK(c.adam_eps == 1e-8);
  CHECK(c.epochs == 40);
  CHECK(c.kernel.kind == losses::KernelKind::inverse_multiquadratic);
}

TEST_CASE("ablation runs match runs with the corresponding weights set by hand") {
  auto ds = data::toy_generate(60, 2);
  TrainConfig base;
  base.batch_size = 32;
  base.epochs = 3;
  base.seed = 5;

  struct Pair {
    Ablation ablation;
    losses::LossWeights manual;
  };
  for (auto [ablation, manual] : {Pair{Ablation::no_lc_no_immd, {2.0, 0.0, 0.0}},
                                  Pair{Ablation::positive_mmd, {2.0, 1.0, -0.1}},
                                  Pair{Ablation::no_lc, {2.0, 0.0, 0.1}}}) {
    auto m1 = toy_model();
    auto m2 = toy_model();
    auto a = base;
    a.ablation = ablation;
    auto b = base;
    b.weights = manual;
    fit(m1, ds, a);
    fit(m2, ds, b);
    CHECK(flat_parameters(m1) == flat_parameters(m2));
  }
}

TEST_CASE("with only the flow term active the centralizing and MMD weights carry no gradient") {
  // the total with lambda2 = lambda3 = 0 has the same gradient as L_Flow scaled by lambda1
  auto ds = data::toy_generate(20, 4);
  auto td = TrainingData::from(ds);
  auto model = toy_model();
  const auto v = Tensor::from_matrix(td.seen_features);
  const auto c = Tensor::from_matrix(td.seen_sample_embeddings);
  const auto params = model.named_parameters();

  TrainConfig cfg;
  cfg.ablation = Ablation::no_lc_no_immd;
  const auto w = effective_weights(cfg);
  auto l_flow = losses::loss_flow(model, v, c);
  auto l_c = losses::loss_centralize(model, Tensor::from_matrix(td.seen_class_embeddings),
                                     Tensor::from_matrix(td.seen_class_means));
  zero_grad(params);
  numcore::backward(losses::loss_total(w, l_flow, l_c, Tensor::scalar(0.0)));
  std::vector<std::vector<double>> masked;
  for (const auto& [n, t] : params) masked.push_back(t.grad());

  zero_grad(params);
  numcore::backward(numcore::scale(losses::loss_flow(model, v, c), 2.0));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto g = params[i].second.grad();
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(masked[i][j] == doctest::Approx(g[j]).epsilon(1e-12));
  }
}

TEST_CASE("equal seeds give bit-identical parameters after 10 epochs") {
  auto ds = data::toy_generate(80, 1);
  TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.epochs = 10;
  cfg.seed = 11;
  auto m1 = toy_model(8);
  auto m2 = toy_model(8);
  auto r1 = fit(m1, ds, cfg);
  auto r2 = fit(m2, ds, cfg);
  CHECK(flow::serialize(m1) == flow::serialize(m2));
  REQUIRE(r1.size() == 10);
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].total == r2[i].total);

  auto m3 = toy_model(8);
  cfg.seed = 12;
  fit(m3, ds, cfg);
  CHECK_FALSE(flow::serialize(m1) == flow::serialize(m3));
}

TEST_CASE("toy training decreases L_Flow over the first 20 epochs") {
  auto ds = data::toy_generate(500, 1);
  TrainConfig cfg;
  cfg.epochs = 20;
  auto model = toy_model();
  auto reports = fit(model, ds, cfg);
  // 3-epoch moving average must fall monotonically
  std::vector<double> avg;
  for (std::size_t i = 2; i < reports.size(); ++i) {
    avg.push_back((reports[i].l_flow + reports[i - 1].l_flow + reports[i - 2].l_flow) / 3.0);
  }
  for (std::size_t i = 1; i < avg.size(); ++i) CHECK(avg[i] < avg[i - 1]);
  CHECK(reports.back().l_flow < reports.front().l_flow);
}

TEST_CASE("trailing short batch is dropped") {
  auto ds = data::toy_generate(100, 1);  // 240 train_seen samples
  auto td = TrainingData::from(ds);
  REQUIRE(td.size() == 240);
  TrainConfig cfg;
  cfg.batch_size = 100;
  auto model = toy_model();
  TrainState state(model, 0);
  auto r = train_epoch(model, td, cfg, state);
  CHECK(r.batches == 2);
  CHECK(state.adam.step_count() == 2);
  CHECK(r.epoch == 1);
  CHECK(train_epoch(model, td, cfg, state).epoch == 2);
}

TEST_CASE("numeric failure reports the epoch and batch") {
  auto ds = data::toy_generate(40, 1);
  auto td = TrainingData::from(ds);
  td.seen_features(3, 0) = 1e308;
  TrainConfig cfg;
  cfg.batch_size = 96;
  auto model = toy_model();
  TrainState state(model, 0);
  try {
    train_epoch(model, td, cfg, state);
    FAIL("expected a numeric error");
  } catch (const izf::NumericError& e) {
    CHECK(std::string(e.what()).find("epoch 1 batch 0") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  TrainConfig c;
  validate(c);
  c.batch_size = 1;
  CHECK_THROWS_AS(validate(c), izf::ConfigError);
  c = {};
  c.learning_rate = -1;
  CHECK_THROWS_AS(validate(c), izf::ConfigError);
  c = {};
  c.adam_beta2 = 1.0;
  CHECK_THROWS_AS(validate(c), izf::ConfigError);
  c = {};
  c.kernel = losses::KernelSpec::gaussian(-1.0);
  CHECK_THROWS_AS(validate(c), izf::ConfigError);
}

TEST_CASE("epoch log is append-only CSV with a single header") {
  auto path = std::filesystem::temp_directory_path() / "izf_epoch_log_test.csv";
  std::filesystem::remove(path);
  EpochReport r;
  r.epoch = 1;
  r.l_flow = 1.5;
  r.l_c = 0.25;
  r.l_immd = -0.125;
  r.total = 3.2375;
  r.wall_seconds = 0.5;
  {
    EpochLog log(path, false);
    log.append(r);
  }
  {
    EpochLog log(path, false);
    r.epoch = 2;
    log.append(r);
  }
  CHECK(slurp(path) == "epoch,l_flow,l_c,l_immd,total,wall_seconds\n"
                       "1,1.5,0.25,-0.125,3.2375,0\n"
                       "2,1.5,0.25,-0.125,3.2375,0\n");
}
