#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "izf/errors.hpp"
#include "izf/flow/checkpoint.hpp"
#include "izf/flow/flow_model.hpp"
#include "izf/numcore/autograd.hpp"
#include "support/finite_diff.hpp"
#include "support/flow_helpers.hpp"
#include "support/jacobian.hpp"

using namespace izf::flow;
using namespace izf::numcore;
using izf::testing::max_abs_diff;
using izf::testing::random_input;
using izf::testing::randomize;
using izf::testing::row_of;

namespace {

FlowConfig config(std::size_t d_v, std::size_t d_c, std::size_t blocks = 5) {
  FlowConfig c;
  c.d_v = d_v;
  c.d_c = d_c;
  c.n_blocks = blocks;
  return c;
}

std::vector<double> coupling_apply(const CouplingLayer& layer, const std::vector<double>& x) {
  NoGradGuard g;
  auto out = layer.forward(Tensor::from({1, x.size()}, x));
  return std::vector<double>(out.y.data().begin(), out.y.data().end());
}

std::vector<double> flow_apply(const FlowModel& model, const std::vector<double>& x) {
  NoGradGuard g;
  auto z = model.forward(Tensor::from({1, x.size()}, x)).latent.joined();
  return std::vector<double>(z.data().begin(), z.data().end());
}

}  // namespace

TEST_CASE("coupling layer with zero weights is the identity") {
  CouplingLayer layer(4, 2.0, 0.01);
  auto x = Tensor::from({2, 4}, {1, -2, 3, 0.5, 0, 7, -1, 2});
  auto out = layer.forward(x);
  CHECK(max_abs_diff(out.y, x) == 0.0);
  for (double v : out.logdet.data()) CHECK(v == 0.0);
  CHECK(max_abs_diff(layer.inverse(x), x) == 0.0);
}

TEST_CASE("coupling layer hand evaluation with a constant scale") {
  const double clamp = 2.0;
  CouplingLayer layer(2, clamp, 0.01);
  // clamp * tanh(b / clamp) = 0.5
  layer.s_net().b2.mutable_data()[0] = clamp * std::atanh(0.5 / clamp);
  auto out = layer.forward(Tensor::from({1, 2}, {1.0, 2.0}));
  CHECK(out.y.data()[0] == 1.0);
  CHECK(out.y.data()[1] == doctest::Approx(2.0 * std::exp(0.5)).epsilon(1e-14));
  CHECK(out.logdet.item() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("coupling log-det equals log|det J| of the finite-difference Jacobian") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    CouplingLayer layer(4, 2.0, 0.01);
    layer.init_uniform(rng, 1.0);
    auto x = row_of(random_input(1, 4, rng), 0);
    auto jac = izf::testing::numeric_jacobian([&](const auto& v) { return coupling_apply(layer, v); }, x);
    const double oracle = std::log(std::abs(izf::testing::determinant(jac)));
    auto out = layer.forward(Tensor::from({1, 4}, x));
    CHECK(std::abs(out.logdet.item() - oracle) < 1e-5);
  }
}

TEST_CASE("scale output is bounded by the clamp") {
  CouplingLayer layer(4, 1.5, 0.01);
  for (auto& v : layer.s_net().w2.mutable_data()) v = 50.0;
  for (auto& v : layer.s_net().w1.mutable_data()) v = 10.0;
  auto s = layer.clamped_scale(Tensor::from({2, 2}, {3.0, 4.0, -5.0, -6.0}));
  for (double v : s.data()) CHECK(std::abs(v) <= 1.5);
}

TEST_CASE("coupling inverse round trips at d=8 with random weights") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    CouplingLayer layer(8, 2.0, 0.01);
    layer.init_uniform(rng, 1.0);
    auto x = random_input(16, 8, rng, 2.0);
    CHECK(max_abs_diff(layer.inverse(layer.forward(x).y), x) < 1e-9);
    CHECK(max_abs_diff(layer.forward(layer.inverse(x)).y, x) < 1e-9);
  }
}

TEST_CASE("construction rejects invalid widths") {
  CHECK_THROWS_AS(CouplingLayer(3, 2.0, 0.01), izf::ContractError);
  CHECK_THROWS_AS(FlowModel::create(config(5, 2), 1), izf::ContractError);
  CHECK_THROWS_AS(FlowModel::create(config(4, 4), 1), izf::ContractError);
  CHECK_THROWS_AS(PermutationLayer({0, 0, 1}), izf::ContractError);
  auto model = FlowModel::create(config(4, 2), 1);
  CHECK_THROWS_AS(model.forward(Tensor::zeros({2, 6})), izf::DimensionError);
  CHECK_THROWS_AS(model.inverse(Tensor::zeros({2, 3}), Tensor::zeros({2, 2})), izf::DimensionError);
}

TEST_CASE("permutation layer inverse composes to identity") {
  std::mt19937_64 rng(5);
  auto p = PermutationLayer::random(10, rng);
  for (std::size_t i = 0; i < 10; ++i) CHECK(p.inverse_perm()[p.perm()[i]] == i);
  auto x = random_input(3, 10, rng);
  CHECK(max_abs_diff(p.inverse(p.forward(x)), x) == 0.0);
}

TEST_CASE("zero-weight model applies the composed permutation") {
  auto model = FlowModel::zeros(config(6, 2, 3), 17);
  std::mt19937_64 rng(1);
  auto v = random_input(4, 6, rng);
  auto fwd = model.forward(v);
  for (double ld : fwd.logdet.data()) CHECK(ld == 0.0);
  CHECK(fwd.latent.c_hat.cols() == 2);
  CHECK(fwd.latent.z_f.cols() == 4);

  // expected: x <- x[:, perm] per block
  auto expected = v.to_matrix();
  for (const auto& b : model.blocks()) {
    Matrix next(expected.rows, expected.cols);
    for (std::size_t i = 0; i < expected.rows; ++i) {
      for (std::size_t j = 0; j < expected.cols; ++j) next(i, j) = expected(i, b.permutation.perm()[j]);
    }
    expected = next;
  }
  CHECK(fwd.latent.joined().to_matrix() == expected);
  CHECK(max_abs_diff(model.inverse(fwd.latent), v) == 0.0);
}

TEST_CASE("create and zeros share permutations; weights are seed deterministic") {
  auto a = FlowModel::create(config(8, 3), 99);
  auto b = FlowModel::zeros(config(8, 3), 99);
  auto c = FlowModel::create(config(8, 3), 99);
  for (std::size_t i = 0; i < a.blocks().size(); ++i) {
    CHECK(a.blocks()[i].permutation.perm() == b.blocks()[i].permutation.perm());
  }
  CHECK(serialize(a) == serialize(c));
  CHECK(a.blocks()[0].permutation.perm() != a.blocks()[1].permutation.perm());
}

TEST_CASE("total log-det is the sum of block log-dets") {
  std::mt19937_64 rng(3);
  auto model = FlowModel::create(config(8, 3, 4), 7);
  randomize(model, rng, 0.5);
  auto v = random_input(5, 8, rng);
  auto total = model.forward(v).logdet;
  Tensor x = v;
  std::vector<double> acc(5, 0.0);
  for (const auto& b : model.blocks()) {
    auto out = b.coupling.forward(b.permutation.forward(x));
    for (std::size_t i = 0; i < 5; ++i) acc[i] += out.logdet.data()[i];
    x = out.y;
  }
  for (std::size_t i = 0; i < 5; ++i) CHECK(total.data()[i] == doctest::Approx(acc[i]).epsilon(1e-14));
}

TEST_CASE("model log-det matches the finite-difference Jacobian determinant for d_v <= 8") {
  std::mt19937_64 rng(123);
  for (std::size_t d : {2u, 4u, 6u, 8u}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto model = FlowModel::create(config(d, 1), rng());
      randomize(model, rng, 0.6);
      auto x = row_of(random_input(1, d, rng), 0);
      auto jac = izf::testing::numeric_jacobian([&](const auto& v) { return flow_apply(model, v); }, x);
      const double oracle = std::log(std::abs(izf::testing::determinant(jac)));
      CHECK(std::abs(model.forward(Tensor::from({1, d}, x)).logdet.item() - oracle) < 1e-5);
    }
  }
}

TEST_CASE("bijectivity over random weights and inputs") {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (std::size_t d : {4u, 8u}) {
    for (int trial = 0; trial < 1000; ++trial) {
      auto model = FlowModel::create(config(d, d / 2 - (d == 4 ? 1 : 0)), rng());
      randomize(model, rng, 1.0);
      auto v = random_input(1, d, rng, 1.5);
      auto fwd = model.forward(v);
      worst = std::max(worst, max_abs_diff(model.inverse(fwd.latent), v));
      auto z = random_input(1, d, rng);
      auto latent = LatentCode::split(z, model.d_c());
      worst = std::max(worst, max_abs_diff(model.forward(model.inverse(latent)).latent.joined(), z));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("conditional generation reproduces its condition") {
  std::mt19937_64 rng(8);
  auto model = FlowModel::create(config(8, 3), 4);
  randomize(model, rng, 0.8);
  auto c = Tensor::from({1, 3}, {0.2, -1.0, 0.7});
  Matrix cs(200, 3);
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t j = 0; j < 3; ++j) cs(i, j) = c.data()[j];
  }
  auto samples = model.inverse(Tensor::from_matrix(cs), random_input(200, 5, rng));
  auto c_hat = model.forward(samples).latent.c_hat;
  CHECK(max_abs_diff(c_hat, Tensor::from_matrix(cs)) < 1e-9);
}

TEST_CASE("standard-normal density integrates to one on a 2-D grid") {
  std::mt19937_64 rng(2);
  auto model = FlowModel::create(config(2, 1), 5);
  randomize(model, rng, 0.7);
  const double lo = -10.0, hi = 10.0, step = 0.02;
  const std::size_t n = static_cast<std::size_t>((hi - lo) / step);
  Matrix grid(n * n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      grid(i * n + j, 0) = lo + (i + 0.5) * step;
      grid(i * n + j, 1) = lo + (j + 0.5) * step;
    }
  }
  NoGradGuard g;
  auto lp = model.log_prob(Tensor::from_matrix(grid));
  double mass = 0.0;
  for (double v : lp.data()) mass += std::exp(v) * step * step;
  CHECK(mass == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("extra permutation layers leave the density unchanged when couplings are zero") {
  std::mt19937_64 rng(21);
  auto base = FlowModel::zeros(config(6, 2, 2), 3);
  std::vector<FlowBlock> blocks = base.blocks();
  blocks.insert(blocks.begin() + 1, FlowBlock{PermutationLayer::random(6, rng), CouplingLayer(6, 2.0, 0.01)});
  auto cfg = base.config();
  cfg.n_blocks = 3;
  FlowModel extended(cfg, blocks);
  auto v = random_input(50, 6, rng);
  CHECK(max_abs_diff(base.log_prob(v), extended.log_prob(v)) < 1e-12);
}

TEST_CASE("log-det gradient with respect to all parameters matches finite differences") {
  std::mt19937_64 rng(31);
  auto model = FlowModel::create(config(4, 2, 2), 6);
  randomize(model, rng, 0.7);
  auto v = random_input(3, 4, rng);
  auto res = izf::testing::check_gradients(model.parameters(), [&] { return sum(model.forward(v).logdet); });
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("non-finite values raise a numeric error naming the block") {
  auto model = FlowModel::zeros(config(4, 2, 2), 1);
  for (auto& w : model.blocks()[1].coupling.t_net().w1.mutable_data()) w = 1e300;
  for (auto& w : model.blocks()[1].coupling.t_net().w2.mutable_data()) w = 1e300;
  try {
    model.forward(Tensor::from({1, 4}, {1e10, 1e10, 1e10, 1e10}));
    FAIL("expected a numeric error");
  } catch (const izf::NumericError& e) {
    CHECK(std::string(e.what()).find("block 1") != std::string::npos);
  }
}

TEST_CASE("checkpoint round trip reproduces forward outputs bit-exactly") {
  std::mt19937_64 rng(10);
  auto model = FlowModel::create(config(8, 3, 3), 12);
  randomize(model, rng, 0.9);
  auto path = std::filesystem::temp_directory_path() / "izf_test_checkpoint.bin";
  save_checkpoint(model, path);
  auto loaded = load_checkpoint(path);
  auto v = random_input(10, 8, rng);
  CHECK(max_abs_diff(model.forward(v).latent.joined(), loaded.forward(v).latent.joined()) == 0.0);
  CHECK(serialize(loaded) == serialize(model));
  CHECK(loaded.config().s_clamp == model.config().s_clamp);

  auto bytes = serialize(model);
  bytes[0] = 'X';
  CHECK_THROWS_AS(deserialize(bytes), izf::LoadError);
  auto truncated = serialize(model);
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(deserialize(truncated), izf::LoadError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.bin"), izf::LoadError);
  std::filesystem::remove(path);
}
