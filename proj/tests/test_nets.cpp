#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "dikl/checkpoint.hpp"
#include "dikl/nets.hpp"
#include "dikl/rng.hpp"
#include "dikl/schedule.hpp"
#include "dikl/tape.hpp"
#include "dikl/tensor.hpp"
#include "test_util.hpp"

using namespace dikl;

TEST_CASE("parameter count follows the architecture") {
  RngStream s(21, 0);
  Mlp net({4, 3, {8, 8}, Activation::kSilu, false}, s);
  // (4*8+8) + (8*8+8) + (8*3+3)
  CHECK(net.param_count() == 40 + 72 + 27);
  CHECK(net.params().size() == 6);
}

TEST_CASE("zeroed net maps everything to zero") {
  RngStream s(22, 0);
  Mlp net({3, 2, {5}, Activation::kSilu, false}, s);
  for (Tensor* p : net.params()) {
    std::fill(p->data(), p->data() + p->size(), 0.0);
  }
  Tensor x = randn(s, {4, 3});
  Tensor y = net.forward(x);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == 0.0);
}

TEST_CASE("taped forward equals the raw forward bitwise") {
  RngStream s(23, 0);
  Mlp net({5, 4, {16, 16}, Activation::kSilu, false}, s);
  Tensor x = randn(s, {7, 5});
  Tensor raw = net.forward(x);
  GradTape tape;
  auto params = net.stage_params(tape);
  Var y = net.forward(tape, tape.constant(x), params);
  CHECK(max_abs_diff(tape.value(y), raw) == 0.0);
}

TEST_CASE("generator rows are independent and particle outputs centered") {
  RngStream s(24, 0);
  GeneratorNet gen(6, 6, {12}, Activation::kSilu, ParticleShape{3, 2}, s);
  Tensor z = randn(s, {5, 6});
  Tensor x = gen.generate(z);
  REQUIRE(x.rows() == 5);
  REQUIRE(x.cols() == 6);

  // Permuting input rows permutes output rows.
  Tensor z_swapped = z;
  for (std::size_t j = 0; j < 6; ++j) {
    std::swap(z_swapped.at(0, j), z_swapped.at(3, j));
  }
  Tensor x_swapped = gen.generate(z_swapped);
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(x_swapped.at(0, j) == x.at(3, j));
    CHECK(x_swapped.at(3, j) == x.at(0, j));
    CHECK(x_swapped.at(1, j) == x.at(1, j));
  }

  // Zero centre of mass per row and spatial dim.
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t j = 0; j < 2; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < 3; ++i) col += x.at(r, i * 2 + j);
      CHECK(std::abs(col) < 1e-12);
    }
  }
}

TEST_CASE("score net starts at zero and is conditioned on t") {
  RngStream s(25, 0);
  NoiseSchedule sched = build_vp_linear(30, 1e-4, 0.7, Weighting::kInvAlpha);
  ScoreNet net(4, {32, 32}, Activation::kSilu, std::nullopt, s);

  Tensor x = randn(s, {3, 4});
  Tensor y1 = net.eval(x, 1, sched);
  // Zero-initialized last layer: the initial score is exactly zero.
  for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == 0.0);

  // Give the last layer signal; different t must now give different output.
  auto params = net.net().params();
  Tensor* last_w = params[params.size() - 2];
  RngStream s2(26, 0);
  for (std::size_t i = 0; i < last_w->size(); ++i) {
    (*last_w)[i] = 0.1 * s2.normal();
  }
  Tensor a = net.eval(x, 3, sched);
  Tensor b = net.eval(x, 27, sched);
  CHECK(max_abs_diff(a, b) > 1e-8);
}

TEST_CASE("particle score net output stays in the zero-CoM subspace") {
  RngStream s(27, 0);
  NoiseSchedule sched = build_vp_linear(10, 1e-3, 0.3, Weighting::kUniform);
  ScoreNet net(8, {16}, Activation::kSilu, ParticleShape{4, 2}, s);
  auto params = net.net().params();
  Tensor* last_w = params[params.size() - 2];
  for (std::size_t i = 0; i < last_w->size(); ++i) (*last_w)[i] = 0.05;
  Tensor x = randn(s, {6, 8});
  Tensor y = net.eval(x, 5, sched);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t j = 0; j < 2; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < 4; ++i) col += y.at(r, i * 2 + j);
      CHECK(std::abs(col) < 1e-12);
    }
  }
}

TEST_CASE("gradient of squared score output wrt parameters matches FD") {
  RngStream s(28, 0);
  NoiseSchedule sched = build_vp_linear(5, 0.05, 0.3, Weighting::kUniform);
  ScoreNet net(2, {6}, Activation::kSilu, std::nullopt, s);
  // Last layer is zero-initialized; fill it so gradients flow everywhere.
  auto raw_params = net.net().params();
  RngStream fill(29, 0);
  Tensor* lw = raw_params[raw_params.size() - 2];
  Tensor* lb = raw_params[raw_params.size() - 1];
  for (std::size_t i = 0; i < lw->size(); ++i) (*lw)[i] = 0.3 * fill.normal();
  for (std::size_t i = 0; i < lb->size(); ++i) (*lb)[i] = 0.1 * fill.normal();

  Tensor x = randn(fill, {3, 2});
  const std::size_t t = 4;

  GradTape tape;
  auto params = net.net().stage_params(tape);
  Var out = net.eval(tape, tape.constant(x), t, sched, params);
  Var loss = tape.sumsq(out);
  tape.backward(loss);

  for (std::size_t k = 0; k < raw_params.size(); ++k) {
    Tensor got = tape.grad(params[k]);
    const Tensor original = *raw_params[k];
    auto f = [&](const Tensor& candidate) {
      *raw_params[k] = candidate;
      Tensor y = net.eval(x, t, sched);
      *raw_params[k] = original;
      return sumsq(y);
    };
    Tensor want = testutil::fd_grad(f, original);
    CHECK(testutil::rel_err(got, want) < 1e-6);
  }
}

TEST_CASE("checkpoint round trip reproduces forwards bit for bit") {
  RngStream s(30, 0);
  NoiseSchedule sched = build_vp_linear(8, 0.01, 0.4, Weighting::kUniform);
  ScoreNet net(3, {10, 10}, Activation::kSilu, std::nullopt, s);
  auto raw_params = net.net().params();
  Tensor* lw = raw_params[raw_params.size() - 2];
  for (std::size_t i = 0; i < lw->size(); ++i) (*lw)[i] = 0.2;

  Tensor x = randn(s, {4, 3});
  Tensor before = net.eval(x, 2, sched);

  auto dir = std::filesystem::temp_directory_path() / "dikl_net_test";
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "score.json", net.net().named_params("score"), {});

  ScoreNet loaded(3, {10, 10}, Activation::kSilu, std::nullopt, s);
  Checkpoint ckpt = load_checkpoint(dir / "score.json");
  std::vector<Tensor> values;
  for (const auto& [name, _] : net.net().named_params("score")) {
    values.push_back(ckpt.tensors.at(name));
  }
  loaded.net().load_params(values);
  Tensor after = loaded.eval(x, 2, sched);
  CHECK(max_abs_diff(before, after) == 0.0);
}
