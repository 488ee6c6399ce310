#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dikl/schedule.hpp"
#include "dikl/tape.hpp"
#include "dikl/tensor.hpp"

namespace dikl {

class RngStream;

enum class Activation { kSilu, kRelu };

// Instrumentation for the one-shot sampling claim: counts raw (untaped)
// forward passes since the last reset. A batched call counts once however
// many rows it carries.
std::uint64_t forward_pass_count();
void reset_forward_pass_count();

struct MlpConfig {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<std::size_t> hidden;
  Activation act = Activation::kSilu;
  bool zero_init_last = false;
};

// Plain fully connected net. Parameters are owned tensors in
// W0, b0, W1, b1, ... order; both a raw forward pass and a taped forward
// pass (for gradients) are provided and compute identical values.
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpConfig cfg, RngStream& stream);

  Tensor forward(const Tensor& x) const;

  // Records the forward pass on the tape. `params` must come from
  // stage_params on the same tape.
  Var forward(GradTape& tape, Var x, const std::vector<Var>& params) const;
  std::vector<Var> stage_params(GradTape& tape, bool requires_grad = true) const;

  // After tape.backward, gradients of staged params in parameter order.
  std::vector<Tensor> collect_grads(const GradTape& tape,
                                    const std::vector<Var>& params) const;

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;
  std::size_t param_count() const;
  const MlpConfig& config() const { return cfg_; }

  // Checkpoint plumbing: tensors are named <prefix>.w0, <prefix>.b0, ...
  std::vector<std::pair<std::string, const Tensor*>> named_params(
      const std::string& prefix) const;
  void load_params(const std::vector<Tensor>& values);

 private:
  MlpConfig cfg_;
  std::vector<Tensor> weights_, biases_;
};

// One-step generator x = g(z). For particle targets the output is
// zero-center projected, making the pushforward translation invariant.
class GeneratorNet {
 public:
  GeneratorNet() = default;
  GeneratorNet(std::size_t latent_dim, std::size_t out_dim,
               std::vector<std::size_t> hidden, Activation act,
               std::optional<ParticleShape> particles, RngStream& stream);

  Tensor generate(const Tensor& z) const;
  Var generate(GradTape& tape, Var z, const std::vector<Var>& params) const;

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  std::size_t latent_dim() const { return latent_; }
  std::size_t out_dim() const { return net_.config().out; }
  std::optional<ParticleShape> particles() const { return particles_; }

 private:
  Mlp net_;
  std::size_t latent_ = 0;
  std::optional<ParticleShape> particles_;
};

// Time-conditioned score model s(x_t, t). The step index is injected as a
// sinusoidal embedding of t/T concatenated to x_t.
class ScoreNet {
 public:
  static constexpr std::size_t kTimeEmbedDim = 64;

  ScoreNet() = default;
  ScoreNet(std::size_t data_dim, std::vector<std::size_t> hidden,
           Activation act, std::optional<ParticleShape> particles,
           RngStream& stream);

  Tensor time_embedding(std::size_t t, std::size_t T) const;

  Tensor eval(const Tensor& x_t, std::size_t t,
              const NoiseSchedule& sched) const;
  // Taped forward; x_t enters as a tape var so downstream losses can be
  // differentiated w.r.t. x_t as well as the parameters.
  Var eval(GradTape& tape, Var x_t, std::size_t t, const NoiseSchedule& sched,
           const std::vector<Var>& params) const;

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  std::size_t data_dim() const { return data_dim_; }
  std::optional<ParticleShape> particles() const { return particles_; }

 private:
  Mlp net_;
  std::size_t data_dim_ = 0;
  std::optional<ParticleShape> particles_;
};

}  // namespace dikl
