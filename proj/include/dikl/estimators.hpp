#pragma once

#include <cstddef>

#include "dikl/nets.hpp"
#include "dikl/schedule.hpp"
#include "dikl/tape.hpp"
#include "dikl/targets.hpp"
#include "dikl/tensor.hpp"

namespace dikl {

class RngStream;

enum class ScoreIdentity { kDsi, kTsi, kMsi };

// Monte Carlo estimate of the noisy target score at one noised point x_t,
// formed from K denoising-posterior samples.
struct NoisyScoreEstimate {
  Tensor value;  // rank-1, same dim as x_t
  ScoreIdentity kind = ScoreIdentity::kMsi;
  std::size_t count = 0;  // K
};

// Data-based identity: d = mean_k (a_t x_k - x_t) / s_t^2.
NoisyScoreEstimate dsi_estimate(const NoiseSchedule& sched, std::size_t t,
                                const Tensor& x_t, const Tensor& samples);

// Target-based identity: d = (1/a_t) mean_k grad log p_d(x_k), the target
// score being -grad E. The second form takes precomputed score rows (as
// returned by sample_posterior) to avoid re-evaluating the energy.
NoisyScoreEstimate tsi_estimate(const EnergyTarget& target,
                                const NoiseSchedule& sched, std::size_t t,
                                const Tensor& x_t, const Tensor& samples);
NoisyScoreEstimate tsi_from_scores(const NoiseSchedule& sched, std::size_t t,
                                   const Tensor& x_t, const Tensor& scores);

// Mixed identity: d = mean_k (a_t (x_k + grad log p_d(x_k)) - x_t).
// Algebraically a_t^2 TSI + (1 - a_t^2) DSI on the same sample set.
NoisyScoreEstimate msi_estimate(const EnergyTarget& target,
                                const NoiseSchedule& sched, std::size_t t,
                                const Tensor& x_t, const Tensor& samples);
NoisyScoreEstimate msi_from_scores(const NoiseSchedule& sched, std::size_t t,
                                   const Tensor& x_t, const Tensor& samples,
                                   const Tensor& scores);

// Denoising score matching loss for one batch of clean model samples x.
// Draw order from `stream`: one t via below(T) (then + 1), then one standard
// normal per entry of x, row-major. x_t = a_t x + s_t eps, and the recorded
// loss is mean over the batch of ||s_phi(x_t) - (a_t x - x_t)/s_t^2||^2,
// differentiable in the staged score-net parameters.
Var dsm_loss(GradTape& tape, const ScoreNet& net, const std::vector<Var>& params,
             const NoiseSchedule& sched, const Tensor& x, RngStream& stream);

// The regression core of dsm_loss: mean over rows of ||s - target||^2 with
// the target held constant.
Var dsm_residual_loss(GradTape& tape, Var s, const Tensor& target);

// l = (weight / B) * sum_i diff_i . x_i with diff detached, so the only
// gradient path is through x. This is the shared VJP trick behind both
// surrogate losses below.
Var score_difference_surrogate(GradTape& tape, const Tensor& diff, Var x,
                               double weight);

// Surrogate for the diffusive-KL generator update at noise level t:
// diff = s_phi(x_t) - d_p, weight w(t), batch-averaged. The score net is
// evaluated raw (never taped); x_t must be tape-connected to the generator
// parameters. d_p rows are the per-element noisy-score estimates.
Var dikl_surrogate(GradTape& tape, const ScoreNet& net,
                   const NoiseSchedule& sched, std::size_t t, Var x_t,
                   const Tensor& d_p);

// Surrogate for the reverse-KL baseline on clean samples:
// diff = s_phi(x) - grad log p_d(x), weight 1. `clean_sched` is the
// single-step, near-zero-noise ladder the clean score net was trained on.
Var rkl_surrogate(GradTape& tape, const ScoreNet& clean_net,
                  const NoiseSchedule& clean_sched, const EnergyTarget& target,
                  Var x);

// The ladder used for the clean score net: T = 1, sigma = 1e-2 exactly.
NoiseSchedule build_clean_score_schedule();

}  // namespace dikl
