#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dikl/schedule.hpp"
#include "dikl/targets.hpp"
#include "dikl/tensor.hpp"

namespace dikl {

class RngStream;

// The denoising posterior p(x | x_t) of one noised observation:
// log density (up to a constant) = -beta E(x) - ||a_t x - x_t||^2 / (2 s_t^2).
// beta = 1 is the actual posterior; beta < 1 appears on the annealing path.
struct PosteriorProblem {
  const EnergyTarget* target = nullptr;
  const NoiseSchedule* sched = nullptr;
  Tensor x_t;  // rank-1, one noised configuration
  std::size_t t = 0;
  double beta = 1.0;

  PosteriorProblem with_beta(double b) const;

  double log_density(std::span<const double> x) const;
  // Returns log density and writes the posterior score (zero-center
  // projected for particle targets).
  double log_density_and_score(std::span<const double> x,
                               std::span<double> out) const;
};

// Posterior score -grad E(x) - a_t (a_t x - x_t) / s_t^2 at beta = 1.
Tensor posterior_score(const PosteriorProblem& prob, const Tensor& x);

// Hook for coupled-noise testing: applied to every standard normal vector a
// sampler draws (proposal noise, momenta, IS proposals), before any
// zero-center projection. Identity when empty. Uniform and categorical draws
// are never touched, so two runs that share a stream stay aligned.
struct SamplerOptions {
  std::function<void(Tensor&)> noise_map;
};

struct ChainState {
  Tensor x;
  double logp = 0.0;
  Tensor score;  // posterior score at x
  double step = 0.0;
  std::size_t accepts = 0;
  std::size_t proposals = 0;

  double acceptance_rate() const {
    return proposals == 0 ? 0.0
                          : static_cast<double>(accepts) /
                                static_cast<double>(proposals);
  }
};

ChainState make_chain(const PosteriorProblem& prob, Tensor x0, double step);

// Unadjusted Langevin: x += step * score + sqrt(2 step) eta.
void ula_step(const PosteriorProblem& prob, ChainState& state,
              RngStream& stream, const SamplerOptions& opts = {});

// Metropolis-adjusted Langevin with the asymmetric Gaussian proposal ratio.
// Non-finite proposal energies auto-reject.
void mala_step(const PosteriorProblem& prob, ChainState& state,
               RngStream& stream, const SamplerOptions& opts = {});

// Hamiltonian step: momentum refresh, L leapfrog steps of size state.step,
// joint Metropolis accept/reject.
void hmc_step(const PosteriorProblem& prob, ChainState& state,
              RngStream& stream, std::size_t leapfrog_steps, double mass,
              const SamplerOptions& opts = {});

// Exposed for order-of-accuracy tests and reused by hmc_step.
struct LeapfrogResult {
  Tensor x, p;
  double logp = 0.0;
  Tensor score;
};

LeapfrogResult leapfrog(const PosteriorProblem& prob, const Tensor& x0,
                        const Tensor& p0, std::size_t steps, double dt,
                        double mass);

struct IsResult {
  Tensor samples;               // [n, dim]
  std::vector<double> weights;  // normalized, sum 1
};

// Self-normalized importance sampling with the denoising-kernel proposal
// N(x_t / a_t, (s_t^2 / a_t^2) I). Throws std::runtime_error when every
// weight is zero or non-finite.
IsResult is_weights(const PosteriorProblem& prob, std::size_t n,
                    RngStream& stream, const SamplerOptions& opts = {});

// One categorical draw by weight; exactly one uniform is consumed.
std::size_t sir_index(const std::vector<double>& weights, RngStream& stream);
Tensor sir_resample(const Tensor& samples, const std::vector<double>& weights,
                    RngStream& stream);

struct InnerKernel {
  enum class Kind { kMala, kHmc };
  Kind kind = Kind::kMala;
  double step = 0.01;
  std::size_t leapfrog_steps = 1;  // HMC only
  double mass = 1.0;               // HMC only
};

struct AisConfig {
  std::size_t n_importance = 10;
  // Number of annealing intervals K; the uniform ladder beta_k = k / K is
  // used unless an explicit ladder is given.
  std::size_t n_steps = 15;
  std::vector<double> ladder;  // optional: 0 = beta_0 < ... < beta_K = 1
  InnerKernel kernel;
};

// Annealed importance sampling along the geometric path
// pi_k ∝ exp(-beta_k E) * N(x_t | a_t x, s_t^2). Weight updates use the
// state before each move; transitions target pi_k for k = 1..K-1, so K = 1
// reduces bit-for-bit to is_weights under a shared stream.
IsResult ais_run(const PosteriorProblem& prob, const AisConfig& cfg,
                 RngStream& stream, const SamplerOptions& opts = {});

// Acceptance-window step adaptation: multiply by `factor` above `high`,
// divide below `low`.
double adapt_step_size(double step, double acceptance, double low = 0.5,
                       double high = 0.6, double factor = 1.5);

// Independent per-row MALA chains on the plain target energy (no denoising
// tether): `steps` updates from each row of X. Particle targets keep their
// zero-CoM subspace (noise is projected, scores already live there). Used by
// sample refinement and the early-stopping metric.
Tensor mala_refine_target(const EnergyTarget& target, const Tensor& X,
                          std::size_t steps, double step, RngStream& stream);

// Full posterior-sampling pipeline for one x_t: init (exact Gaussian
// posterior draw, IS, or AIS), SIR pick, optional MALA refinement, keeping
// the last keep_last states as the K posterior samples.
struct Recipe {
  std::string name = "custom";
  enum class Init { kExactGauss, kIs, kAis };
  Init init = Init::kAis;
  AisConfig ais;               // carries n_importance for the IS path too
  std::size_t refine_steps = 5;
  double refine_step = 1e-2;
  bool refine_adaptive = false;  // trainer feeds back an adapted step
  std::size_t keep_last = 1;     // K

  // Appendix-style presets.
  static Recipe mog();
  static Recipe mw();
  static Recipe dw();
  static Recipe lj();
  static Recipe exact_gauss(std::size_t k = 1);
  static Recipe by_name(const std::string& name);
};

struct PosteriorDraws {
  Tensor samples;  // [K, dim]
  Tensor scores;   // target scores -grad E at each sample
  std::size_t accepts = 0;    // refinement acceptance statistics
  std::size_t proposals = 0;
};

// `refine_step` is the current (possibly adapted) MALA step; pass
// recipe.refine_step when no adaptation state exists yet.
PosteriorDraws sample_posterior(const PosteriorProblem& prob,
                                const Recipe& recipe, double refine_step,
                                RngStream& stream,
                                const SamplerOptions& opts = {});

}  // namespace dikl
