#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dikl/tensor.hpp"

namespace dikl {

enum class Weighting { kInvAlpha, kUniform };

// Variance-preserving Gaussian kernel ladder k_t(x_t|x) = N(x_t; a_t x,
// s_t^2 I) with s_t^2 = 1 - a_t^2. Indexing is 1-based in t to match the
// ladder convention; accessors take t in [1, T].
struct NoiseSchedule {
  std::size_t T = 0;
  std::vector<double> beta;    // per-step noise rates
  std::vector<double> alpha;   // cumulative signal scale, strictly decreasing
  std::vector<double> sigma2;  // 1 - alpha^2
  std::vector<double> w;       // positive loss weighting

  double alpha_t(std::size_t t) const { return alpha[t - 1]; }
  double sigma2_t(std::size_t t) const { return sigma2[t - 1]; }
  double sigma_t(std::size_t t) const;
  double w_t(std::size_t t) const { return w[t - 1]; }
};

// Linear beta ramp from beta_min to beta_max over T steps, DDPM-style
// cumulative alpha. Throws std::invalid_argument outside
// 0 < beta_min <= beta_max < 1 or for T = 0.
NoiseSchedule build_vp_linear(std::size_t T, double beta_min, double beta_max,
                              Weighting weighting);

// x_t = alpha_t x + sigma_t eps. When `particles` is given, eps is
// zero-center projected first so noising never leaves the zero-CoM subspace.
Tensor forward_noise(const NoiseSchedule& sched, const Tensor& x,
                     std::size_t t, const Tensor& eps,
                     std::optional<ParticleShape> particles = std::nullopt);

// Gradient of log k_t(x_t|x) in x_t: (alpha_t x - x_t) / sigma_t^2.
Tensor kernel_score(const NoiseSchedule& sched, const Tensor& x,
                    const Tensor& x_t, std::size_t t);

}  // namespace dikl
