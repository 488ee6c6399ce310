#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dikl/tensor.hpp"

namespace dikl {

class RngStream;

// Unnormalized target density exp(-E(x)). Scores are exact gradients, not
// finite differences. Implementations are pure and thread-safe.
class EnergyTarget {
 public:
  virtual ~EnergyTarget() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string_view kind() const = 0;
  // Set for particle systems (translation/permutation/rotation symmetric).
  virtual std::optional<ParticleShape> particles() const {
    return std::nullopt;
  }

  virtual double energy(std::span<const double> x) const = 0;
  // out = -grad E(x)
  virtual void score(std::span<const double> x, std::span<double> out) const = 0;
  // Fused energy + score; the default just calls both, heavy targets
  // override to share the pair loop.
  virtual double energy_and_score(std::span<const double> x,
                                  std::span<double> out) const;

  virtual bool has_exact_sampler() const { return false; }
  // Exact draw; throws std::logic_error when has_exact_sampler() is false.
  virtual Tensor sample_exact(std::size_t n_samples, RngStream& stream) const;

  // Component means [K, dim] for mixture targets, nullptr otherwise. Mode
  // coverage metrics key off this.
  virtual const Tensor* modes() const { return nullptr; }

  // Batched conveniences over rows of X.
  std::vector<double> energies(const Tensor& X) const;
  Tensor scores(const Tensor& X) const;
};

std::unique_ptr<EnergyTarget> make_gauss(std::size_t dim);

// Mixture of isotropic Gaussians with uniform weights. Energy is the exact
// negative log density (normalizers included), so -E is usable as log p.
std::unique_ptr<EnergyTarget> make_mog(Tensor means, double component_var);
// The 40-component benchmark instance: means i.i.d. uniform on [-40,40]^2
// from a fixed internal stream, unit component variance.
std::unique_ptr<EnergyTarget> make_mog40();

// Product of independent 2D double-well blocks; block energy
// x1^4 - 6 x1^2 - x1/2 + x2^2/2.
std::unique_ptr<EnergyTarget> make_manywell(std::size_t blocks);
std::unique_ptr<EnergyTarget> make_manywell32();  // 16 blocks, 32 dims

struct DoubleWellParams {
  double a = 0.0;
  double b = -4.0;
  double c = 0.9;
  double d0 = 4.0;
  double tau = 1.0;
};

std::unique_ptr<EnergyTarget> make_dw_particles(std::size_t n, std::size_t d,
                                                DoubleWellParams p = {});
std::unique_ptr<EnergyTarget> make_dw4();  // n=4 particles in 2D

struct LennardJonesParams {
  double r_m = 1.0;
  double eps_lj = 1.0;
  double tau = 1.0;
  double c_osc = 0.5;
  // Below cutoff_frac * r_m the pair energy continues linearly
  // (value- and slope-matched), keeping E finite for coincident particles.
  double cutoff_frac = 0.8;
};

std::unique_ptr<EnergyTarget> make_lj_particles(std::size_t n, std::size_t d,
                                                LennardJonesParams p = {});
std::unique_ptr<EnergyTarget> make_lj13();  // n=13 particles in 3D

// Benchmark lookup for configs and checkpoints: "mog40", "mw32", "dw4",
// "lj13", or "gauss<d>" (e.g. "gauss1", "gauss2"). Throws
// std::invalid_argument for anything else.
std::unique_ptr<EnergyTarget> make_target(const std::string& name);

// Exact sampler where one exists, otherwise a long MALA reference chain
// (adaptive step during burn-in, fixed afterwards; thinned), zero-centered
// for particle targets.
Tensor ground_truth_samples(const EnergyTarget& target, std::size_t n_samples,
                            RngStream& stream);

}  // namespace dikl
