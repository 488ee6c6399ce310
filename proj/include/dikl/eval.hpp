#pragma once

#include <cstddef>
#include <vector>

#include "dikl/targets.hpp"
#include "dikl/tensor.hpp"

namespace dikl {

// Fixed-edge histogram derived from a reference sample: `bins` equal-width
// bins between the trim and 1-trim quantiles. Values outside the range are
// clipped into the end bins, so probabilities always sum to 1.
struct HistogramSpec {
  std::vector<double> edges;  // bins + 1, strictly increasing

  static HistogramSpec from_reference(std::vector<double> values,
                                      std::size_t bins = 100,
                                      double trim = 0.005);

  std::size_t bins() const { return edges.size() - 1; }
  std::vector<double> probabilities(const std::vector<double>& values) const;
};

// 0.5 * sum |p_i - q_i|; equal lengths required.
double tvd(const std::vector<double>& p, const std::vector<double>& q);

// Exact minimum-cost row-to-column assignment of a dense n x n cost matrix
// (row-major). Exposed so tests can cross-check the transport solver.
double assignment_cost(const std::vector<double>& cost, std::size_t n);

// Exact sample Wasserstein-2: sqrt of the mean squared pairing cost under
// the optimal assignment. Sets larger than max_n are first subsampled
// without replacement using a fixed internal stream; sizes must agree after
// that.
double wasserstein2(const Tensor& a, const Tensor& b, std::size_t max_n = 2048);

// TVD between energy histograms of A and B; the one-argument-less overload
// builds the spec from B, the reference set.
double energy_tvd(const EnergyTarget& target, const Tensor& a, const Tensor& b,
                  const HistogramSpec& spec);
double energy_tvd(const EnergyTarget& target, const Tensor& a,
                  const Tensor& b);

// All n(n-1)/2 interatomic distances of every configuration row, pooled.
std::vector<double> pairwise_distances(const Tensor& x, ParticleShape shape);

double distance_tvd(const Tensor& a, const Tensor& b, ParticleShape shape,
                    const HistogramSpec& spec);
double distance_tvd(const Tensor& a, const Tensor& b, ParticleShape shape);

// Mean of log p_d over sample rows. Only mixture targets carry a normalized
// density, so anything else throws std::invalid_argument.
double mean_log_density(const EnergyTarget& target, const Tensor& samples);

struct ModeCoverage {
  std::size_t covered = 0;
  std::vector<double> fractions;  // per component, sums to 1
};

// Nearest-mean assignment of each sample; a mode counts as covered when its
// sample fraction reaches min_frac. Requires target.modes().
ModeCoverage mode_coverage(const EnergyTarget& target, const Tensor& samples,
                           double min_frac = 0.001);

// Plain-parameter 1D Gaussian mixture for the scalar demos below.
struct Mog1d {
  std::vector<double> weight, mean, var;

  double log_pdf(double x) const;
  double pdf(double x) const;
  // Signal scale a then Gaussian blur: component k becomes
  // N(a mean_k, a^2 var_k + sigma^2).
  Mog1d convolved(double alpha, double sigma) const;
};

// Density of mog * N(0, sigma^2) on the grid, in closed form.
std::vector<double> convolved_density_1d(const Mog1d& mog, double sigma,
                                         const std::vector<double>& grid);

struct NoiseLevel {
  double alpha = 1.0;
  double sigma = 0.0;
};

struct LandscapeGrid {
  std::vector<double> mu, sigma;
  std::vector<NoiseLevel> levels;
  std::vector<double> kl;  // [level][mu][sigma], level-major

  double at(std::size_t level, std::size_t i, std::size_t j) const {
    return kl[(level * mu.size() + i) * sigma.size() + j];
  }
};

// KL(N(mu, sigma^2) * k || target * k) for every grid cell and noise level,
// by adaptive Simpson quadrature on the closed-form convolved densities.
// Throws std::runtime_error naming the cell when the quadrature fails to
// converge within max_depth.
LandscapeGrid kl_landscape(std::vector<double> mu_grid,
                           std::vector<double> sigma_grid, const Mog1d& target,
                           std::vector<NoiseLevel> levels, double tol = 1e-9,
                           int max_depth = 48);

}  // namespace dikl
