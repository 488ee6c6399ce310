#include "dikl/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace dikl {

double NoiseSchedule::sigma_t(std::size_t t) const {
  return std::sqrt(sigma2[t - 1]);
}

NoiseSchedule build_vp_linear(std::size_t T, double beta_min, double beta_max,
                              Weighting weighting) {
  if (T < 1) throw std::invalid_argument("build_vp_linear: T must be >= 1");
  if (!(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0)) {
    throw std::invalid_argument(
        "build_vp_linear: need 0 < beta_min <= beta_max < 1");
  }
  NoiseSchedule s;
  s.T = T;
  s.beta.resize(T);
  s.alpha.resize(T);
  s.sigma2.resize(T);
  s.w.resize(T);
  double prod = 1.0;
  for (std::size_t i = 0; i < T; ++i) {
    const double frac =
        T == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(T - 1);
    s.beta[i] = beta_min + (beta_max - beta_min) * frac;
    prod *= 1.0 - s.beta[i];
    s.alpha[i] = std::sqrt(prod);
    s.sigma2[i] = 1.0 - prod;  // 1 - alpha^2, exact in this form
    s.w[i] = weighting == Weighting::kInvAlpha ? 1.0 / s.alpha[i] : 1.0;
  }
  return s;
}

Tensor forward_noise(const NoiseSchedule& sched, const Tensor& x,
                     std::size_t t, const Tensor& eps,
                     std::optional<ParticleShape> particles) {
  if (t < 1 || t > sched.T) {
    throw std::invalid_argument("forward_noise: t out of range");
  }
  const double a = sched.alpha_t(t);
  const double sig = sched.sigma_t(t);
  if (particles) {
    return lincomb(a, x, sig, zero_center(eps, particles->n, particles->d));
  }
  return lincomb(a, x, sig, eps);
}

Tensor kernel_score(const NoiseSchedule& sched, const Tensor& x,
                    const Tensor& x_t, std::size_t t) {
  if (t < 1 || t > sched.T) {
    throw std::invalid_argument("kernel_score: t out of range");
  }
  const double s2 = sched.sigma2_t(t);
  if (!(s2 > 0.0)) {
    throw std::invalid_argument("kernel_score: sigma_t must be nonzero");
  }
  return scale(lincomb(sched.alpha_t(t), x, -1.0, x_t), 1.0 / s2);
}

}  // namespace dikl
