#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dikl/rng.hpp"
#include "dikl/schedule.hpp"
#include "dikl/tensor.hpp"
#include "test_util.hpp"

using namespace dikl;

TEST_CASE("two step schedule matches hand arithmetic") {
  NoiseSchedule s = build_vp_linear(2, 0.1, 0.2, Weighting::kUniform);
  CHECK(s.beta[0] == doctest::Approx(0.1));
  CHECK(s.beta[1] == doctest::Approx(0.2));
  CHECK(s.alpha_t(1) == doctest::Approx(std::sqrt(0.9)));
  CHECK(s.sigma2_t(1) == doctest::Approx(0.1));
  CHECK(s.alpha_t(2) == doctest::Approx(std::sqrt(0.72)));
  CHECK(s.sigma2_t(2) == doctest::Approx(0.28));
  CHECK(s.w_t(1) == doctest::Approx(1.0));
}

TEST_CASE("inv_alpha weighting is the reciprocal signal scale") {
  // T=1 with beta = 0.75 gives alpha = 0.5.
  NoiseSchedule s = build_vp_linear(1, 0.75, 0.75, Weighting::kInvAlpha);
  CHECK(s.alpha_t(1) == doctest::Approx(0.5));
  CHECK(s.w_t(1) == doctest::Approx(2.0));
}

TEST_CASE("variance preserving identity holds to 1e-12 on the paper ladder") {
  NoiseSchedule s = build_vp_linear(30, 1e-4, 0.7, Weighting::kInvAlpha);
  REQUIRE(s.T == 30);
  double prev = 1.0;
  for (std::size_t t = 1; t <= 30; ++t) {
    CHECK(std::abs(s.alpha_t(t) * s.alpha_t(t) + s.sigma2_t(t) - 1.0) < 1e-12);
    CHECK(s.alpha_t(t) > 0.0);
    CHECK(s.alpha_t(t) < 1.0);
    CHECK(s.alpha_t(t) < prev);
    CHECK(s.w_t(t) > 0.0);
    prev = s.alpha_t(t);
  }
}

TEST_CASE("invalid schedule parameters are rejected") {
  CHECK_THROWS_AS(build_vp_linear(0, 0.1, 0.2, Weighting::kUniform),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_vp_linear(5, 0.0, 0.2, Weighting::kUniform),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_vp_linear(5, 0.3, 0.2, Weighting::kUniform),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_vp_linear(5, 0.1, 1.0, Weighting::kUniform),
                  std::invalid_argument);
}

TEST_CASE("forward_noise interpolates between data and noise") {
  NoiseSchedule s = build_vp_linear(10, 0.05, 0.5, Weighting::kUniform);
  Tensor x = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  Tensor eps0(std::vector<std::size_t>{2, 3}, 0.0);
  Tensor xt = forward_noise(s, x, 4, eps0);
  CHECK(max_abs_diff(xt, scale(x, s.alpha_t(4))) < 1e-15);

  RngStream r(4, 0);
  Tensor eps = randn(r, {2, 3});
  Tensor xt2 = forward_noise(s, x, 4, eps);
  Tensor expect = lincomb(s.alpha_t(4), x, s.sigma_t(4), eps);
  CHECK(max_abs_diff(xt2, expect) < 1e-15);

  CHECK_THROWS_AS(forward_noise(s, x, 0, eps), std::invalid_argument);
  CHECK_THROWS_AS(forward_noise(s, x, 11, eps), std::invalid_argument);
}

TEST_CASE("forward_noise keeps particle systems in the zero-CoM subspace") {
  NoiseSchedule s = build_vp_linear(5, 0.1, 0.4, Weighting::kUniform);
  Tensor x = Tensor::matrix(1, 6, {1, -1, 2, 0, -3, 1});
  x = zero_center(x, 3, 2);
  RngStream r(9, 0);
  Tensor eps = randn(r, {1, 6});
  Tensor xt = forward_noise(s, x, 3, eps, ParticleShape{3, 2});
  for (std::size_t j = 0; j < 2; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < 3; ++i) col += xt[i * 2 + j];
    CHECK(std::abs(col) < 1e-12);
  }
}

TEST_CASE("forward_noise marginal has the scheduled moments") {
  NoiseSchedule s = build_vp_linear(30, 1e-4, 0.7, Weighting::kInvAlpha);
  const std::size_t t = 17, n = 100000;
  const double c = 2.5;
  Tensor x = Tensor::matrix(1, 1, {c});
  RngStream r(123, 5);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor eps = randn(r, {1, 1});
    const double v = forward_noise(s, x, t, eps)[0];
    m1 += v;
    m2 += v * v;
  }
  m1 /= n;
  m2 = m2 / n - m1 * m1;
  const double want_mean = s.alpha_t(t) * c;
  const double want_var = s.sigma2_t(t);
  const double se_mean = std::sqrt(want_var / n);
  const double se_var = want_var * std::sqrt(2.0 / n);
  CHECK(std::abs(m1 - want_mean) < 3.0 * se_mean);
  CHECK(std::abs(m2 - want_var) < 3.0 * se_var);
}

TEST_CASE("kernel_score arithmetic and residual identity") {
  // T=1 with beta = 0.36: alpha = 0.8, sigma^2 = 0.36.
  NoiseSchedule s = build_vp_linear(1, 0.36, 0.36, Weighting::kUniform);
  Tensor x = Tensor::matrix(1, 1, {0.5});
  Tensor xt = Tensor::matrix(1, 1, {1.0});
  Tensor sc = kernel_score(s, x, xt, 1);
  CHECK(sc[0] == doctest::Approx((0.4 - 1.0) / 0.36));

  // At x_t = alpha x the score vanishes.
  Tensor at_mean = scale(x, s.alpha_t(1));
  CHECK(std::abs(kernel_score(s, x, at_mean, 1)[0]) < 1e-15);

  // kernel_score(x_t = alpha x + sigma eps) = -eps / sigma.
  RngStream r(6, 0);
  Tensor xs = randn(r, {4, 3});
  Tensor eps = randn(r, {4, 3});
  Tensor noised = forward_noise(s, xs, 1, eps);
  Tensor got = kernel_score(s, xs, noised, 1);
  Tensor want = scale(eps, -1.0 / s.sigma_t(1));
  CHECK(max_abs_diff(got, want) < 1e-12);
}

TEST_CASE("kernel_score matches finite differences of the log kernel") {
  NoiseSchedule s = build_vp_linear(30, 1e-4, 0.7, Weighting::kInvAlpha);
  const std::size_t t = 11;
  RngStream r(8, 0);
  Tensor x = randn(r, {1, 4});
  Tensor xt = randn(r, {1, 4});

  auto log_kernel = [&](const Tensor& q) {
    const double a = s.alpha_t(t), s2 = s.sigma2_t(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double diff = q[i] - a * x[i];
      acc += -0.5 * diff * diff / s2;
    }
    return acc;
  };
  Tensor want = testutil::fd_grad(log_kernel, xt);
  Tensor got = kernel_score(s, x, xt, t);
  CHECK(testutil::rel_err(got, want) < 1e-6);
}
