#include <doctest.h>

#include <cmath>

#include "dikl/optim.hpp"
#include "dikl/tensor.hpp"

using namespace dikl;

TEST_CASE("first Adam step matches the closed form") {
  // With bias correction at t=1, the update is lr * g / (|g| + eps).
  Tensor p = Tensor::vector({1.0, -2.0, 0.5});
  Adam opt({&p}, 0.1);
  Tensor g = Tensor::vector({0.3, -0.7, 0.0});
  opt.step({g});
  const double eps = 1e-8;
  CHECK(p[0] == doctest::Approx(1.0 - 0.1 * 0.3 / (0.3 + eps)));
  CHECK(p[1] == doctest::Approx(-2.0 + 0.1 * 0.7 / (0.7 + eps)));
  CHECK(p[2] == doctest::Approx(0.5));
}

TEST_CASE("Adam drives a quadratic to its minimum") {
  Tensor p = Tensor::vector({5.0, -3.0});
  const double c0 = 1.0, c1 = -2.0;
  Adam opt({&p}, 0.05);
  for (int i = 0; i < 2000; ++i) {
    Tensor g = Tensor::vector({p[0] - c0, p[1] - c1});
    opt.step({g});
  }
  CHECK(std::abs(p[0] - c0) < 1e-3);
  CHECK(std::abs(p[1] - c1) < 1e-3);
  CHECK(opt.steps_taken() == 2000);
}

TEST_CASE("Adam handles several tensors and validates shapes") {
  Tensor a = Tensor::vector({1.0});
  Tensor b = Tensor::matrix(2, 2, {1, 2, 3, 4});
  Adam opt({&a, &b}, 0.1);
  CHECK_THROWS(opt.step({Tensor::vector({1.0})}));
  CHECK_THROWS(opt.step({Tensor::vector({1.0}), Tensor::vector({1.0})}));
  opt.step({Tensor::vector({1.0}), Tensor::zeros_like(b)});
  CHECK(a[0] < 1.0);
  CHECK(b[3] == doctest::Approx(4.0));
}

TEST_CASE("clip_grad_norm rescales only above the threshold") {
  std::vector<Tensor> gs;
  gs.push_back(Tensor::vector({3.0, 0.0}));
  gs.push_back(Tensor::vector({0.0, 4.0}));
  // Global norm is 5.
  double norm = clip_grad_norm(gs, 10.0);
  CHECK(norm == doctest::Approx(5.0));
  CHECK(gs[0][0] == doctest::Approx(3.0));

  norm = clip_grad_norm(gs, 1.0);
  CHECK(norm == doctest::Approx(5.0));
  CHECK(gs[0][0] == doctest::Approx(0.6));
  CHECK(gs[1][1] == doctest::Approx(0.8));
  double after = std::sqrt(sumsq(gs[0]) + sumsq(gs[1]));
  CHECK(after == doctest::Approx(1.0));
}
