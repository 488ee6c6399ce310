#include <doctest.h>

#include <cmath>
#include <functional>
#include <stdexcept>

#include "dikl/rng.hpp"
#include "dikl/tape.hpp"
#include "dikl/tensor.hpp"
#include "test_util.hpp"

using namespace dikl;
using testutil::fd_grad;
using testutil::rel_err;

namespace {

// Checks the tape gradient of a scalar-valued expression against central
// finite differences at every entry of x.
void check_against_fd(const Tensor& x,
                      const std::function<Var(GradTape&, Var)>& build,
                      double tol = 1e-6) {
  GradTape tape;
  Var xv = tape.leaf(x, true);
  Var root = build(tape, xv);
  tape.backward(root);
  Tensor got = tape.grad(xv);

  auto f = [&](const Tensor& xx) {
    GradTape t;
    Var v = t.leaf(xx, false);
    return t.value(build(t, v)).item();
  };
  Tensor want = fd_grad(f, x);
  CHECK(rel_err(got, want) < tol);
}

Tensor test_matrix(std::size_t r, std::size_t c, std::uint64_t key) {
  RngStream s(917, key);
  return randn(s, {r, c});
}

}  // namespace

TEST_CASE("gradient of lincomb, mul and reductions against finite differences") {
  Tensor x = test_matrix(3, 4, 0);
  Tensor other = test_matrix(3, 4, 1);

  check_against_fd(x, [&](GradTape& t, Var v) {
    Var o = t.constant(other);
    return t.sum(t.mul(t.lincomb(2.0, v, -0.5, o), v));
  });

  check_against_fd(x, [&](GradTape& t, Var v) { return t.mean(t.mul(v, v)); });

  check_against_fd(x, [&](GradTape& t, Var v) { return t.sumsq(v); });

  check_against_fd(x, [&](GradTape& t, Var v) {
    Var o = t.constant(other);
    return t.dot(v, t.mul(v, o));
  });
}

TEST_CASE("gradient of silu and relu chains against finite differences") {
  Tensor x = test_matrix(4, 3, 2);
  check_against_fd(x, [&](GradTape& t, Var v) { return t.sum(t.silu(v)); });
  check_against_fd(x, [&](GradTape& t, Var v) {
    return t.sumsq(t.silu(t.scale(v, 1.7)));
  });
  // Keep inputs away from the relu kink where FD is invalid.
  Tensor far = x;
  for (std::size_t i = 0; i < far.size(); ++i) {
    far[i] += far[i] > 0 ? 0.5 : -0.5;
  }
  check_against_fd(far, [&](GradTape& t, Var v) { return t.sum(t.relu(v)); });
}

TEST_CASE("gradient of affine wrt input, weight and bias") {
  Tensor x = test_matrix(5, 3, 3);
  Tensor w = test_matrix(3, 2, 4);
  Tensor b = test_matrix(1, 2, 5);
  Tensor bvec = Tensor::vector({b[0], b[1]});

  // wrt x
  check_against_fd(x, [&](GradTape& t, Var v) {
    Var wv = t.constant(w), bv = t.constant(bvec);
    return t.sumsq(t.silu(t.affine(v, wv, bv)));
  });
  // wrt w
  check_against_fd(w, [&](GradTape& t, Var v) {
    Var xv = t.constant(x), bv = t.constant(bvec);
    return t.sumsq(t.silu(t.affine(xv, v, bv)));
  });
  // wrt b
  check_against_fd(bvec, [&](GradTape& t, Var v) {
    Var xv = t.constant(x), wv = t.constant(w);
    return t.sumsq(t.silu(t.affine(xv, wv, v)));
  });
}

TEST_CASE("gradient of concat and zero_center against finite differences") {
  Tensor x = test_matrix(3, 6, 6);
  Tensor other = test_matrix(3, 2, 7);
  check_against_fd(x, [&](GradTape& t, Var v) {
    Var o = t.constant(other);
    return t.sumsq(t.silu(t.concat_cols(v, o)));
  });
  check_against_fd(x, [&](GradTape& t, Var v) {
    return t.sumsq(t.silu(t.zero_center(v, 3, 2)));
  });
}

TEST_CASE("grad accumulates over fan-out") {
  // f(x) = sum(x*x) + 3*sum(x); both paths contribute.
  Tensor x = Tensor::vector({1.0, -2.0});
  GradTape t;
  Var v = t.leaf(x, true);
  Var root = t.add(t.sumsq(v), t.scale(t.sum(v), 3.0));
  t.backward(root);
  Tensor g = t.grad(v);
  CHECK(g[0] == doctest::Approx(2.0 * 1.0 + 3.0));
  CHECK(g[1] == doctest::Approx(2.0 * -2.0 + 3.0));
}

TEST_CASE("constants receive no gradient and do not block the sweep") {
  GradTape t;
  Var x = t.leaf(Tensor::vector({2.0}), true);
  Var c = t.constant(Tensor::vector({5.0}));
  Var root = t.sum(t.mul(x, c));
  t.backward(root);
  CHECK_FALSE(t.has_grad(c));
  CHECK(t.grad(x)[0] == doctest::Approx(5.0));
  // grad() on the constant still returns well-formed zeros.
  CHECK(t.grad(c)[0] == doctest::Approx(0.0));
}

TEST_CASE("backward demands a scalar root and runs once") {
  GradTape t;
  Var x = t.leaf(Tensor::vector({1.0, 2.0}), true);
  CHECK_THROWS_AS(t.backward(x), std::invalid_argument);
}

TEST_CASE("deep chain gradient stays exact") {
  // f(x) = sumsq applied after k=20 alternating silu/scale layers; compare
  // against finite differences to catch accumulation order bugs.
  Tensor x = test_matrix(2, 3, 8);
  check_against_fd(x, [&](GradTape& t, Var v) {
    Var h = v;
    for (int i = 0; i < 20; ++i) {
      h = t.silu(t.scale(h, i % 2 ? 0.9 : 1.1));
    }
    return t.sumsq(h);
  });
}
