#pragma once

#include <cstddef>
#include <vector>

#include "dikl/tensor.hpp"

namespace dikl {

// Handle into a GradTape. Vars are only meaningful for the tape that created
// them.
struct Var {
  std::size_t idx = static_cast<std::size_t>(-1);
  bool valid() const { return idx != static_cast<std::size_t>(-1); }
};

// Reverse-mode autodiff over a recorded expression graph. The op vocabulary
// is deliberately small: affine maps, a few elementwise functions, reductions
// and structural ops. That is everything the networks and losses here need.
//
// Usage: record leaves and ops forward, call backward() on a scalar root,
// then read gradients of the leaves that were marked as requiring grad.
class GradTape {
 public:
  Var leaf(Tensor value, bool requires_grad);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  const Tensor& value(Var v) const;
  std::size_t num_vars() const { return vals_.size(); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var lincomb(double c0, Var a, double c1, Var b);
  Var affine(Var x, Var w, Var b);
  Var silu(Var a);
  Var relu(Var a);
  Var sum(Var a);
  Var mean(Var a);
  Var sumsq(Var a);
  Var dot(Var a, Var b);
  Var concat_cols(Var a, Var b);
  Var zero_center(Var a, std::size_t n, std::size_t d);

  // Reverse sweep from a scalar root. May be called once per tape.
  void backward(Var root);

  bool has_grad(Var v) const;
  // Gradient of the root w.r.t. v; valid after backward() for vars on a path
  // from a requires-grad leaf to the root. Returns zeros otherwise.
  Tensor grad(Var v) const;

 private:
  enum class Op {
    kLincomb,
    kMul,
    kAffine,
    kSilu,
    kRelu,
    kSum,
    kMean,
    kSumsq,
    kDot,
    kConcatCols,
    kZeroCenter,
  };

  struct Node {
    Op op;
    Var a, b, c;  // inputs; unused slots stay invalid
    Var out;
    double c0 = 0.0, c1 = 0.0;
    std::size_t n = 0, d = 0;
  };

  Var push_value(Tensor value, bool needs);
  void accumulate(Var v, Tensor g);
  bool needs(Var v) const { return v.valid() && needs_[v.idx]; }

  std::vector<Tensor> vals_;
  std::vector<char> needs_;
  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  bool swept_ = false;
};

}  // namespace dikl
