#include "dikl/tape.hpp"

#include <stdexcept>
#include <utility>

namespace dikl {

namespace {
void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

Var GradTape::push_value(Tensor value, bool needs_grad) {
  vals_.push_back(std::move(value));
  needs_.push_back(needs_grad ? 1 : 0);
  return Var{vals_.size() - 1};
}

Var GradTape::leaf(Tensor value, bool requires_grad) {
  return push_value(std::move(value), requires_grad);
}

const Tensor& GradTape::value(Var v) const {
  require(v.valid() && v.idx < vals_.size(), "value: var not on this tape");
  return vals_[v.idx];
}

Var GradTape::add(Var a, Var b) { return lincomb(1.0, a, 1.0, b); }

Var GradTape::sub(Var a, Var b) { return lincomb(1.0, a, -1.0, b); }

Var GradTape::lincomb(double c0, Var a, double c1, Var b) {
  Var out = push_value(dikl::lincomb(c0, value(a), c1, value(b)),
                       needs(a) || needs(b));
  nodes_.push_back({Op::kLincomb, a, b, {}, out, c0, c1, 0, 0});
  return out;
}

Var GradTape::mul(Var a, Var b) {
  Var out = push_value(dikl::mul(value(a), value(b)), needs(a) || needs(b));
  nodes_.push_back({Op::kMul, a, b, {}, out});
  return out;
}

Var GradTape::scale(Var a, double c) {
  // Reuse the lincomb node with a dead second operand.
  Var out = push_value(dikl::scale(value(a), c), needs(a));
  nodes_.push_back({Op::kLincomb, a, {}, {}, out, c, 0.0, 0, 0});
  return out;
}

Var GradTape::affine(Var x, Var w, Var b) {
  Var out = push_value(dikl::affine(value(x), value(w), value(b)),
                       needs(x) || needs(w) || needs(b));
  nodes_.push_back({Op::kAffine, x, w, b, out});
  return out;
}

Var GradTape::silu(Var a) {
  Var out = push_value(dikl::silu(value(a)), needs(a));
  nodes_.push_back({Op::kSilu, a, {}, {}, out});
  return out;
}

Var GradTape::relu(Var a) {
  Var out = push_value(dikl::relu(value(a)), needs(a));
  nodes_.push_back({Op::kRelu, a, {}, {}, out});
  return out;
}

Var GradTape::sum(Var a) {
  Var out = push_value(Tensor::scalar(dikl::sum(value(a))), needs(a));
  nodes_.push_back({Op::kSum, a, {}, {}, out});
  return out;
}

Var GradTape::mean(Var a) {
  Var out = push_value(Tensor::scalar(dikl::mean(value(a))), needs(a));
  nodes_.push_back({Op::kMean, a, {}, {}, out});
  return out;
}

Var GradTape::sumsq(Var a) {
  Var out = push_value(Tensor::scalar(dikl::sumsq(value(a))), needs(a));
  nodes_.push_back({Op::kSumsq, a, {}, {}, out});
  return out;
}

Var GradTape::dot(Var a, Var b) {
  Var out = push_value(Tensor::scalar(dikl::dot(value(a), value(b))),
                       needs(a) || needs(b));
  nodes_.push_back({Op::kDot, a, b, {}, out});
  return out;
}

Var GradTape::concat_cols(Var a, Var b) {
  Var out = push_value(dikl::concat_cols(value(a), value(b)),
                       needs(a) || needs(b));
  nodes_.push_back({Op::kConcatCols, a, b, {}, out});
  return out;
}

Var GradTape::zero_center(Var a, std::size_t n, std::size_t d) {
  Var out = push_value(dikl::zero_center(value(a), n, d), needs(a));
  nodes_.push_back({Op::kZeroCenter, a, {}, {}, out, 0.0, 0.0, n, d});
  return out;
}

void GradTape::accumulate(Var v, Tensor g) {
  if (!needs(v)) return;
  Tensor& slot = grads_[v.idx];
  if (slot.empty()) {
    slot = std::move(g);
  } else {
    slot = dikl::add(slot, g);
  }
}

void GradTape::backward(Var root) {
  require(!swept_, "backward: tape already swept");
  require(value(root).size() == 1, "backward: root must be scalar");
  swept_ = true;
  grads_.assign(vals_.size(), Tensor{});
  if (!needs_[root.idx]) return;
  grads_[root.idx] = Tensor::scalar(1.0);

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const Node& nd = *it;
    const Tensor& g = grads_[nd.out.idx];
    if (g.empty()) continue;
    switch (nd.op) {
      case Op::kLincomb:
        accumulate(nd.a, dikl::scale(g, nd.c0));
        if (nd.b.valid()) accumulate(nd.b, dikl::scale(g, nd.c1));
        break;
      case Op::kMul:
        accumulate(nd.a, dikl::mul(g, vals_[nd.b.idx]));
        accumulate(nd.b, dikl::mul(g, vals_[nd.a.idx]));
        break;
      case Op::kAffine:
        if (needs(nd.a)) accumulate(nd.a, affine_grad_x(g, vals_[nd.b.idx]));
        if (needs(nd.b)) accumulate(nd.b, affine_grad_w(vals_[nd.a.idx], g));
        if (needs(nd.c)) accumulate(nd.c, affine_grad_b(g));
        break;
      case Op::kSilu:
        accumulate(nd.a, dikl::mul(g, silu_grad(vals_[nd.a.idx])));
        break;
      case Op::kRelu: {
        const Tensor& x = vals_[nd.a.idx];
        Tensor gx = Tensor::zeros_like(x);
        for (std::size_t i = 0; i < x.size(); ++i) {
          gx[i] = x[i] > 0.0 ? g[i] : 0.0;
        }
        accumulate(nd.a, std::move(gx));
        break;
      }
      case Op::kSum: {
        Tensor gx(vals_[nd.a.idx].shape(), g.item());
        accumulate(nd.a, std::move(gx));
        break;
      }
      case Op::kMean: {
        const Tensor& x = vals_[nd.a.idx];
        Tensor gx(x.shape(), g.item() / static_cast<double>(x.size()));
        accumulate(nd.a, std::move(gx));
        break;
      }
      case Op::kSumsq:
        accumulate(nd.a, dikl::scale(vals_[nd.a.idx], 2.0 * g.item()));
        break;
      case Op::kDot:
        accumulate(nd.a, dikl::scale(vals_[nd.b.idx], g.item()));
        accumulate(nd.b, dikl::scale(vals_[nd.a.idx], g.item()));
        break;
      case Op::kConcatCols: {
        const Tensor& a = vals_[nd.a.idx];
        const Tensor& b = vals_[nd.b.idx];
        const std::size_t m = a.rows(), ca = a.cols(), cb = b.cols();
        if (needs(nd.a)) {
          Tensor ga = Tensor::zeros_like(a);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < ca; ++j) {
              ga[i * ca + j] = g[i * (ca + cb) + j];
            }
          }
          accumulate(nd.a, std::move(ga));
        }
        if (needs(nd.b)) {
          Tensor gb = Tensor::zeros_like(b);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < cb; ++j) {
              gb[i * cb + j] = g[i * (ca + cb) + ca + j];
            }
          }
          accumulate(nd.b, std::move(gb));
        }
        break;
      }
      case Op::kZeroCenter:
        // The projection matrix is symmetric, so the VJP is the projection
        // itself.
        accumulate(nd.a, dikl::zero_center(g, nd.n, nd.d));
        break;
    }
  }
}

bool GradTape::has_grad(Var v) const {
  return swept_ && v.valid() && v.idx < grads_.size() &&
         !grads_[v.idx].empty();
}

Tensor GradTape::grad(Var v) const {
  require(swept_, "grad: call backward first");
  require(v.valid() && v.idx < vals_.size(), "grad: var not on this tape");
  if (grads_[v.idx].empty()) return Tensor::zeros_like(vals_[v.idx]);
  return grads_[v.idx];
}

}  // namespace dikl
