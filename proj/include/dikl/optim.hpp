#pragma once

#include <cstddef>
#include <vector>

#include "dikl/tensor.hpp"

namespace dikl {

// Adam over a fixed list of parameter tensors. Moment buffers are part of
// the optimizer state and are saved/restored with checkpoints.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Tensor*> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  // One update with the given gradients (aligned with the param list).
  void step(const std::vector<Tensor>& grads);

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  std::size_t steps_taken() const { return t_; }

  // Checkpoint access: first and second moment buffers plus the step count.
  std::vector<Tensor>& m() { return m_; }
  std::vector<Tensor>& v() { return v_; }
  void set_steps_taken(std::size_t t) { t_ = t; }

 private:
  std::vector<Tensor*> params_;
  std::vector<Tensor> m_, v_;
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::size_t t_ = 0;
};

// Global-norm gradient clipping: if ||g|| over all tensors exceeds max_norm,
// every tensor is scaled by max_norm / ||g||. Returns the pre-clip norm.
double clip_grad_norm(std::vector<Tensor>& grads, double max_norm);

}  // namespace dikl
