#include "dikl/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dikl {

Adam::Adam(std::vector<Tensor*> params, double lr, double beta1, double beta2,
           double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
      eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor* p : params_) {
    m_.push_back(Tensor::zeros_like(*p));
    v_.push_back(Tensor::zeros_like(*p));
  }
}

void Adam::step(const std::vector<Tensor>& grads) {
  if (grads.size() != params_.size()) {
    throw std::invalid_argument("Adam::step: gradient list size mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = *params_[k];
    const Tensor& g = grads[k];
    if (!p.same_shape(g)) {
      throw std::invalid_argument("Adam::step: gradient shape mismatch");
    }
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

double clip_grad_norm(std::vector<Tensor>& grads, double max_norm) {
  double total = 0.0;
  for (const Tensor& g : grads) total += sumsq(g);
  const double norm = std::sqrt(total);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (Tensor& g : grads) g = scale(g, s);
  }
  return norm;
}

}  // namespace dikl
