#include "dikl/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dikl/rng.hpp"

namespace dikl {

namespace {

using MatMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                   Eigen::Dynamic,
                                                   Eigen::RowMajor>>;

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  return n;
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor Tensor::scalar(double v) {
  Tensor t(std::vector<std::size_t>{});
  t.data_ = {v};
  return t;
}

Tensor Tensor::vector(std::vector<double> v) {
  Tensor t;
  t.shape_ = {v.size()};
  t.data_ = std::move(v);
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> v) {
  require(v.size() == rows * cols, "matrix: data size does not match shape");
  Tensor t;
  t.shape_ = {rows, cols};
  t.data_ = std::move(v);
  return t;
}

Tensor Tensor::zeros_like(const Tensor& t) { return Tensor(t.shape_); }

std::size_t Tensor::rows() const {
  return shape_.size() == 2 ? shape_[0] : 1;
}

std::size_t Tensor::cols() const {
  if (shape_.empty()) return 1;
  return shape_.back();
}

std::span<double> Tensor::row(std::size_t i) {
  const std::size_t c = cols();
  return {data_.data() + i * c, c};
}

std::span<const double> Tensor::row(std::size_t i) const {
  const std::size_t c = cols();
  return {data_.data() + i * c, c};
}

double& Tensor::at(std::size_t r, std::size_t c) {
  return data_[r * cols() + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return data_[r * cols() + c];
}

double Tensor::item() const {
  require(data_.size() == 1, "item: tensor is not a scalar");
  return data_[0];
}

Tensor add(const Tensor& a, const Tensor& b) { return lincomb(1.0, a, 1.0, b); }

Tensor sub(const Tensor& a, const Tensor& b) {
  return lincomb(1.0, a, -1.0, b);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require(a.same_shape(b), "mul: shape mismatch");
  Tensor out = Tensor::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Tensor scale(const Tensor& a, double c) {
  Tensor out = Tensor::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

Tensor lincomb(double c0, const Tensor& a, double c1, const Tensor& b) {
  require(a.same_shape(b), "lincomb: shape mismatch");
  Tensor out = Tensor::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c0 * a[i] + c1 * b[i];
  return out;
}

Tensor silu(const Tensor& a) {
  Tensor out = Tensor::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a[i] / (1.0 + std::exp(-a[i]));
  }
  return out;
}

Tensor silu_grad(const Tensor& a) {
  Tensor out = Tensor::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-a[i]));
    out[i] = s * (1.0 + a[i] * (1.0 - s));
  }
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = Tensor::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
  return out;
}

double sum(const Tensor& a) {
  return std::accumulate(a.data(), a.data() + a.size(), 0.0);
}

double mean(const Tensor& a) {
  require(a.size() > 0, "mean: empty tensor");
  return sum(a) / static_cast<double>(a.size());
}

double sumsq(const Tensor& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
  return s;
}

double dot(const Tensor& a, const Tensor& b) {
  require(a.size() == b.size(), "dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  require(w.rank() == 2, "affine: weight must be rank 2");
  require(x.cols() == w.rows(), "affine: inner dimension mismatch");
  require(b.size() == w.cols(), "affine: bias size mismatch");
  const std::size_t m = x.rows(), k = x.cols(), n = w.cols();
  Tensor out({m, n});
  ConstMatMap xm(x.data(), m, k);
  ConstMatMap wm(w.data(), k, n);
  MatMap om(out.data(), m, n);
  om.noalias() = xm * wm;
  Eigen::Map<const Eigen::RowVectorXd> bv(b.data(), n);
  om.rowwise() += bv;
  return out;
}

Tensor affine_grad_x(const Tensor& g, const Tensor& w) {
  const std::size_t m = g.rows(), n = g.cols(), k = w.rows();
  require(w.cols() == n, "affine_grad_x: shape mismatch");
  Tensor out({m, k});
  ConstMatMap gm(g.data(), m, n);
  ConstMatMap wm(w.data(), k, n);
  MatMap om(out.data(), m, k);
  om.noalias() = gm * wm.transpose();
  return out;
}

Tensor affine_grad_w(const Tensor& x, const Tensor& g) {
  const std::size_t m = x.rows(), k = x.cols(), n = g.cols();
  require(g.rows() == m, "affine_grad_w: shape mismatch");
  Tensor out({k, n});
  ConstMatMap xm(x.data(), m, k);
  ConstMatMap gm(g.data(), m, n);
  MatMap om(out.data(), k, n);
  om.noalias() = xm.transpose() * gm;
  return out;
}

Tensor affine_grad_b(const Tensor& g) {
  const std::size_t m = g.rows(), n = g.cols();
  Tensor out({n});
  ConstMatMap gm(g.data(), m, n);
  Eigen::Map<Eigen::RowVectorXd> ov(out.data(), n);
  ov = gm.colwise().sum();
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require(a.rows() == b.rows(), "concat_cols: row count mismatch");
  const std::size_t m = a.rows(), ca = a.cols(), cb = b.cols();
  Tensor out({m, ca + cb});
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(a.data() + i * ca, ca, out.data() + i * (ca + cb));
    std::copy_n(b.data() + i * cb, cb, out.data() + i * (ca + cb) + ca);
  }
  return out;
}

Tensor zero_center(const Tensor& x, std::size_t n, std::size_t d) {
  require(x.cols() == n * d, "zero_center: row length is not n*d");
  Tensor out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += row[i * d + j];
      m /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) row[i * d + j] -= m;
    }
  }
  return out;
}

Tensor tile_rows(const Tensor& row_vec, std::size_t rows) {
  require(row_vec.rank() == 1, "tile_rows: expected rank-1 input");
  const std::size_t c = row_vec.size();
  Tensor out({rows, c});
  for (std::size_t i = 0; i < rows; ++i) {
    std::copy_n(row_vec.data(), c, out.data() + i * c);
  }
  return out;
}

Tensor randn(RngStream& stream, std::vector<std::size_t> shape) {
  Tensor out(std::move(shape));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stream.normal();
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.size() == b.size(), "max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace dikl
