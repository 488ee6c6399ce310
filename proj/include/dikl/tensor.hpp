#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dikl {

class RngStream;

// Geometry of a particle system: n particles living in d spatial dimensions,
// flattened to rows of length n*d.
struct ParticleShape {
  std::size_t n = 0;
  std::size_t d = 0;
};

// Dense row-major tensor of doubles, rank 0 (scalar), 1, or 2. This is the
// only array type the library uses; Eigen is mapped over the flat buffer for
// the heavy kernels but never exposed.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);

  static Tensor scalar(double v);
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> v);
  static Tensor zeros_like(const Tensor& t);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rank-2 accessors; a rank-1 tensor behaves as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return {data_.data(), data_.size()}; }
  std::span<const double> span() const { return {data_.data(), data_.size()}; }
  std::span<double> row(std::size_t i);
  std::span<const double> row(std::size_t i) const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  double item() const;  // requires size() == 1

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Elementwise and reduction kernels shared by the tape and by plain forward
// evaluation. All of them check shapes and throw std::invalid_argument on a
// mismatch.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
// c0 * a + c1 * b
Tensor lincomb(double c0, const Tensor& a, double c1, const Tensor& b);
Tensor silu(const Tensor& a);
Tensor silu_grad(const Tensor& a);  // d silu / dx, elementwise
Tensor relu(const Tensor& a);

double sum(const Tensor& a);
double mean(const Tensor& a);
double sumsq(const Tensor& a);  // squared L2 norm of the flattened tensor
double dot(const Tensor& a, const Tensor& b);

// x [B, in] * w [in, out] + b [out], row-major GEMM via Eigen.
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);
// Gradients of the affine op given upstream g [B, out].
Tensor affine_grad_x(const Tensor& g, const Tensor& w);
Tensor affine_grad_w(const Tensor& x, const Tensor& g);
Tensor affine_grad_b(const Tensor& g);

// Concatenate along the column axis; rank-1 inputs are treated as one row.
Tensor concat_cols(const Tensor& a, const Tensor& b);

// Interpret each row as n particles in d dimensions and subtract the centre
// of mass per row and spatial coordinate. Idempotent, symmetric projection.
Tensor zero_center(const Tensor& x, std::size_t n, std::size_t d);

// Row r of the result repeats `row_vec` (rank 1) `rows` times.
Tensor tile_rows(const Tensor& row_vec, std::size_t rows);

// Standard normal fill, row-major draw order.
Tensor randn(RngStream& stream, std::vector<std::size_t> shape);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace dikl
