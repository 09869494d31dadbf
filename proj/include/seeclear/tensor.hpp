#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seeclear {

using Shape = std::vector<std::size_t>;

/// Raised whenever operand shapes are incompatible.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string shape_to_string(const Shape& shape);
std::size_t shape_product(const Shape& shape);

/// Dense row-major tensor of doubles.
///
/// Rank-2 tensors are matrices (rows x cols); frames are rank 3
/// (channels, rows, cols) and clips rank 4 (frames, channels, rows, cols).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }

  /// Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const;

  /// Slice `index` along axis 0 (drops that axis).
  Tensor slice(std::size_t index) const;
  void set_slice(std::size_t index, const Tensor& value);

  bool all_finite() const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Stack equally shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> parts);
std::vector<Tensor> unstack(const Tensor& t);

/// Concatenate along axis 0 (rank >= 1, trailing dims equal).
Tensor concat_rows(std::span<const Tensor> parts);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& m);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
void add_inplace(Tensor& a, const Tensor& b);

double max_abs_diff(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& a);

/// Numerically stable row-wise softmax of a matrix.
Tensor softmax_rows(const Tensor& m);

Tensor relu(const Tensor& t);

/// Channel-first map (C,H,W) <-> token matrix (H*W, C).
Tensor to_tokens(const Tensor& chw);
Tensor from_tokens(const Tensor& tokens, std::size_t height, std::size_t width);

}  // namespace seeclear
