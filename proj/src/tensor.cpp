#include "seeclear/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace seeclear {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

std::size_t shape_product(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {
  for (auto d : shape_) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive: " + shape_to_string(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive: " + shape_to_string(shape_));
  }
  if (data_.size() != shape_product(shape_)) {
    throw DimensionError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_to_string(shape_));
  }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_to_string(shape_));
  }
  return shape_[axis];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_product(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::slice(std::size_t index) const {
  if (rank() < 2 || index >= shape_[0]) throw DimensionError("slice index out of range");
  Shape inner(shape_.begin() + 1, shape_.end());
  const std::size_t n = shape_product(inner);
  std::vector<double> d(data_.begin() + static_cast<std::ptrdiff_t>(index * n),
                        data_.begin() + static_cast<std::ptrdiff_t>((index + 1) * n));
  return Tensor(std::move(inner), std::move(d));
}

void Tensor::set_slice(std::size_t index, const Tensor& value) {
  if (rank() < 2 || index >= shape_[0]) throw DimensionError("slice index out of range");
  if (!std::equal(shape_.begin() + 1, shape_.end(), value.shape().begin(), value.shape().end())) {
    throw DimensionError("slice shape " + shape_to_string(value.shape()) + " does not fit " +
                         shape_to_string(shape_));
  }
  std::copy(value.values().begin(), value.values().end(),
            data_.begin() + static_cast<std::ptrdiff_t>(index * value.size()));
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("stack of zero tensors");
  Shape shape{parts.size()};
  shape.insert(shape.end(), parts[0].shape().begin(), parts[0].shape().end());
  std::vector<double> data;
  data.reserve(shape_product(shape));
  for (const auto& p : parts) {
    if (p.shape() != parts[0].shape()) throw DimensionError("stack of unequal shapes");
    data.insert(data.end(), p.values().begin(), p.values().end());
  }
  return Tensor(std::move(shape), std::move(data));
}

std::vector<Tensor> unstack(const Tensor& t) {
  std::vector<Tensor> out;
  out.reserve(t.dim(0));
  for (std::size_t i = 0; i < t.dim(0); ++i) out.push_back(t.slice(i));
  return out;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  std::size_t rows = 0;
  std::vector<double> data;
  for (const auto& p : parts) {
    if (!std::equal(tail.begin(), tail.end(), p.shape().begin() + 1, p.shape().end())) {
      throw DimensionError("concat of incompatible shapes");
    }
    rows += p.dim(0);
    data.insert(data.end(), p.values().begin(), p.values().end());
  }
  Shape shape{rows};
  shape.insert(shape.end(), tail.begin(), tail.end());
  return Tensor(std::move(shape), std::move(data));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul " + shape_to_string(a.shape()) + " x " + shape_to_string(b.shape()));
  }
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  Tensor out({n, m});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* row = po + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += av * brow[j];
    }
  }
  return out;
}

Tensor transpose(const Tensor& m) {
  if (m.rank() != 2) throw DimensionError("transpose needs a matrix");
  Tensor out({m.dim(1), m.dim(0)});
  for (std::size_t i = 0; i < m.dim(0); ++i)
    for (std::size_t j = 0; j < m.dim(1); ++j) out.at(j, i) = m.at(i, j);
  return out;
}

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  add_inplace(out, b);
  return out;
}

void add_inplace(Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same(a, b, "sub");
  Tensor out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same(a, b, "hadamard");
  Tensor out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = a;
  for (auto& v : out.values()) v *= s;
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

Tensor softmax_rows(const Tensor& m) {
  if (m.rank() != 2) throw DimensionError("softmax_rows needs a matrix");
  Tensor out = m;
  const std::size_t cols = m.dim(1);
  for (std::size_t r = 0; r < m.dim(0); ++r) {
    double* row = out.data().data() + r * cols;
    const double hi = *std::max_element(row, row + cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] = std::exp(row[c] - hi);
      sum += row[c];
    }
    for (std::size_t c = 0; c < cols; ++c) row[c] /= sum;
  }
  return out;
}

Tensor relu(const Tensor& t) {
  Tensor out = t;
  for (auto& v : out.values()) v = std::max(v, 0.0);
  return out;
}

Tensor to_tokens(const Tensor& chw) {
  if (chw.rank() != 3) throw DimensionError("to_tokens needs (C,H,W)");
  const std::size_t c = chw.dim(0), hw = chw.dim(1) * chw.dim(2);
  Tensor out({hw, c});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t p = 0; p < hw; ++p) out[p * c + ch] = chw[ch * hw + p];
  return out;
}

Tensor from_tokens(const Tensor& tokens, std::size_t height, std::size_t width) {
  if (tokens.rank() != 2 || tokens.dim(0) != height * width) {
    throw DimensionError("from_tokens: " + shape_to_string(tokens.shape()) + " is not " +
                         std::to_string(height * width) + " tokens");
  }
  const std::size_t c = tokens.dim(1), hw = height * width;
  Tensor out({c, height, width});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t p = 0; p < hw; ++p) out[ch * hw + p] = tokens[p * c + ch];
  return out;
}

}  // namespace seeclear
