#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hadamard {

using Index = std::int64_t;
using Shape = std::vector<Index>;

/// Numerical-domain failure: the log window cannot represent the requested
/// computation (overflow in a weight, truncated integral mass, ...).
/// The CLI maps this class of failures to exit code 2.
struct window_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Index shape_size(const Shape& s) {
  Index total = 1;
  for (Index n : s) total *= n;
  return total;
}

inline Shape row_major_strides(const Shape& shape) {
  Shape strides(shape.size());
  Index run = 1;
  for (int j = static_cast<int>(shape.size()) - 1; j >= 0; --j) {
    strides[static_cast<std::size_t>(j)] = run;
    run *= shape[static_cast<std::size_t>(j)];
  }
  return strides;
}

/// Advances a row-major odometer; returns false once all indices wrapped.
inline bool next_multi_index(std::vector<Index>& idx, const Shape& shape) {
  for (int j = static_cast<int>(shape.size()) - 1; j >= 0; --j) {
    auto k = static_cast<std::size_t>(j);
    if (++idx[k] < shape[k]) return true;
    idx[k] = 0;
  }
  return false;
}

/// Dense row-major tensor of doubles. Rank equals the spatial dimension and
/// stays small; sizes are validated at construction.
class Tensor {
public:
  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    for (Index n : shape_)
      if (n <= 0) throw std::invalid_argument("Tensor: axis sizes must be positive");
    strides_ = row_major_strides(shape_);
    v_.assign(static_cast<std::size_t>(shape_size(shape_)), 0.0);
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  const Shape& shape() const { return shape_; }
  const Shape& strides() const { return strides_; }
  Index extent(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
  Index size() const { return static_cast<Index>(v_.size()); }

  double operator[](Index i) const { return v_[static_cast<std::size_t>(i)]; }
  double& operator[](Index i) { return v_[static_cast<std::size_t>(i)]; }

  double at(std::span<const Index> idx) const { return v_[static_cast<std::size_t>(offset(idx))]; }
  double& at(std::span<const Index> idx) { return v_[static_cast<std::size_t>(offset(idx))]; }

  Index offset(std::span<const Index> idx) const {
    Index o = 0;
    for (std::size_t j = 0; j < shape_.size(); ++j) o += idx[j] * strides_[j];
    return o;
  }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  const std::vector<double>& values() const { return v_; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  Tensor& operator+=(const Tensor& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Tensor& operator*=(double c) {
    for (double& x : v_) x *= c;
    return *this;
  }
  void add_scaled(const Tensor& o, double c) {
    require_same_shape(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += c * o.v_[i];
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  bool all_zero() const {
    for (double x : v_)
      if (x != 0.0) return false;
    return true;
  }
  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

private:
  void require_same_shape(const Tensor& o) const {
    if (shape_ != o.shape_) throw std::invalid_argument("Tensor: shape mismatch");
  }

  Shape shape_;
  Shape strides_;
  std::vector<double> v_;
};

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Visits every 1-d line along `axis`: fn(base_offset, stride).
template <class F>
inline void for_each_line(const Shape& shape, int axis, F&& fn) {
  const auto strides = row_major_strides(shape);
  const int d = static_cast<int>(shape.size());
  std::vector<Index> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Index base = 0;
    for (int j = 0; j < d; ++j) base += idx[static_cast<std::size_t>(j)] * strides[static_cast<std::size_t>(j)];
    fn(base, strides[static_cast<std::size_t>(axis)]);
    int j = d - 1;
    for (; j >= 0; --j) {
      if (j == axis) continue;
      auto k = static_cast<std::size_t>(j);
      if (++idx[k] < shape[k]) break;
      idx[k] = 0;
    }
    if (j < 0) break;
  }
}

}  // namespace hadamard
