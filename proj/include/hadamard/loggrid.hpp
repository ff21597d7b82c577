#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hadamard/tensor.hpp"

namespace hadamard {

/// Uniform tensor grid in log coordinates. Per axis the nodes are
/// t(i) = t0 + i*dt, i = 0..n-1, and the physical coordinate on a quadrant is
/// x_j = e_j * exp(t_j), so every node stays strictly off the coordinate
/// hyperplanes.
class LogGrid {
public:
  LogGrid() = default;

  LogGrid(int dim, std::vector<double> t0, std::vector<double> dt, Shape n)
      : dim_(dim), t0_(std::move(t0)), dt_(std::move(dt)), n_(std::move(n)) {
    if (dim_ < 1) throw std::invalid_argument("LogGrid: dim must be positive");
    if (t0_.size() != static_cast<std::size_t>(dim_) || dt_.size() != static_cast<std::size_t>(dim_) ||
        n_.size() != static_cast<std::size_t>(dim_))
      throw std::invalid_argument("LogGrid: per-axis parameter lists must have length dim");
    for (int j = 0; j < dim_; ++j) {
      if (!(dt_[static_cast<std::size_t>(j)] > 0.0))
        throw std::invalid_argument("LogGrid: dt must be positive on every axis");
      if (n_[static_cast<std::size_t>(j)] < 8)
        throw std::invalid_argument("LogGrid: need at least 8 nodes per axis");
      const double lo = node(j, 0);
      const double hi = node(j, n_[static_cast<std::size_t>(j)] - 1);
      // exp must stay positive and finite at every node
      if (lo < -700.0 || hi > 700.0)
        throw std::invalid_argument("LogGrid: log window exceeds the representable range [-700, 700]");
    }
  }

  int dim() const { return dim_; }
  double t0(int axis) const { return t0_[static_cast<std::size_t>(axis)]; }
  double dt(int axis) const { return dt_[static_cast<std::size_t>(axis)]; }
  Index n(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
  const Shape& extents() const { return n_; }
  Index total_nodes() const { return shape_size(n_); }

  double node(int axis, Index i) const {
    return t0_[static_cast<std::size_t>(axis)] + static_cast<double>(i) * dt_[static_cast<std::size_t>(axis)];
  }

  double cell_volume() const {
    double v = 1.0;
    for (double h : dt_) v *= h;
    return v;
  }

  bool same_as(const LogGrid& o) const { return dim_ == o.dim_ && t0_ == o.t0_ && dt_ == o.dt_ && n_ == o.n_; }

private:
  int dim_ = 0;
  std::vector<double> t0_;
  std::vector<double> dt_;
  Shape n_;
};

inline LogGrid make_grid(int dim, const std::vector<double>& t0, const std::vector<double>& dt,
                         const std::vector<Index>& n) {
  return LogGrid(dim, t0, dt, Shape(n.begin(), n.end()));
}

/// Symmetric window [-w, w) with n nodes per axis; dt = 2w/n, so the origin
/// sits on a node whenever n is even. This is the layout the convolution
/// engines expect.
inline LogGrid symmetric_grid(int dim, double half_width, Index n) {
  const double dt = 2.0 * half_width / static_cast<double>(n);
  return LogGrid(dim, std::vector<double>(static_cast<std::size_t>(dim), -half_width),
                 std::vector<double>(static_cast<std::size_t>(dim), dt), Shape(static_cast<std::size_t>(dim), n));
}

/// A choice of open quadrant of R^d \ Z0: entries are +1 or -1 per axis.
class SignVector {
public:
  SignVector() = default;

  explicit SignVector(std::vector<int> e) : e_(std::move(e)) {
    for (int s : e_)
      if (s != 1 && s != -1) throw std::invalid_argument("SignVector: entries must be +1 or -1");
  }

  static SignVector positive(int dim) { return SignVector(std::vector<int>(static_cast<std::size_t>(dim), 1)); }

  /// Bit j set means axis j is negative.
  static SignVector from_mask(int dim, unsigned mask) {
    std::vector<int> e(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) e[static_cast<std::size_t>(j)] = (mask >> j) & 1u ? -1 : 1;
    return SignVector(std::move(e));
  }

  static SignVector of_point(std::span<const double> x) {
    std::vector<int> e(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] == 0.0) throw std::invalid_argument("SignVector: point lies on a coordinate hyperplane");
      e[j] = x[j] > 0.0 ? 1 : -1;
    }
    return SignVector(std::move(e));
  }

  int dim() const { return static_cast<int>(e_.size()); }
  int operator[](int j) const { return e_[static_cast<std::size_t>(j)]; }
  const std::vector<int>& entries() const { return e_; }

  /// sigma(e) = prod_j e_j
  int sigma() const {
    int s = 1;
    for (int v : e_) s *= v;
    return s;
  }

  unsigned mask() const {
    unsigned m = 0;
    for (int j = 0; j < dim(); ++j)
      if (e_[static_cast<std::size_t>(j)] < 0) m |= 1u << j;
    return m;
  }

  SignVector times(const SignVector& o) const {
    if (o.dim() != dim()) throw std::invalid_argument("SignVector: dimension mismatch");
    std::vector<int> e(e_.size());
    for (std::size_t j = 0; j < e_.size(); ++j) e[j] = e_[j] * o.e_[j];
    return SignVector(std::move(e));
  }

  bool operator==(const SignVector& o) const { return e_ == o.e_; }

private:
  std::vector<int> e_;
};

/// Scalar field sampled on one quadrant: values[i] = f(e * exp(t(i))).
struct QuadrantFn {
  LogGrid grid;
  SignVector quadrant;
  Tensor values;
};

/// The same samples re-labelled with log-coordinate axes: g(t) = f(e*exp(t)).
struct LogField {
  LogGrid grid;
  Tensor values;
};

inline void physical_point(const LogGrid& grid, const SignVector& e, std::span<const Index> idx,
                           std::span<double> x_out) {
  for (int j = 0; j < grid.dim(); ++j)
    x_out[static_cast<std::size_t>(j)] = static_cast<double>(e[j]) * std::exp(grid.node(j, idx[static_cast<std::size_t>(j)]));
}

/// Samples f on the quadrant grid; errors name the first non-finite node.
template <class F>
inline QuadrantFn sample(F&& f, const LogGrid& grid, const SignVector& e) {
  if (e.dim() != grid.dim()) throw std::invalid_argument("sample: quadrant dimension mismatch");
  QuadrantFn out{grid, e, Tensor(grid.extents())};
  std::vector<Index> idx(static_cast<std::size_t>(grid.dim()), 0);
  std::vector<double> x(static_cast<std::size_t>(grid.dim()));
  Index lin = 0;
  do {
    physical_point(grid, e, idx, x);
    const double v = f(std::span<const double>(x));
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "sample: non-finite value at node (";
      for (std::size_t j = 0; j < idx.size(); ++j) msg << (j ? "," : "") << idx[j];
      msg << "), x = (";
      for (std::size_t j = 0; j < x.size(); ++j) msg << (j ? "," : "") << x[j];
      msg << ")";
      throw std::invalid_argument(msg.str());
    }
    out.values[lin++] = v;
  } while (next_multi_index(idx, grid.extents()));
  return out;
}

inline LogField to_log(const QuadrantFn& f) { return LogField{f.grid, f.values}; }

inline QuadrantFn to_linear(const LogField& g, const SignVector& e) {
  if (e.dim() != g.grid.dim()) throw std::invalid_argument("to_linear: quadrant dimension mismatch");
  return QuadrantFn{g.grid, e, g.values};
}

/// Function on R^d \ Z0 stored per quadrant; all 2^d parts share one grid
/// (absent quadrants are explicit zero tensors).
struct PiecewiseFn {
  LogGrid grid;
  std::vector<QuadrantFn> parts;  // indexed by SignVector::mask()
  std::vector<std::string> warnings;

  QuadrantFn& part(const SignVector& e) { return parts[e.mask()]; }
  const QuadrantFn& part(const SignVector& e) const { return parts[e.mask()]; }
  QuadrantFn& part(unsigned mask) { return parts[mask]; }
  const QuadrantFn& part(unsigned mask) const { return parts[mask]; }
  unsigned quadrant_count() const { return static_cast<unsigned>(parts.size()); }
};

inline PiecewiseFn make_piecewise(const LogGrid& grid) {
  PiecewiseFn out;
  out.grid = grid;
  const unsigned q = 1u << grid.dim();
  out.parts.reserve(q);
  for (unsigned m = 0; m < q; ++m)
    out.parts.push_back(QuadrantFn{grid, SignVector::from_mask(grid.dim(), m), Tensor(grid.extents())});
  return out;
}

inline PiecewiseFn piecewise_from(QuadrantFn f) {
  PiecewiseFn out = make_piecewise(f.grid);
  out.parts[f.quadrant.mask()] = std::move(f);
  return out;
}

/// omega(kx) = prod_j (e^{k x_j} + e^{-k x_j}); satisfies
/// e^{k sum|x_j|} <= omega(kx) <= 2^d e^{k sum|x_j|}.
inline double weight_omega(std::span<const double> x, int k) {
  if (k < 1) throw std::invalid_argument("weight_omega: k must be >= 1");
  double lsum = 0.0;
  for (double xj : x) lsum += std::abs(xj) * static_cast<double>(k);
  if (lsum > 690.0) throw window_error("weight_omega: exponential weight overflows for this window and k");
  double w = 1.0;
  for (double xj : x) {
    const double z = static_cast<double>(k) * xj;
    w *= std::exp(z) + std::exp(-z);
  }
  return w;
}

namespace detail {

inline double int_pow(double base, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= base;
  return r;
}

// (|y|^{2k} + |y|^{-2k}) with |y| Euclidean; k = 0 gives exactly 2.
inline double decay_weight(double r2, int k) {
  if (k == 0) return 2.0;
  const double p = int_pow(r2, k);
  return p + 1.0 / p;
}

}  // namespace detail

/// Finite-grid proxy of sup |f(y)| (|y|^{2k} + |y|^{-2k}).
inline double decay_norm(const QuadrantFn& f, int k) {
  if (k < 0) throw std::invalid_argument("decay_norm: k must be >= 0");
  const LogGrid& g = f.grid;
  double best = 0.0;
  std::vector<Index> idx(static_cast<std::size_t>(g.dim()), 0);
  Index lin = 0;
  do {
    double r2 = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
      const double xj = std::exp(g.node(j, idx[static_cast<std::size_t>(j)]));
      r2 += xj * xj;
    }
    best = std::max(best, std::abs(f.values[lin++]) * detail::decay_weight(r2, k));
  } while (next_multi_index(idx, g.extents()));
  return best;
}

inline double decay_norm(const PiecewiseFn& f, int k) {
  double best = 0.0;
  for (const auto& p : f.parts) best = std::max(best, decay_norm(p, k));
  return best;
}

namespace detail {

// Per-axis trapezoid weights combined with the exp Jacobian of x = exp(t).
inline std::vector<std::vector<double>> quadrature_factors(const LogGrid& g) {
  std::vector<std::vector<double>> fac(static_cast<std::size_t>(g.dim()));
  for (int j = 0; j < g.dim(); ++j) {
    auto& a = fac[static_cast<std::size_t>(j)];
    const Index n = g.n(j);
    a.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      a[static_cast<std::size_t>(i)] = w * std::exp(g.node(j, i));
    }
  }
  return fac;
}

}  // namespace detail

/// Trapezoid quadrature of f over its quadrant via the log substitution
/// int f(x) dx = int f(e*exp(u)) e^{sum u_j} du.
inline double integrate(const QuadrantFn& f) {
  const LogGrid& g = f.grid;
  const auto fac = detail::quadrature_factors(g);
  double acc = 0.0;
  std::vector<Index> idx(static_cast<std::size_t>(g.dim()), 0);
  Index lin = 0;
  do {
    double w = 1.0;
    for (int j = 0; j < g.dim(); ++j) w *= fac[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    acc += w * f.values[lin++];
  } while (next_multi_index(idx, g.extents()));
  return acc * g.cell_volume();
}

/// Same quadrature applied to the pointwise product of two fields.
inline double integrate_product(const QuadrantFn& a, const QuadrantFn& b) {
  if (!a.grid.same_as(b.grid) || !(a.quadrant == b.quadrant))
    throw std::invalid_argument("integrate_product: grid or quadrant mismatch");
  const LogGrid& g = a.grid;
  const auto fac = detail::quadrature_factors(g);
  double acc = 0.0;
  std::vector<Index> idx(static_cast<std::size_t>(g.dim()), 0);
  Index lin = 0;
  do {
    double w = 1.0;
    for (int j = 0; j < g.dim(); ++j) w *= fac[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    acc += w * a.values[lin] * b.values[lin];
    ++lin;
  } while (next_multi_index(idx, g.extents()));
  return acc * g.cell_volume();
}

}  // namespace hadamard
