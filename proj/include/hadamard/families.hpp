#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hadamard/euler.hpp"
#include "hadamard/loggrid.hpp"

namespace hadamard {

namespace detail {

// g(u) = exp(-(u-mu)^2/(2 s^2)); g^(m) = p_m(z) g with p_0 = 1 and
// p_{m+1} = p_m' - (z/s^2) p_m, z = u - mu.
inline double gauss_log_derivative(double u, double mu, double s, int m) {
  const double z = u - mu;
  const double inv = 1.0 / (s * s);
  std::vector<double> p{1.0};
  for (int r = 0; r < m; ++r) {
    std::vector<double> next(p.size() + 1, 0.0);
    for (std::size_t k = 0; k + 1 < p.size() + 1 && k < p.size(); ++k) next[k + 1] -= inv * p[k];
    for (std::size_t k = 1; k < p.size(); ++k) next[k - 1] += static_cast<double>(k) * p[k];
    p = std::move(next);
  }
  double poly = 0.0;
  for (std::size_t k = p.size(); k-- > 0;) poly = poly * z + p[k];
  return poly * std::exp(-0.5 * z * z * inv);
}

// g(u) = exp(-2 cosh u); g^(m) = q_m g with q_{m+1} = q_m' - 2 sinh(u) q_m.
// q_m is tracked exactly as a polynomial in (sinh u, cosh u).
inline double exp2cosh_derivative(double u, int m) {
  std::map<std::pair<int, int>, double> q{{{0, 0}, 1.0}};
  for (int r = 0; r < m; ++r) {
    std::map<std::pair<int, int>, double> next;
    for (const auto& [ab, c] : q) {
      const auto [a, b] = ab;
      if (a > 0) next[{a - 1, b + 1}] += static_cast<double>(a) * c;
      if (b > 0) next[{a + 1, b - 1}] += static_cast<double>(b) * c;
      next[{a + 1, b}] -= 2.0 * c;
    }
    q = std::move(next);
  }
  const double sh = std::sinh(u), ch = std::cosh(u);
  double acc = 0.0;
  for (const auto& [ab, c] : q) acc += c * int_pow(sh, ab.first) * int_pow(ch, ab.second);
  return acc * std::exp(-2.0 * ch);
}

// 4-point Lagrange interpolation at fractional position f in [0, 1) between
// nodes 0 and 1 of the window {-1, 0, 1, 2}.
inline void cubic_weights(double f, double w[4]) {
  w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
  w[1] = (f * f - 1.0) * (f - 2.0) * 0.5;
  w[2] = -f * (f + 1.0) * (f - 2.0) * 0.5;
  w[3] = f * (f * f - 1.0) / 6.0;
}

}  // namespace detail

/// One sampled axis of a "table" density: values on a uniform log lattice,
/// zero outside the declared support.
struct TableAxis {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> v;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Scalar profile of one log coordinate. Built-in kinds carry closed-form
/// derivatives of every order; `custom` profiles only support evaluation.
class LogProfile {
public:
  enum class Kind { gauss, exp2cosh, expo, table, custom };

  static LogProfile gauss(double mu, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("LogProfile::gauss: width must be positive");
    LogProfile p;
    p.kind_ = Kind::gauss;
    p.mu_ = mu;
    p.s_ = s;
    return p;
  }

  /// u -> exp(-2 cosh u), i.e. exp(-(|x| + 1/|x|)) in physical coordinates.
  static LogProfile exp2cosh() {
    LogProfile p;
    p.kind_ = Kind::exp2cosh;
    return p;
  }

  /// u -> exp(c u), i.e. |x|^c.
  static LogProfile expo(double c) {
    LogProfile p;
    p.kind_ = Kind::expo;
    p.c_ = c;
    return p;
  }

  static LogProfile table(TableAxis t) {
    if (t.v.size() < 4) throw std::invalid_argument("LogProfile::table: need at least 4 samples");
    if (!(t.dt > 0.0)) throw std::invalid_argument("LogProfile::table: dt must be positive");
    LogProfile p;
    p.kind_ = Kind::table;
    p.table_ = std::make_shared<TableAxis>(std::move(t));
    return p;
  }

  static LogProfile custom(std::function<double(double)> f) {
    LogProfile p;
    p.kind_ = Kind::custom;
    p.f_ = std::make_shared<std::function<double(double)>>(std::move(f));
    return p;
  }

  Kind kind() const { return kind_; }

  double value(double u) const {
    switch (kind_) {
      case Kind::gauss: {
        const double z = (u - mu_) / s_;
        return std::exp(-0.5 * z * z);
      }
      case Kind::exp2cosh:
        return std::exp(-2.0 * std::cosh(u));
      case Kind::expo:
        return std::exp(c_ * u);
      case Kind::table:
        return table_value(u);
      case Kind::custom:
        return (*f_)(u);
    }
    return 0.0;
  }

  /// m-th derivative in the log coordinate.
  double derivative(double u, int m) const {
    if (m == 0) return value(u);
    switch (kind_) {
      case Kind::gauss:
        return detail::gauss_log_derivative(u, mu_, s_, m);
      case Kind::exp2cosh:
        return detail::exp2cosh_derivative(u, m);
      case Kind::expo:
        return detail::int_pow(c_, m) * std::exp(c_ * u);
      case Kind::table:
        throw std::invalid_argument("LogProfile::table: sampled profiles cannot be differentiated");
      case Kind::custom:
        // order-4 central stencil, applied recursively; adequate for low m
        {
          const double h = 2.0e-2;
          const double fm2 = derivative(u - 2.0 * h, m - 1), fm1 = derivative(u - h, m - 1);
          const double fp1 = derivative(u + h, m - 1), fp2 = derivative(u + 2.0 * h, m - 1);
          return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
        }
    }
    return 0.0;
  }

  bool has_analytic_derivatives() const { return kind_ != Kind::table && kind_ != Kind::custom; }

  /// Support of the profile in log coordinates ([-inf, inf] unless tabulated).
  std::pair<double, double> support_log() const {
    if (kind_ == Kind::table) return {table_->lo, table_->hi};
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }

private:
  double table_value(double u) const {
    const TableAxis& t = *table_;
    if (u < t.lo || u > t.hi) return 0.0;
    const auto n = static_cast<Index>(t.v.size());
    const double pos = (u - t.t0) / t.dt;
    if (pos < 0.0 || pos > static_cast<double>(n - 1)) return 0.0;
    auto k = static_cast<Index>(std::floor(pos));
    double f = pos - static_cast<double>(k);
    if (k <= 0) {
      k = 1;
      f = pos - 1.0;
    } else if (k >= n - 2) {
      k = n - 3;
      f = pos - static_cast<double>(k);
    }
    double w[4];
    detail::cubic_weights(f, w);
    double acc = 0.0;
    for (int r = -1; r <= 2; ++r) {
      const Index i = k + r;
      if (i >= 0 && i < n) acc += w[r + 1] * t.v[static_cast<std::size_t>(i)];
    }
    return acc;
  }

  Kind kind_ = Kind::custom;
  double mu_ = 0.0, s_ = 1.0, c_ = 0.0;
  std::shared_ptr<TableAxis> table_;
  std::shared_ptr<std::function<double(double)>> f_;
};

/// Separable function of the log coordinates: weight * prod_j g_j(u_j).
struct SeparableLogFn {
  std::vector<LogProfile> axes;
  double weight = 1.0;
};

inline double value(const SeparableLogFn& f, std::span<const double> u) {
  double acc = f.weight;
  for (std::size_t j = 0; j < f.axes.size(); ++j) acc *= f.axes[j].value(u[j]);
  return acc;
}

/// ((theta*)^beta f)(u) with theta* = -theta - 1 acting axis-wise:
/// per axis the factor is (-1)^{b} sum_m C(b, m) g^(m)(u).
inline double dual_word_value(const SeparableLogFn& f, const MultiIndex& beta, std::span<const double> u) {
  double acc = f.weight;
  for (std::size_t j = 0; j < f.axes.size(); ++j) {
    const int b = beta[static_cast<int>(j)];
    double factor = 0.0;
    for (int m = 0; m <= b; ++m) factor += detail::binomial(b, m) * f.axes[j].derivative(u[j], m);
    if (b % 2) factor = -factor;
    acc *= factor;
  }
  return acc;
}

/// Samples a separable log function on a quadrant grid via per-axis arrays.
inline QuadrantFn sample_separable(const SeparableLogFn& f, const LogGrid& grid, const SignVector& e) {
  if (static_cast<int>(f.axes.size()) != grid.dim())
    throw std::invalid_argument("sample_separable: dimension mismatch");
  std::vector<std::vector<double>> ax(static_cast<std::size_t>(grid.dim()));
  for (int j = 0; j < grid.dim(); ++j) {
    auto& a = ax[static_cast<std::size_t>(j)];
    a.resize(static_cast<std::size_t>(grid.n(j)));
    for (Index i = 0; i < grid.n(j); ++i) a[static_cast<std::size_t>(i)] = f.axes[static_cast<std::size_t>(j)].value(grid.node(j, i));
  }
  QuadrantFn out{grid, e, Tensor(grid.extents())};
  std::vector<Index> idx(static_cast<std::size_t>(grid.dim()), 0);
  Index lin = 0;
  do {
    double v = f.weight;
    for (int j = 0; j < grid.dim(); ++j) v *= ax[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    out.values[lin++] = v;
  } while (next_multi_index(idx, grid.extents()));
  return out;
}

/// Smooth evaluable test function on R^d \ Z0, one separable piece per
/// quadrant (absent quadrants are identically zero).
struct TestFunction {
  int dim = 0;
  std::vector<std::optional<SeparableLogFn>> parts;  // by quadrant mask

  static TestFunction zero(int dim) {
    TestFunction f;
    f.dim = dim;
    f.parts.assign(1u << dim, std::nullopt);
    return f;
  }

  static TestFunction on_quadrant(const SignVector& e, SeparableLogFn fn) {
    TestFunction f = zero(e.dim());
    f.parts[e.mask()] = std::move(fn);
    return f;
  }
};

/// Gaussian bump in log coordinates on one quadrant.
inline TestFunction bump_gauss(const SignVector& e, std::span<const double> mu, std::span<const double> s) {
  SeparableLogFn fn;
  for (int j = 0; j < e.dim(); ++j)
    fn.axes.push_back(LogProfile::gauss(mu[static_cast<std::size_t>(j)], s[static_cast<std::size_t>(j)]));
  return TestFunction::on_quadrant(e, std::move(fn));
}

/// The monomial x^alpha as a function on R^d \ Z0: on quadrant e it equals
/// (prod e_j^{alpha_j}) exp(alpha . u).
inline TestFunction monomial(int dim, const MultiIndex& alpha) {
  TestFunction f = TestFunction::zero(dim);
  for (unsigned m = 0; m < (1u << dim); ++m) {
    const SignVector e = SignVector::from_mask(dim, m);
    SeparableLogFn fn;
    for (int j = 0; j < dim; ++j) {
      fn.axes.push_back(LogProfile::expo(static_cast<double>(alpha[j])));
      if (e[j] < 0 && alpha[j] % 2) fn.weight = -fn.weight;
    }
    f.parts[m] = std::move(fn);
  }
  return f;
}

inline double test_value(const TestFunction& f, std::span<const double> x) {
  const SignVector e = SignVector::of_point(x);
  const auto& part = f.parts[e.mask()];
  if (!part) return 0.0;
  std::vector<double> u(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) u[j] = std::log(std::abs(x[j]));
  return value(*part, u);
}

inline double test_dual_word(const TestFunction& f, const MultiIndex& beta, std::span<const double> x) {
  const SignVector e = SignVector::of_point(x);
  const auto& part = f.parts[e.mask()];
  if (!part) return 0.0;
  std::vector<double> u(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) u[j] = std::log(std::abs(x[j]));
  return dual_word_value(*part, beta, u);
}

inline PiecewiseFn sample_piecewise(const TestFunction& f, const LogGrid& grid) {
  if (f.dim != grid.dim()) throw std::invalid_argument("sample_piecewise: dimension mismatch");
  PiecewiseFn out = make_piecewise(grid);
  for (unsigned m = 0; m < out.quadrant_count(); ++m)
    if (f.parts[m]) out.parts[m] = sample_separable(*f.parts[m], grid, SignVector::from_mask(grid.dim(), m));
  return out;
}

/// Samples theta_axis f from the analytic axis derivative (used by probes
/// that need the exact Euler image of a test function).
inline PiecewiseFn sample_theta_applied(const TestFunction& f, int axis, const LogGrid& grid) {
  PiecewiseFn out = make_piecewise(grid);
  for (unsigned m = 0; m < out.quadrant_count(); ++m) {
    if (!f.parts[m]) continue;
    const auto& fn = *f.parts[m];
    std::vector<std::vector<double>> ax(static_cast<std::size_t>(grid.dim()));
    for (int j = 0; j < grid.dim(); ++j) {
      auto& a = ax[static_cast<std::size_t>(j)];
      a.resize(static_cast<std::size_t>(grid.n(j)));
      for (Index i = 0; i < grid.n(j); ++i)
        a[static_cast<std::size_t>(i)] = fn.axes[static_cast<std::size_t>(j)].derivative(grid.node(j, i), j == axis ? 1 : 0);
    }
    Tensor& t = out.parts[m].values;
    std::vector<Index> idx(static_cast<std::size_t>(grid.dim()), 0);
    Index lin = 0;
    do {
      double v = fn.weight;
      for (int j = 0; j < grid.dim(); ++j) v *= ax[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      t[lin++] = v;
    } while (next_multi_index(idx, grid.extents()));
  }
  return out;
}

}  // namespace hadamard
