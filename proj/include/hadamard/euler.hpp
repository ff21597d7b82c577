#pragma once

#include <map>
#include <span>
#include <vector>

#include "hadamard/fft.hpp"
#include "hadamard/loggrid.hpp"
#include "hadamard/tensor.hpp"

namespace hadamard {

/// Multi-index alpha in N_0^d.
class MultiIndex {
public:
  MultiIndex() = default;

  explicit MultiIndex(std::vector<int> a) : a_(std::move(a)) {
    for (int v : a_)
      if (v < 0) throw std::invalid_argument("MultiIndex: entries must be nonnegative");
  }

  static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(dim), 0)); }

  int dim() const { return static_cast<int>(a_.size()); }
  int operator[](int j) const { return a_[static_cast<std::size_t>(j)]; }
  const std::vector<int>& entries() const { return a_; }

  int order() const {
    int s = 0;
    for (int v : a_) s += v;
    return s;
  }

  bool operator==(const MultiIndex& o) const { return a_ == o.a_; }
  bool operator<(const MultiIndex& o) const { return a_ < o.a_; }

private:
  std::vector<int> a_;
};

namespace detail {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace detail

/// Polynomial P(theta) in the commuting operators theta_j = x_j d/dx_j,
/// stored as a finite coefficient map over monomials theta^gamma.
class EulerPolynomial {
public:
  explicit EulerPolynomial(int dim) : dim_(dim) {
    if (dim_ < 1) throw std::invalid_argument("EulerPolynomial: dim must be positive");
  }

  static EulerPolynomial constant(int dim, double c) {
    EulerPolynomial p(dim);
    p.add_term(MultiIndex::zero(dim), c);
    return p;
  }

  static EulerPolynomial theta(int dim, int axis) {
    EulerPolynomial p(dim);
    std::vector<int> g(static_cast<std::size_t>(dim), 0);
    g[static_cast<std::size_t>(axis)] = 1;
    p.add_term(MultiIndex(std::move(g)), 1.0);
    return p;
  }

  static EulerPolynomial theta_word(const MultiIndex& gamma) {
    EulerPolynomial p(gamma.dim());
    p.add_term(gamma, 1.0);
    return p;
  }

  void add_term(const MultiIndex& gamma, double c) {
    if (gamma.dim() != dim_) throw std::invalid_argument("EulerPolynomial: term dimension mismatch");
    const auto it = terms_.find(gamma.entries());
    if (it == terms_.end()) {
      if (c != 0.0) terms_.emplace(gamma.entries(), c);
      return;
    }
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }

  const std::map<std::vector<int>, double>& terms() const { return terms_; }
  int dim() const { return dim_; }

  /// P evaluated at a point of R^d (the eigenvalue of P(theta) on x^z).
  double eval(std::span<const double> z) const {
    double acc = 0.0;
    for (const auto& [gamma, c] : terms_) {
      double m = c;
      for (std::size_t j = 0; j < gamma.size(); ++j)
        for (int r = 0; r < gamma[j]; ++r) m *= z[j];
      acc += m;
    }
    return acc;
  }

  bool operator==(const EulerPolynomial& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }

private:
  int dim_;
  std::map<std::vector<int>, double> terms_;
};

/// Substitutes theta -> -theta - 1 axis-wise and expands in the monomial
/// basis. Involutive: euler_dual(euler_dual(P)) == P with exact coefficient
/// arithmetic (binomial expansion, no floating-point division).
inline EulerPolynomial euler_dual(const EulerPolynomial& p) {
  EulerPolynomial q(p.dim());
  const int d = p.dim();
  for (const auto& [gamma, c] : p.terms()) {
    std::vector<int> m(static_cast<std::size_t>(d), 0);
    while (true) {
      double coeff = c;
      for (int j = 0; j < d; ++j) {
        const int gj = gamma[static_cast<std::size_t>(j)];
        const int mj = m[static_cast<std::size_t>(j)];
        coeff *= (gj % 2 ? -1.0 : 1.0) * detail::binomial(gj, mj);
      }
      q.add_term(MultiIndex(m), coeff);
      int j = d - 1;
      for (; j >= 0; --j) {
        auto k = static_cast<std::size_t>(j);
        if (++m[k] <= gamma[k]) break;
        m[k] = 0;
      }
      if (j < 0) break;
    }
  }
  return q;
}

enum class DerivMethod { fd4, spectral };

namespace detail {

/// Order-4 first derivative of a sampled line; one-sided order-4 stencils at
/// the window edges (the dominant error source there).
inline void derivative_line_fd4(std::span<const double> in, std::span<double> out, double h) {
  const auto n = static_cast<Index>(in.size());
  const double c = 1.0 / (12.0 * h);
  out[0] = (-25.0 * in[0] + 48.0 * in[1] - 36.0 * in[2] + 16.0 * in[3] - 3.0 * in[4]) * c;
  out[1] = (-3.0 * in[0] - 10.0 * in[1] + 18.0 * in[2] - 6.0 * in[3] + in[4]) * c;
  for (Index i = 2; i < n - 2; ++i)
    out[static_cast<std::size_t>(i)] =
        (in[static_cast<std::size_t>(i - 2)] - 8.0 * in[static_cast<std::size_t>(i - 1)] +
         8.0 * in[static_cast<std::size_t>(i + 1)] - in[static_cast<std::size_t>(i + 2)]) *
        c;
  const auto u = static_cast<std::size_t>(n);
  out[u - 2] = (3.0 * in[u - 1] + 10.0 * in[u - 2] - 18.0 * in[u - 3] + 6.0 * in[u - 4] - in[u - 5]) * c;
  out[u - 1] = (25.0 * in[u - 1] - 48.0 * in[u - 2] + 36.0 * in[u - 3] - 16.0 * in[u - 4] + 3.0 * in[u - 5]) * c;
}

/// Trigonometric first derivative on the periodized window; requires a
/// power-of-two line and samples that vanish at the edges.
inline void derivative_line_spectral(std::span<const double> in, std::span<double> out, double h) {
  const auto n = static_cast<Index>(in.size());
  if (!spectral::is_pow2(n))
    throw std::invalid_argument("spectral derivative: axis size must be a power of two");
  std::vector<spectral::Complex> a(in.begin(), in.end());
  spectral::fft(a, false);
  const double base = 2.0 * std::numbers::pi / (static_cast<double>(n) * h);
  for (Index m = 0; m < n; ++m) {
    double freq = static_cast<double>(m < n / 2 ? m : m - n);
    if (m == n / 2) freq = 0.0;  // Nyquist bin of an odd-order operator
    a[static_cast<std::size_t>(m)] *= spectral::Complex(0.0, base * freq);
  }
  spectral::fft(a, true);
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)].real();
}

}  // namespace detail

/// In-place d/du along `axis` of a log-side sample tensor.
inline void differentiate_axis(Tensor& t, int axis, double h, DerivMethod method) {
  const auto n = static_cast<std::size_t>(t.extent(axis));
  std::vector<double> in(n), out(n);
  for_each_line(t.shape(), axis, [&](Index base, Index stride) {
    for (std::size_t i = 0; i < n; ++i) in[i] = t[base + static_cast<Index>(i) * stride];
    if (method == DerivMethod::fd4)
      detail::derivative_line_fd4(in, out, h);
    else
      detail::derivative_line_spectral(in, out, h);
    for (std::size_t i = 0; i < n; ++i) t[base + static_cast<Index>(i) * stride] = out[i];
  });
}

/// P(theta) f computed on the log side, where theta_j turns into d/du_j.
inline QuadrantFn euler_apply(const EulerPolynomial& p, const QuadrantFn& f, DerivMethod method = DerivMethod::fd4) {
  if (p.dim() != f.grid.dim()) throw std::invalid_argument("euler_apply: dimension mismatch");
  Tensor acc(f.grid.extents());
  for (const auto& [gamma, c] : p.terms()) {
    Tensor work = f.values;
    for (int j = 0; j < p.dim(); ++j)
      for (int r = 0; r < gamma[static_cast<std::size_t>(j)]; ++r) differentiate_axis(work, j, f.grid.dt(j), method);
    acc.add_scaled(work, c);
  }
  return QuadrantFn{f.grid, f.quadrant, std::move(acc)};
}

/// (theta*)^beta f on the log side: per axis, beta_j applications of
/// (-d/du - 1).
inline Tensor apply_dual_word(const Tensor& values, const MultiIndex& beta, const LogGrid& grid, DerivMethod method) {
  Tensor out = values;
  for (int j = 0; j < grid.dim(); ++j) {
    for (int r = 0; r < beta[j]; ++r) {
      Tensor d = out;
      differentiate_axis(d, j, grid.dt(j), method);
      out *= -1.0;
      out.add_scaled(d, -1.0);
    }
  }
  return out;
}

/// Pairing <P(theta) t, phi> evaluated as int t * (P*(theta) phi) dx with the
/// log-substitution trapezoid rule.
inline double euler_pair(const EulerPolynomial& p, const QuadrantFn& t, const QuadrantFn& phi,
                         DerivMethod method = DerivMethod::fd4) {
  if (!t.grid.same_as(phi.grid) || !(t.quadrant == phi.quadrant))
    throw std::invalid_argument("euler_pair: grid or quadrant mismatch");
  const QuadrantFn dual_phi = euler_apply(euler_dual(p), phi, method);
  return integrate_product(t, dual_phi);
}

}  // namespace hadamard
