#pragma once

#include <boost/rational.hpp>
#include <cmath>
#include <map>
#include <stdexcept>

#include "hadamard/euler.hpp"

namespace hadamard {

using Rational = boost::rational<long long>;

/// Exact 1-d element sum_k c_k delta^(k) supported at the origin, with
/// rational coefficients. Floats never enter this layer: the identities it
/// verifies are exact and float noise would mask regressions.
class DeltaExpansion {
public:
  DeltaExpansion() = default;

  static DeltaExpansion delta(int k, Rational c = Rational(1)) {
    if (k < 0) throw std::invalid_argument("DeltaExpansion: derivative order must be nonnegative");
    DeltaExpansion u;
    u.add(k, c);
    return u;
  }

  void add(int k, Rational c) {
    if (c == Rational(0)) return;
    auto it = c_.find(k);
    if (it == c_.end()) {
      c_.emplace(k, c);
      return;
    }
    it->second += c;
    if (it->second == Rational(0)) c_.erase(it);
  }

  const std::map<int, Rational>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }

  /// The (k, c) of a single-term expansion c delta^(k).
  std::pair<int, Rational> single_term() const {
    if (c_.size() != 1) throw std::invalid_argument("DeltaExpansion: expected a single delta term");
    return *c_.begin();
  }

  bool operator==(const DeltaExpansion& o) const { return c_ == o.c_; }

  DeltaExpansion operator+(const DeltaExpansion& o) const {
    DeltaExpansion r = *this;
    for (const auto& [k, c] : o.c_) r.add(k, c);
    return r;
  }
  DeltaExpansion operator-(const DeltaExpansion& o) const {
    DeltaExpansion r = *this;
    for (const auto& [k, c] : o.c_) r.add(k, -c);
    return r;
  }
  friend DeltaExpansion operator*(Rational c, const DeltaExpansion& u) {
    DeltaExpansion r;
    if (c == Rational(0)) return r;
    for (const auto& [k, ck] : u.c_) r.add(k, c * ck);
    return r;
  }

private:
  std::map<int, Rational> c_;
};

/// d/dx: c_k delta^(k) -> c_k delta^(k+1).
inline DeltaExpansion delta_diff(const DeltaExpansion& u) {
  DeltaExpansion r;
  for (const auto& [k, c] : u.coeffs()) r.add(k + 1, c);
  return r;
}

/// Multiplication by x: c_k delta^(k) -> -k c_k delta^(k-1); x delta = 0.
inline DeltaExpansion delta_mul_x(const DeltaExpansion& u) {
  DeltaExpansion r;
  for (const auto& [k, c] : u.coeffs())
    if (k > 0) r.add(k - 1, Rational(-k) * c);
  return r;
}

/// theta = x d/dx as the composition of the two rewrite rules.
inline DeltaExpansion delta_theta(const DeltaExpansion& u) { return delta_mul_x(delta_diff(u)); }

/// P(theta) u for a 1-d polynomial given by rational coefficients of
/// theta^m (index m). Closed form: P(theta) delta^(k) = P(-k-1) delta^(k).
inline DeltaExpansion euler_apply_delta(const std::vector<Rational>& coeffs, const DeltaExpansion& u) {
  DeltaExpansion acc;
  DeltaExpansion power = u;  // theta^m u
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    if (m > 0) power = delta_theta(power);
    acc = acc + coeffs[m] * power;
  }
  return acc;
}

namespace detail {

inline Rational rational_from_double(double c) {
  const double r = std::round(c);
  if (!(std::abs(c - r) == 0.0) || std::abs(r) > 2147483647.0)
    throw std::invalid_argument("deltasym: polynomial coefficients must be exact integers");
  return Rational(static_cast<long long>(r));
}

}  // namespace detail

/// Adapter for 1-d Euler polynomials with integer-valued coefficients.
inline DeltaExpansion euler_apply_delta(const EulerPolynomial& p, const DeltaExpansion& u) {
  if (p.dim() != 1) throw std::invalid_argument("euler_apply_delta: polynomial must be one-dimensional");
  std::vector<Rational> coeffs;
  for (const auto& [gamma, c] : p.terms()) {
    const auto m = static_cast<std::size_t>(gamma[0]);
    if (coeffs.size() <= m) coeffs.resize(m + 1, Rational(0));
    coeffs[m] = detail::rational_from_double(c);
  }
  return euler_apply_delta(coeffs, u);
}

/// P evaluated at a rational point (the eigenvalue P(-k-1) of P(theta) on
/// delta^(k)), exactly.
inline Rational eval_rational(const std::vector<Rational>& coeffs, Rational z) {
  Rational acc(0);
  for (std::size_t m = coeffs.size(); m-- > 0;) acc = acc * z + coeffs[m];
  return acc;
}

struct AnnihilationResult {
  Rational b;          // the scalar with d^beta (x^beta u) = b u
  bool vanishes = false;
};

/// For u = delta^(k) (an eigenvector of theta with eigenvalue alpha = -k-1),
/// computes d^beta (x^beta u) by the rewrite rules and checks it against the
/// closed-form product prod_{i=1..beta} (i + alpha). The product vanishes
/// exactly when k + 1 <= beta.
inline AnnihilationResult annihilation_check(const DeltaExpansion& u, int beta) {
  if (beta < 1) throw std::invalid_argument("annihilation_check: beta must be positive");
  const auto [k, c] = u.single_term();

  DeltaExpansion w = u;
  for (int i = 0; i < beta; ++i) w = delta_mul_x(w);
  for (int i = 0; i < beta; ++i) w = delta_diff(w);

  const Rational alpha(-k - 1);
  Rational product(1);
  for (int i = 1; i <= beta; ++i) product *= Rational(i) + alpha;

  Rational computed(0);
  if (!w.is_zero()) {
    const auto [kw, cw] = w.single_term();
    if (kw != k) throw std::logic_error("annihilation_check: rewrite did not reproduce delta^(k)");
    computed = cw / c;
  }
  if (computed != product) throw std::logic_error("annihilation_check: rule composition disagrees with the product");
  return AnnihilationResult{product, product == Rational(0)};
}

}  // namespace hadamard
