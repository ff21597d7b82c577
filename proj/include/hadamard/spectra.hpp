#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "hadamard/convolve.hpp"
#include "hadamard/families.hpp"
#include "hadamard/kernel.hpp"

namespace hadamard {

namespace detail {

inline double alpha_power(const MultiIndex& alpha, const MultiIndex& beta) {
  double r = 1.0;
  for (int j = 0; j < alpha.dim(); ++j) r *= int_pow(static_cast<double>(alpha[j]), beta[j]);
  return r;
}

// signed power a^p for integer p (std::pow rejects negative bases)
inline double signed_int_pow(double a, int p) {
  double r = int_pow(std::abs(a), std::abs(p));
  if (p < 0) r = 1.0 / r;
  if (a < 0.0 && p % 2 != 0) r = -r;
  return r;
}

}  // namespace detail

/// m_alpha = T(sigma(x) / x^{alpha+1}): the eigenvalue of the operator
/// S -> S * T on the monomial x^alpha. Because theta*_j x^{-alpha_j-1} =
/// alpha_j x^{-alpha_j-1}, each density term reduces to the weighted moment
/// alpha^beta (prod_j e_j^{alpha_j}) int t(u) e^{-alpha.u} du, and each Dirac
/// term contributes c alpha^beta sigma(a) a^{-alpha-1}.
///
/// The moment integrand blows up toward the hyperplanes; if the edge band of
/// the window carries more than 1e-3 of its absolute mass the value would be
/// silently truncated, so this is a hard error instead.
inline double eigenvalue_monomial(const KernelDistribution& T, const MultiIndex& alpha, const LogGrid& grid) {
  if (T.dim != alpha.dim() || T.dim != grid.dim())
    throw std::invalid_argument("eigenvalue_monomial: dimension mismatch");
  double acc = 0.0;
  for (const auto& term : T.densities) {
    int sign = 1;
    for (int j = 0; j < T.dim; ++j)
      if (term.quadrant[j] < 0 && alpha[j] % 2) sign = -sign;
    const auto fac = detail::quadrature_factors(grid);
    double sum = 0.0, abs_total = 0.0, abs_edge = 0.0;
    std::vector<Index> idx(static_cast<std::size_t>(grid.dim()), 0);
    std::vector<double> u(static_cast<std::size_t>(grid.dim()));
    do {
      double w = 1.0;
      double expo = 0.0;
      for (int j = 0; j < grid.dim(); ++j) {
        u[static_cast<std::size_t>(j)] = grid.node(j, idx[static_cast<std::size_t>(j)]);
        w *= fac[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        expo -= static_cast<double>(alpha[j] + 1) * u[static_cast<std::size_t>(j)];
      }
      // fac already carries e^{sum u}; the remaining factor is e^{-(alpha+1).u}
      const double contrib = w * value(term.density, u) * std::exp(expo);
      sum += contrib;
      abs_total += std::abs(contrib);
      if (detail::in_edge_band(idx, grid.extents())) abs_edge += std::abs(contrib);
    } while (next_multi_index(idx, grid.extents()));
    if (abs_total > 0.0 && abs_edge > 1e-3 * abs_total)
      throw window_error("eigenvalue_monomial: window too small for alpha (edge band carries >1e-3 of the mass)");
    acc += term.weight * detail::alpha_power(alpha, term.beta) * static_cast<double>(sign) * sum * grid.cell_volume();
  }
  for (const auto& term : T.diracs) {
    double v = term.weight * detail::alpha_power(alpha, term.beta);
    v *= static_cast<double>(dirac_quadrant(term).sigma());
    for (int j = 0; j < T.dim; ++j) v *= detail::signed_int_pow(term.point[static_cast<std::size_t>(j)], -(alpha[j] + 1));
    acc += v;
  }
  return acc;
}

/// A kernel paired with the execution plan used to apply it.
struct HadamardOperator {
  KernelDistribution kernel;
  ConvPlan plan;
  ValidationReport validation;
};

inline HadamardOperator make_operator(KernelDistribution kernel, ConvPlan plan) {
  const int k = std::min(1, kernel.k_star);
  ValidationReport report = validate_theta_rapid(kernel, k, plan.grid);
  return HadamardOperator{std::move(kernel), std::move(plan), std::move(report)};
}

struct MeasuredEigenvalue {
  std::vector<double> ratios;
  double spread = 0.0;
  double mean = 0.0;
};

/// Measures the eigenvalue on x^alpha through the convolution engine:
/// r(phi) = <x^alpha * T, phi> / int x^alpha phi. The eigenvector property
/// predicts identical ratios across distinct bumps.
inline MeasuredEigenvalue measure_eigenvalue(const HadamardOperator& op, const MultiIndex& alpha,
                                             const std::vector<TestFunction>& bumps) {
  if (bumps.size() < 3) throw std::invalid_argument("measure_eigenvalue: need at least 3 test bumps");
  const LogGrid& grid = op.plan.grid;
  const PiecewiseFn S = sample_piecewise(monomial(grid.dim(), alpha), grid);
  MeasuredEigenvalue out;
  for (const auto& bump : bumps) {
    const PiecewiseFn phi = sample_piecewise(bump, grid);
    double denom = 0.0;
    for (unsigned q = 0; q < phi.quadrant_count(); ++q) denom += integrate_product(S.parts[q], phi.parts[q]);
    if (std::abs(denom) < 1e-12)
      throw std::invalid_argument("measure_eigenvalue: degenerate test function (vanishing monomial pairing)");
    out.ratios.push_back(star_pair(S, op.kernel, bump, op.plan) / denom);
  }
  out.mean = std::accumulate(out.ratios.begin(), out.ratios.end(), 0.0) / static_cast<double>(out.ratios.size());
  double spread = 0.0;
  for (std::size_t i = 0; i < out.ratios.size(); ++i)
    for (std::size_t j = i + 1; j < out.ratios.size(); ++j)
      spread = std::max(spread, std::abs(out.ratios[i] - out.ratios[j]));
  out.spread = spread / (1.0 + std::abs(out.mean));
  return out;
}

/// Commutation probes: dilation by a positive factor vector, reflection by a
/// sign vector, or the Euler operator theta_axis.
struct DilationProbe {
  std::vector<double> factor;
  bool allow_resample = false;
};
struct ReflectionProbe {
  SignVector e;
};
struct EulerProbe {
  int axis = 0;
};
using Probe = std::variant<DilationProbe, ReflectionProbe, EulerProbe>;

namespace detail {

inline PiecewiseFn dilate_sampled(const PiecewiseFn& f, const std::vector<double>& factor, bool allow_resample,
                                  ShiftMethod shift) {
  const LogGrid& grid = f.grid;
  const int d = grid.dim();
  double scale = 1.0;
  std::vector<double> delta(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const double a = factor[static_cast<std::size_t>(j)];
    if (!(a > 0.0)) throw std::invalid_argument("dilation probe: factors must be positive");
    scale /= a;
    delta[static_cast<std::size_t>(j)] = -std::log(a);  // (D_a f)(x) = |a|^{-1} f(x/a)
    const double sigma = std::log(a) / grid.dt(j);
    if (!allow_resample && std::abs(sigma - std::round(sigma)) > 1e-9)
      throw std::invalid_argument("dilation probe: factor is off-node; pass allow_resample to permit interpolation");
  }
  PiecewiseFn out = f;
  for (auto& p : out.parts) {
    p.values = shift_field(p.values, grid, delta, shift);
    p.values *= scale;
  }
  return out;
}

inline PiecewiseFn reflect_sampled(const PiecewiseFn& f, const SignVector& e) {
  PiecewiseFn out = f;
  for (unsigned q = 0; q < f.quadrant_count(); ++q) out.parts[q].values = f.parts[q ^ e.mask()].values;
  return out;
}

inline double residual_norm(const PiecewiseFn& a, const PiecewiseFn& b) {
  double diff = 0.0, scale = 0.0;
  for (unsigned q = 0; q < a.quadrant_count(); ++q) {
    diff = std::max(diff, max_abs_diff(a.parts[q].values, b.parts[q].values));
    scale = std::max(scale, a.parts[q].values.max_abs());
  }
  return diff / (1.0 + scale);
}

}  // namespace detail

/// Nodewise residual of probe(L phi) - L(probe phi), normalized by
/// 1 + max |L phi|. The Euler probe differentiates the operator output with
/// fd4 while the probed input uses the analytic derivative of the bump, so
/// the residual is a direct observable of the fd4 truncation order.
inline double commutation_residual(const HadamardOperator& op, const Probe& probe, const TestFunction& bump) {
  const LogGrid& grid = op.plan.grid;
  const PiecewiseFn phi = sample_piecewise(bump, grid);
  const PiecewiseFn f = hadamard_apply(op.kernel, phi, op.plan);

  if (const auto* dil = std::get_if<DilationProbe>(&probe)) {
    PiecewiseFn lhs = detail::dilate_sampled(f, dil->factor, dil->allow_resample, op.plan.shift);
    PiecewiseFn rhs = hadamard_apply(op.kernel, detail::dilate_sampled(phi, dil->factor, dil->allow_resample, op.plan.shift), op.plan);
    return detail::residual_norm(lhs, rhs);
  }
  if (const auto* refl = std::get_if<ReflectionProbe>(&probe)) {
    PiecewiseFn lhs = detail::reflect_sampled(f, refl->e);
    PiecewiseFn rhs = hadamard_apply(op.kernel, detail::reflect_sampled(phi, refl->e), op.plan);
    return detail::residual_norm(lhs, rhs);
  }
  const auto& eul = std::get<EulerProbe>(probe);
  const EulerPolynomial theta = EulerPolynomial::theta(grid.dim(), eul.axis);
  PiecewiseFn lhs = f;
  for (auto& p : lhs.parts) p = euler_apply(theta, p, DerivMethod::fd4);
  PiecewiseFn rhs = hadamard_apply(op.kernel, sample_theta_applied(bump, eul.axis, grid), op.plan);
  return detail::residual_norm(lhs, rhs);
}

/// Eigenvalue table over all alpha <= alpha_max componentwise, in
/// lexicographic order.
struct EigenTable {
  int dim = 0;
  std::vector<std::pair<MultiIndex, double>> entries;
  std::string method;
};

inline EigenTable eigen_table(const HadamardOperator& op, const MultiIndex& alpha_max) {
  EigenTable table;
  table.dim = alpha_max.dim();
  table.method = op.plan.method == ConvMethod::fft ? "fft" : "direct";
  std::vector<int> a(static_cast<std::size_t>(alpha_max.dim()), 0);
  while (true) {
    const MultiIndex alpha(a);
    table.entries.emplace_back(alpha, eigenvalue_monomial(op.kernel, alpha, op.plan.grid));
    int j = alpha_max.dim() - 1;
    for (; j >= 0; --j) {
      auto k = static_cast<std::size_t>(j);
      if (++a[k] <= alpha_max[j]) break;
      a[k] = 0;
    }
    if (j < 0) break;
  }
  return table;
}

}  // namespace hadamard
