#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hadamard/families.hpp"
#include "hadamard/loggrid.hpp"

namespace hadamard {

/// Sentinel for kernels whose weighted boundedness holds for every k
/// (point masses off the coordinate hyperplanes).
inline constexpr int kUnboundedKStar = 1 << 20;

/// One density summand theta^beta t_beta supported on a single quadrant.
struct DensityTerm {
  MultiIndex beta;
  SignVector quadrant;
  double weight = 1.0;
  SeparableLogFn density;  // evaluated in log-magnitude coordinates
};

/// c * theta^beta delta_a with a off the coordinate hyperplanes.
struct DiracTerm {
  MultiIndex beta;
  std::vector<double> point;
  double weight = 1.0;
};

/// Kernel distribution T = sum_beta theta^beta t_beta + Dirac part.
/// k_star is the declared decay order; it is checked by
/// validate_theta_rapid rather than inferred.
struct KernelDistribution {
  int dim = 0;
  int k_star = 1;
  std::vector<DensityTerm> densities;
  std::vector<DiracTerm> diracs;
};

inline SignVector dirac_quadrant(const DiracTerm& t) { return SignVector::of_point(t.point); }

inline KernelDistribution kernel_dirac(std::vector<double> a, double c) {
  for (double aj : a)
    if (aj == 0.0) throw std::invalid_argument("kernel_dirac: point must avoid the coordinate hyperplanes");
  KernelDistribution k;
  k.dim = static_cast<int>(a.size());
  k.k_star = kUnboundedKStar;
  k.diracs.push_back(DiracTerm{MultiIndex::zero(k.dim), std::move(a), c});
  return k;
}

/// Dirac term with an Euler word attached: c * theta^beta delta_a.
inline KernelDistribution kernel_dirac_word(std::vector<double> a, const MultiIndex& beta, double c) {
  KernelDistribution k = kernel_dirac(std::move(a), c);
  k.diracs.front().beta = beta;
  return k;
}

inline KernelDistribution kernel_sum(const KernelDistribution& a, const KernelDistribution& b) {
  if (a.dim != b.dim) throw std::invalid_argument("kernel_sum: dimension mismatch");
  KernelDistribution k = a;
  k.k_star = std::min(a.k_star, b.k_star);
  k.densities.insert(k.densities.end(), b.densities.begin(), b.densities.end());
  k.diracs.insert(k.diracs.end(), b.diracs.begin(), b.diracs.end());
  return k;
}

/// Reflected kernel D_e T: densities move to quadrant e*q with the same
/// log-magnitude profile; Dirac points flip signs.
inline KernelDistribution kernel_reflect(const KernelDistribution& t, const SignVector& e) {
  KernelDistribution out = t;
  for (auto& d : out.densities) d.quadrant = d.quadrant.times(e);
  for (auto& d : out.diracs)
    for (int j = 0; j < t.dim; ++j) d.point[static_cast<std::size_t>(j)] *= static_cast<double>(e[j]);
  return out;
}

struct TermReport {
  std::size_t term_index = 0;
  double weighted_sup = 0.0;
  double edge_ratio = 0.0;
  bool flagged = false;
};

struct ValidationReport {
  std::vector<TermReport> terms;
  bool any_flagged = false;
};

namespace detail {

inline Index edge_band_width(Index n) { return std::max<Index>(2, n / 64); }

inline bool in_edge_band(std::span<const Index> idx, const Shape& extents) {
  for (std::size_t j = 0; j < extents.size(); ++j) {
    const Index b = edge_band_width(extents[j]);
    if (idx[j] < b || idx[j] >= extents[j] - b) return true;
  }
  return false;
}

}  // namespace detail

/// Checks the declared weighted boundedness (|x|^{2k}+|x|^{-2k}) |t_beta| on
/// the grid, per density term. A term is flagged when the edge band carries
/// more than 1e-3 of the global weighted maximum, which signals that the
/// window truncates mass. Report-only.
inline ValidationReport validate_theta_rapid(const KernelDistribution& t, int k, const LogGrid& grid) {
  if (k > t.k_star) throw std::invalid_argument("validate_theta_rapid: k exceeds the declared k_star");
  ValidationReport report;
  for (std::size_t ti = 0; ti < t.densities.size(); ++ti) {
    const auto& term = t.densities[ti];
    TermReport r;
    r.term_index = ti;
    double global = 0.0, edge = 0.0;
    std::vector<Index> idx(static_cast<std::size_t>(grid.dim()), 0);
    std::vector<double> u(static_cast<std::size_t>(grid.dim()));
    do {
      double r2 = 0.0;
      for (int j = 0; j < grid.dim(); ++j) {
        u[static_cast<std::size_t>(j)] = grid.node(j, idx[static_cast<std::size_t>(j)]);
        const double xj = std::exp(u[static_cast<std::size_t>(j)]);
        r2 += xj * xj;
      }
      const double w = detail::decay_weight(r2, k) * std::abs(term.weight * value(term.density, u));
      global = std::max(global, w);
      if (detail::in_edge_band(idx, grid.extents())) edge = std::max(edge, w);
    } while (next_multi_index(idx, grid.extents()));
    r.weighted_sup = global;
    r.edge_ratio = global > 0.0 ? edge / global : 0.0;
    r.flagged = r.edge_ratio > 1e-3;
    report.any_flagged = report.any_flagged || r.flagged;
    report.terms.push_back(r);
  }
  return report;
}

/// T(phi) = sum_density int t_beta (theta*)^beta phi dx
///        + sum_dirac c ((theta*)^beta phi)(a).
/// Densities are integrated with the log-substitution trapezoid rule on the
/// given grid; the dual word falls on phi and is evaluated analytically.
inline double apply_to_test(const KernelDistribution& t, const TestFunction& phi, const LogGrid& grid) {
  if (t.dim != phi.dim || t.dim != grid.dim()) throw std::invalid_argument("apply_to_test: dimension mismatch");
  double acc = 0.0;
  for (const auto& term : t.densities) {
    const auto& part = phi.parts[term.quadrant.mask()];
    if (!part) continue;
    const auto fac = detail::quadrature_factors(grid);
    double sum = 0.0;
    std::vector<Index> idx(static_cast<std::size_t>(grid.dim()), 0);
    std::vector<double> u(static_cast<std::size_t>(grid.dim()));
    do {
      double w = 1.0;
      for (int j = 0; j < grid.dim(); ++j) {
        u[static_cast<std::size_t>(j)] = grid.node(j, idx[static_cast<std::size_t>(j)]);
        w *= fac[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      }
      sum += w * value(term.density, u) * dual_word_value(*part, term.beta, u);
    } while (next_multi_index(idx, grid.extents()));
    acc += term.weight * sum * grid.cell_volume();
  }
  for (const auto& term : t.diracs)
    acc += term.weight * test_dual_word(phi, term.beta, term.point);
  return acc;
}

/// Infimum over terms of the distance of the support to the coordinate
/// hyperplanes: min_j |a_j| for point masses, exp(min_j lo_j) for
/// tabulated densities with declared support, 0 for full-quadrant families.
inline double support_distance(const KernelDistribution& t) {
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& term : t.densities) {
    double term_dist = std::numeric_limits<double>::infinity();
    for (const auto& ax : term.density.axes) {
      const auto [lo, hi] = ax.support_log();
      term_dist = std::min(term_dist, std::isfinite(lo) ? std::exp(lo) : 0.0);
    }
    dist = std::min(dist, term_dist);
  }
  for (const auto& term : t.diracs) {
    double term_dist = std::numeric_limits<double>::infinity();
    for (double aj : term.point) term_dist = std::min(term_dist, std::abs(aj));
    dist = std::min(dist, term_dist);
  }
  return dist;
}

}  // namespace hadamard
