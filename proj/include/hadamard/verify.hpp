#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "hadamard/convolve.hpp"
#include "hadamard/deltasym.hpp"
#include "hadamard/euler.hpp"
#include "hadamard/kernel.hpp"
#include "hadamard/loggrid.hpp"
#include "hadamard/spectra.hpp"

namespace hadamard::verify {

/// 2 K_0(2): reference value of int_0^inf exp(-x - 1/x) / x dx.
inline constexpr double kTwoBesselK0At2 = 0.22778774549906687;

struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct Options {
  Index n_1d = 1024;
  double window = 6.0;
  std::map<std::string, double> tol_overrides;
};

namespace detail {

inline double tol_for(const Options& opt, const std::string& name, double fallback) {
  const auto it = opt.tol_overrides.find(name);
  return it == opt.tol_overrides.end() ? fallback : it->second;
}

inline Check make_check(const Options& opt, const std::string& name, double measured, double default_tol,
                        std::string note = {}) {
  const double tol = tol_for(opt, name, default_tol);
  return Check{name, measured, tol, measured <= tol, std::move(note)};
}

inline KernelDistribution exp_symmetric_kernel(int dim) {
  KernelDistribution k;
  k.dim = dim;
  k.k_star = 5;
  SeparableLogFn fn;
  for (int j = 0; j < dim; ++j) fn.axes.push_back(LogProfile::exp2cosh());
  k.densities.push_back(DensityTerm{MultiIndex::zero(dim), SignVector::positive(dim), 1.0, std::move(fn)});
  return k;
}

inline KernelDistribution gauss_log_kernel(int dim, double mu, double s) {
  KernelDistribution k;
  k.dim = dim;
  k.k_star = 3;
  SeparableLogFn fn;
  for (int j = 0; j < dim; ++j) fn.axes.push_back(LogProfile::gauss(mu, s));
  k.densities.push_back(DensityTerm{MultiIndex::zero(dim), SignVector::positive(dim), 1.0, std::move(fn)});
  return k;
}

inline std::vector<TestFunction> default_bumps(int dim) {
  const std::vector<double> centers{-0.7, 0.0, 0.6};
  const std::vector<double> widths{0.3, 0.35, 0.4};
  std::vector<TestFunction> bumps;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    std::vector<double> mu(static_cast<std::size_t>(dim), centers[i]);
    std::vector<double> s(static_cast<std::size_t>(dim), widths[i]);
    bumps.push_back(bump_gauss(SignVector::positive(dim), mu, s));
  }
  return bumps;
}

}  // namespace detail

inline std::vector<Check> run_all(const Options& opt) {
  std::vector<Check> checks;
  std::mt19937_64 rng(20240811u);
  const LogGrid grid = symmetric_grid(1, opt.window, opt.n_1d);

  // --- log grids -----------------------------------------------------------
  {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    QuadrantFn f = sample([&](std::span<const double>) { return u(rng); }, grid, SignVector::positive(1));
    const QuadrantFn back = to_linear(to_log(f), f.quadrant);
    checks.push_back(detail::make_check(opt, "loggrid.roundtrip_bitexact", max_abs_diff(f.values, back.values), 0.0));
  }
  {
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    Index violations = 0;
    for (int dim = 1; dim <= 3; ++dim)
      for (int k : {1, 2, 5})
        for (int rep = 0; rep < 10000 / 30; ++rep) {
          std::vector<double> x(static_cast<std::size_t>(dim));
          double l1 = 0.0;
          for (auto& xj : x) {
            xj = u(rng);
            l1 += std::abs(xj) * static_cast<double>(k);
          }
          const double w = weight_omega(x, k);
          const double lower = std::exp(l1);
          const double upper = std::ldexp(lower, dim);  // 2^d e^{k sum |x_j|}
          if (!(lower <= w && w <= upper)) ++violations;
        }
    checks.push_back(detail::make_check(opt, "loggrid.omega_bounds", static_cast<double>(violations), 0.0));
  }
  {
    const auto f = [](std::span<const double> x) { return std::exp(-(x[0] + 1.0 / x[0])); };
    const QuadrantFn s = sample(f, grid, SignVector::positive(1));
    double worst = 0.0;
    for (Index i = 0; i < grid.n(0); i += 97) {
      const double x = std::exp(grid.node(0, i));
      const double want = f(std::span<const double>(&x, 1));
      worst = std::max(worst, std::abs(s.values[i] - want));
    }
    checks.push_back(detail::make_check(opt, "loggrid.sampling_exact", worst, 0.0));
    Index bad = 0;
    const LogGrid outer = make_grid(1, {0.1}, {0.01}, {256});
    const QuadrantFn g = sample(f, outer, SignVector::positive(1));
    for (int k = 0; k < 4; ++k)
      if (decay_norm(g, k + 1) < decay_norm(g, k)) ++bad;
    checks.push_back(detail::make_check(opt, "loggrid.decay_norm_monotone", static_cast<double>(bad), 0.0));
  }

  // --- Euler calculus ------------------------------------------------------
  {
    std::uniform_int_distribution<int> coeff(-5, 5);
    double worst = 0.0;
    for (int rep = 0; rep < 40; ++rep) {
      EulerPolynomial p(1);
      for (int m = 0; m <= 4; ++m) p.add_term(MultiIndex({m}), coeff(rng));
      worst = std::max(worst, euler_dual(euler_dual(p)) == p ? 0.0 : 1.0);
    }
    checks.push_back(detail::make_check(opt, "euler.dual_involution", worst, 0.0));
  }
  {
    double worst = 0.0;
    for (int alpha = 0; alpha <= 4; ++alpha)
      for (int g = 1; g <= 3; ++g) {
        const QuadrantFn f = sample([&](std::span<const double> x) { return hadamard::detail::int_pow(x[0], alpha); },
                                    grid, SignVector::positive(1));
        const QuadrantFn th = euler_apply(EulerPolynomial::theta_word(MultiIndex({g})), f, DerivMethod::fd4);
        const double eig = hadamard::detail::int_pow(static_cast<double>(alpha), g);
        for (Index i = grid.n(0) / 4; i < 3 * grid.n(0) / 4; i += 31) {
          const double want = eig * f.values[i];
          worst = std::max(worst, std::abs(th.values[i] - want) / (1.0 + std::abs(want)));
        }
      }
    checks.push_back(detail::make_check(opt, "euler.eigen_exactness_fd4", worst, 1e-4));
  }
  {
    // <theta t, phi> two ways for smooth decaying samples
    const SeparableLogFn tf{{LogProfile::gauss(-0.4, 0.5)}, 1.0};
    const SeparableLogFn pf{{LogProfile::gauss(0.3, 0.45)}, 1.0};
    const QuadrantFn t = sample_separable(tf, grid, SignVector::positive(1));
    const QuadrantFn phi = sample_separable(pf, grid, SignVector::positive(1));
    const EulerPolynomial theta = EulerPolynomial::theta(1, 0);
    const double lhs = euler_pair(theta, t, phi, DerivMethod::spectral);
    const double rhs = integrate_product(euler_apply(theta, t, DerivMethod::spectral), phi);
    checks.push_back(detail::make_check(opt, "euler.pairing_duality", std::abs(lhs - rhs), 1e-8));
  }
  {
    // fd4 truncation drops ~16x when dt halves
    const Index n0 = std::max<Index>(256, opt.n_1d / 4);
    double err[2] = {0.0, 0.0};
    for (int r = 0; r < 2; ++r) {
      const LogGrid g = symmetric_grid(1, opt.window, n0 << r);
      const SeparableLogFn bump{{LogProfile::gauss(0.2, 0.5)}, 1.0};
      const QuadrantFn f = sample_separable(bump, g, SignVector::positive(1));
      const QuadrantFn th = euler_apply(EulerPolynomial::theta(1, 0), f, DerivMethod::fd4);
      for (Index i = 0; i < g.n(0); ++i)
        err[r] = std::max(err[r], std::abs(th.values[i] - bump.axes[0].derivative(g.node(0, i), 1)));
    }
    const double ratio = err[0] / err[1];
    Check c;
    c.name = "euler.fd4_convergence_order";
    c.measured = ratio;
    c.tolerance = detail::tol_for(opt, c.name, 4.8);
    c.pass = std::abs(ratio - 16.0) <= c.tolerance;
    c.note = "|ratio - 16| within tolerance";
    checks.push_back(c);
  }

  // --- exact delta calculus ------------------------------------------------
  {
    std::uniform_int_distribution<int> coeff(-9, 9);
    std::uniform_int_distribution<int> ord(0, 10);
    double bad = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<Rational> p;
      for (int m = 0; m <= 4; ++m) p.emplace_back(coeff(rng));
      const int k = ord(rng);
      const DeltaExpansion u = DeltaExpansion::delta(k);
      const DeltaExpansion lhs = euler_apply_delta(p, u);
      const DeltaExpansion rhs = eval_rational(p, Rational(-k - 1)) * u;
      if (!(lhs == rhs)) bad += 1.0;
    }
    checks.push_back(detail::make_check(opt, "deltasym.closed_form_eigenvalue", bad, 0.0));
  }
  {
    double bad = 0.0;
    for (int k = 0; k <= 10; ++k) {
      const DeltaExpansion u = DeltaExpansion::delta(k, Rational(3, 2));
      const DeltaExpansion lhs = delta_diff(delta_mul_x(u)) - delta_mul_x(delta_diff(u));
      if (!(lhs == u)) bad += 1.0;
    }
    checks.push_back(detail::make_check(opt, "deltasym.heisenberg_commutator", bad, 0.0));
  }
  {
    double bad = 0.0;
    for (int k = 0; k <= 10; ++k)
      for (int beta = 1; beta <= 5; ++beta) {
        const auto r = annihilation_check(DeltaExpansion::delta(k), beta);
        if (r.vanishes != (k + 1 <= beta)) bad += 1.0;
      }
    checks.push_back(detail::make_check(opt, "deltasym.annihilation_product", bad, 0.0));
  }
  {
    // eigenvalue of P(theta) on delta^(k) vs dual polynomial at k
    std::uniform_int_distribution<int> coeff(-6, 6);
    double bad = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      EulerPolynomial p(1);
      for (int m = 0; m <= 4; ++m) p.add_term(MultiIndex({m}), coeff(rng));
      const EulerPolynomial dual = euler_dual(p);
      for (int k = 0; k <= 6; ++k) {
        const DeltaExpansion u = DeltaExpansion::delta(k);
        const DeltaExpansion lhs = euler_apply_delta(p, u);
        const double expect = dual.eval(std::vector<double>{static_cast<double>(k)});
        const DeltaExpansion rhs = hadamard::detail::rational_from_double(expect) * u;
        if (!(lhs == rhs)) bad += 1.0;
      }
    }
    checks.push_back(detail::make_check(opt, "deltasym.euler_duality", bad, 0.0));
  }

  // --- kernels -------------------------------------------------------------
  const std::vector<TestFunction> bumps = detail::default_bumps(1);
  {
    const KernelDistribution t1 = detail::exp_symmetric_kernel(1);
    const KernelDistribution t2 = detail::gauss_log_kernel(1, 0.2, 0.4);
    const double a = apply_to_test(t1, bumps[0], grid);
    const double b = apply_to_test(t2, bumps[0], grid);
    const double s = apply_to_test(kernel_sum(t1, t2), bumps[0], grid);
    checks.push_back(detail::make_check(opt, "kernel.linearity", std::abs(s - a - b) / (1.0 + std::abs(s)), 1e-12));
  }
  {
    const KernelDistribution d = kernel_dirac({std::exp(0.4)}, 1.7);
    const double got = apply_to_test(d, bumps[1], grid);
    const double want = 1.7 * test_value(bumps[1], std::vector<double>{std::exp(0.4)});
    checks.push_back(detail::make_check(opt, "kernel.dirac_consistency", std::abs(got - want) / (1.0 + std::abs(want)), 1e-12));
  }
  {
    // moving one theta power onto an analytic antiderivative leaves the
    // pairing invariant
    const double mu = 0.1, s = 0.35;
    KernelDistribution rep1;
    rep1.dim = 1;
    rep1.k_star = 1;
    rep1.densities.push_back(DensityTerm{MultiIndex({1}), SignVector::positive(1), 1.0,
                                         SeparableLogFn{{LogProfile::gauss(mu, s)}, 1.0}});
    KernelDistribution rep2;
    rep2.dim = 1;
    rep2.k_star = 1;
    rep2.densities.push_back(DensityTerm{
        MultiIndex({2}), SignVector::positive(1), 1.0,
        SeparableLogFn{{LogProfile::custom([mu, s](double u) {
          return s * std::sqrt(std::numbers::pi / 2.0) * (1.0 + std::erf((u - mu) / (std::sqrt(2.0) * s)));
        })},
                       1.0}});
    const double v1 = apply_to_test(rep1, bumps[1], grid);
    const double v2 = apply_to_test(rep2, bumps[1], grid);
    checks.push_back(detail::make_check(opt, "kernel.ibp_shift_invariance", std::abs(v1 - v2) / (1.0 + std::abs(v1)), 1e-6));
  }

  // --- convolution engines -------------------------------------------------
  const ConvPlan plan_fft = make_plan(grid, ConvMethod::fft, -1, DerivMethod::spectral, ShiftMethod::spectral);
  {
    const LogGrid small = symmetric_grid(1, opt.window, 256);
    const ConvPlan pd = make_plan(small, ConvMethod::direct, -1, DerivMethod::spectral, ShiftMethod::spectral);
    const ConvPlan pf = make_plan(small, ConvMethod::fft, -1, DerivMethod::spectral, ShiftMethod::spectral);
    const KernelDistribution k = detail::gauss_log_kernel(1, -0.2, 0.45);
    const PiecewiseFn phi = sample_piecewise(bumps[2], small);
    const PiecewiseFn fd = hadamard_apply(k, phi, pd);
    const PiecewiseFn ff = hadamard_apply(k, phi, pf);
    double worst = 0.0;
    for (unsigned q = 0; q < fd.quadrant_count(); ++q) {
      const double scale = 1.0 + fd.parts[q].values.max_abs();
      worst = std::max(worst, max_abs_diff(fd.parts[q].values, ff.parts[q].values) / scale);
    }
    checks.push_back(detail::make_check(opt, "convolve.direct_vs_fft", worst, 1e-8));
  }
  {
    const KernelDistribution id = kernel_dirac({1.0}, 1.0);
    const PiecewiseFn phi = sample_piecewise(bumps[0], grid);
    const PiecewiseFn f = hadamard_apply(id, phi, plan_fft);
    double worst = 0.0;
    for (unsigned q = 0; q < f.quadrant_count(); ++q)
      worst = std::max(worst, max_abs_diff(f.parts[q].values, phi.parts[q].values));
    checks.push_back(detail::make_check(opt, "convolve.identity_kernel", worst, 0.0));
  }
  {
    // <S*T, phi> is symmetric in the two densities
    const KernelDistribution kS = detail::gauss_log_kernel(1, -0.3, 0.4);
    const KernelDistribution kT = detail::gauss_log_kernel(1, 0.25, 0.5);
    const PiecewiseFn sS = sample_piecewise(TestFunction::on_quadrant(SignVector::positive(1), kS.densities[0].density), grid);
    const PiecewiseFn sT = sample_piecewise(TestFunction::on_quadrant(SignVector::positive(1), kT.densities[0].density), grid);
    const PiecewiseFn phi = sample_piecewise(bumps[1], grid);
    const double a = star_pair(sS, kT, phi, plan_fft);
    const double b = star_pair(sT, kS, phi, plan_fft);
    checks.push_back(detail::make_check(opt, "convolve.star_commutativity", std::abs(a - b) / (1.0 + std::abs(a)), 1e-8));
  }
  {
    // output of a theta-rapidly decreasing kernel stays rapidly decreasing
    const KernelDistribution k = detail::exp_symmetric_kernel(1);
    const PiecewiseFn f = hadamard_apply(k, sample_piecewise(bumps[1], grid), plan_fft);
    double worst_ratio = 0.0;
    bool interior = true;
    for (int kk = 1; kk <= 3; ++kk) {
      double best = 0.0, best_edge = 0.0;
      Index best_idx = 0;
      const QuadrantFn& p = f.parts[0];
      for (Index i = 0; i < grid.n(0); ++i) {
        const double x = std::exp(grid.node(0, i));
        const double w = std::abs(p.values[i]) * hadamard::detail::decay_weight(x * x, kk);
        if (w > best) {
          best = w;
          best_idx = i;
        }
        const Index band = hadamard::detail::edge_band_width(grid.n(0));
        if (i < band || i >= grid.n(0) - band) best_edge = std::max(best_edge, w);
      }
      interior = interior && best_idx > grid.n(0) / 8 && best_idx < 7 * grid.n(0) / 8;
      worst_ratio = std::max(worst_ratio, best > 0.0 ? best_edge / best : 0.0);
    }
    Check c = detail::make_check(opt, "convolve.output_decay", worst_ratio, 1e-6);
    c.pass = c.pass && interior;
    checks.push_back(c);
  }

  // --- spectra -------------------------------------------------------------
  {
    const HadamardOperator id = make_operator(kernel_dirac({1.0}, 1.0), plan_fft);
    double worst = 0.0;
    for (int a = 0; a <= 3; ++a)
      worst = std::max(worst, std::abs(eigenvalue_monomial(id.kernel, MultiIndex({a}), grid) - 1.0));
    checks.push_back(detail::make_check(opt, "spectra.anchor_identity", worst, 1e-10));
  }
  {
    const KernelDistribution d2 = kernel_dirac({2.0}, 1.0);
    double worst = 0.0;
    for (int a = 0; a <= 2; ++a) {
      const double want = std::pow(2.0, -(a + 1));
      const double got = eigenvalue_monomial(d2, MultiIndex({a}), grid);
      worst = std::max(worst, std::abs(got - want) / want);
    }
    checks.push_back(detail::make_check(opt, "spectra.anchor_dilation", worst, 1e-8));
  }
  {
    const double got = eigenvalue_monomial(detail::exp_symmetric_kernel(1), MultiIndex({0}), grid);
    checks.push_back(detail::make_check(opt, "spectra.anchor_bessel",
                                        std::abs(got - kTwoBesselK0At2) / kTwoBesselK0At2, 1e-6));
  }
  {
    double worst = 0.0;
    for (const auto& kernel : {kernel_dirac({2.0}, 1.0), detail::gauss_log_kernel(1, 0.0, 0.5)}) {
      const HadamardOperator op = make_operator(kernel, plan_fft);
      for (int a = 0; a <= 2; ++a) {
        const double formula = eigenvalue_monomial(op.kernel, MultiIndex({a}), grid);
        const auto measured = measure_eigenvalue(op, MultiIndex({a}), bumps);
        worst = std::max(worst, std::abs(formula - measured.mean) / (1.0 + std::abs(formula)));
        worst = std::max(worst, measured.spread);
      }
    }
    checks.push_back(detail::make_check(opt, "spectra.formula_vs_measured", worst, 1e-6));
  }
  {
    const HadamardOperator op = make_operator(detail::exp_symmetric_kernel(1), plan_fft);
    const double res =
        commutation_residual(op, DilationProbe{{std::exp(grid.dt(0))}, false}, bumps[1]);
    checks.push_back(detail::make_check(opt, "spectra.dilation_commutation", res, 1e-8));
  }
  {
    KernelDistribution sym = detail::exp_symmetric_kernel(1);
    sym = kernel_sum(sym, kernel_reflect(sym, SignVector({-1})));
    const HadamardOperator op = make_operator(sym, plan_fft);
    TestFunction both = bumps[1];
    both.parts[1] = both.parts[0];
    const double res = commutation_residual(op, ReflectionProbe{SignVector({-1})}, both);
    checks.push_back(detail::make_check(opt, "spectra.reflection_commutation", res, 1e-10));
  }

  return checks;
}

inline bool all_passed(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace hadamard::verify
