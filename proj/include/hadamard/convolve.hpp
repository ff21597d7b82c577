#pragma once

#include <cmath>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "hadamard/fft.hpp"
#include "hadamard/kernel.hpp"
#include "hadamard/loggrid.hpp"

namespace hadamard {

enum class ConvMethod { direct, fft };
enum class ShiftMethod { cubic, spectral };

/// Execution plan for the multiplicative-convolution engines. `pad` is the
/// zero-pad length per axis; linear (non-circular) convolution needs
/// pad >= n-1 on every axis when method == fft. `deriv` selects how dual
/// Euler words are applied to sampled test functions, `shift` how Dirac
/// terms resample them at off-node products.
struct ConvPlan {
  LogGrid grid;
  ConvMethod method = ConvMethod::fft;
  Index pad = 0;
  DerivMethod deriv = DerivMethod::fd4;
  ShiftMethod shift = ShiftMethod::cubic;
};

inline ConvPlan make_plan(const LogGrid& grid, ConvMethod method, Index pad = -1,
                          DerivMethod deriv = DerivMethod::fd4, ShiftMethod shift = ShiftMethod::cubic) {
  Index max_n = 0;
  for (int j = 0; j < grid.dim(); ++j) max_n = std::max(max_n, grid.n(j));
  if (pad < 0) pad = max_n - 1;
  if (method == ConvMethod::fft && pad < max_n - 1)
    throw std::invalid_argument("make_plan: fft method needs pad >= n-1 per axis to avoid wrap-around");
  return ConvPlan{grid, method, pad, deriv, shift};
}

namespace detail {

/// Node products land on nodes only when t0/dt is integral per axis; the
/// density engines rely on that lattice alignment.
inline std::vector<Index> lattice_offsets(const LogGrid& g) {
  std::vector<Index> rho(static_cast<std::size_t>(g.dim()));
  for (int j = 0; j < g.dim(); ++j) {
    const double r = g.t0(j) / g.dt(j);
    const double rr = std::round(r);
    if (std::abs(r - rr) > 1e-9 * std::max(1.0, std::abs(r)))
      throw std::invalid_argument(
          "convolution requires a node-aligned window (t0 must be an integer multiple of dt per axis)");
    rho[static_cast<std::size_t>(j)] = static_cast<Index>(rr);
  }
  return rho;
}

inline double box_sum(const Tensor& a, const Tensor& b, std::span<const Index> lo, std::span<const Index> hi,
                      Index b_shift, int level, Index a_off) {
  const int d = a.rank();
  const Index stride = a.strides()[static_cast<std::size_t>(level)];
  if (level == d - 1) {
    const double* pa = a.data() + a_off + lo[static_cast<std::size_t>(level)];
    const double* pb = b.data() + a_off + lo[static_cast<std::size_t>(level)] + b_shift;
    const Index len = hi[static_cast<std::size_t>(level)] - lo[static_cast<std::size_t>(level)];
    double acc = 0.0;
    for (Index i = 0; i < len; ++i) acc += pa[i] * pb[i];
    return acc;
  }
  double acc = 0.0;
  for (Index i = lo[static_cast<std::size_t>(level)]; i < hi[static_cast<std::size_t>(level)]; ++i)
    acc += box_sum(a, b, lo, hi, b_shift, level + 1, a_off + i * stride);
  return acc;
}

/// out[m] = sum_i a[i] * b[i + m + off], zero-extended. Direct summation.
inline Tensor correlate_direct(const Tensor& a, const Tensor& b, std::span<const Index> off) {
  const int d = a.rank();
  const Shape& n = a.shape();
  Tensor out(n);
  std::vector<Index> m(static_cast<std::size_t>(d), 0);
  std::vector<Index> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  Index lin = 0;
  do {
    bool empty = false;
    Index b_shift = 0;
    for (int j = 0; j < d; ++j) {
      const auto k = static_cast<std::size_t>(j);
      const Index s = m[k] + off[k];
      lo[k] = std::max<Index>(0, -s);
      hi[k] = std::min<Index>(n[k], n[k] - s);
      if (lo[k] >= hi[k]) {
        empty = true;
        break;
      }
      b_shift += s * a.strides()[k];
    }
    out[lin++] = empty ? 0.0 : box_sum(a, b, lo, hi, b_shift, 0, 0);
  } while (next_multi_index(m, n));
  return out;
}

inline Shape padded_shape(const Shape& n, Index pad) {
  Shape L(n.size());
  for (std::size_t j = 0; j < n.size(); ++j) L[j] = spectral::next_pow2(n[j] + pad);
  return L;
}

inline std::vector<spectral::Complex> embed_complex(const Tensor& t, const Shape& L) {
  std::vector<spectral::Complex> out(static_cast<std::size_t>(shape_size(L)));
  const Shape ls = row_major_strides(L);
  std::vector<Index> idx(t.shape().size(), 0);
  Index lin = 0;
  do {
    Index o = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) o += idx[j] * ls[j];
    out[static_cast<std::size_t>(o)] = t[lin++];
  } while (next_multi_index(idx, t.shape()));
  return out;
}

/// Same correlation via zero-padded FFTs; pad >= n-1 per axis keeps the
/// circular wrap outside the extracted index range.
inline Tensor correlate_fft(const Tensor& a, const Tensor& b, std::span<const Index> off, Index pad) {
  const Shape& n = a.shape();
  const Shape L = padded_shape(n, pad);
  auto A = embed_complex(a, L);
  auto B = embed_complex(b, L);
  spectral::fft_nd(A, L, false);
  spectral::fft_nd(B, L, false);
  for (std::size_t i = 0; i < A.size(); ++i) A[i] = std::conj(A[i]) * B[i];
  spectral::fft_nd(A, L, true);
  Tensor out(n);
  const Shape ls = row_major_strides(L);
  std::vector<Index> m(n.size(), 0);
  Index lin = 0;
  do {
    bool outside = false;
    Index o = 0;
    for (std::size_t j = 0; j < n.size(); ++j) {
      const Index s = m[j] + off[j];
      if (s <= -n[j] || s >= n[j]) {
        outside = true;
        break;
      }
      o += (s >= 0 ? s : s + L[j]) * ls[j];
    }
    out[lin++] = outside ? 0.0 : A[static_cast<std::size_t>(o)].real();
  } while (next_multi_index(m, n));
  return out;
}

inline Tensor correlate(const Tensor& a, const Tensor& b, std::span<const Index> off, const ConvPlan& plan) {
  return plan.method == ConvMethod::direct ? correlate_direct(a, b, off) : correlate_fft(a, b, off, plan.pad);
}

inline double conv_sum(const Tensor& f, const Tensor& g, std::span<const Index> k) {
  // sum_i f[i] g[k - i] over the valid rectangle, recursively per axis
  const int d = f.rank();
  std::vector<Index> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const auto s = static_cast<std::size_t>(j);
    lo[s] = std::max<Index>(0, k[s] - f.shape()[s] + 1);
    hi[s] = std::min<Index>(f.shape()[s], k[s] + 1);
    if (lo[s] >= hi[s]) return 0.0;
  }
  double acc = 0.0;
  std::vector<Index> i(lo.begin(), lo.end());
  while (true) {
    Index fo = 0, go = 0;
    for (int j = 0; j < d; ++j) {
      const auto s = static_cast<std::size_t>(j);
      fo += i[s] * f.strides()[s];
      go += (k[s] - i[s]) * g.strides()[s];
    }
    acc += f[fo] * g[go];
    int j = d - 1;
    for (; j >= 0; --j) {
      const auto s = static_cast<std::size_t>(j);
      if (++i[s] < hi[s]) break;
      i[s] = lo[s];
    }
    if (j < 0) break;
  }
  return acc;
}

}  // namespace detail

/// Linear (non-circular) discrete convolution of two log-side tensors of
/// equal shape, scaled by prod dt_j. Output index k on axis j corresponds to
/// the log coordinate 2*t0_j + k*dt_j; the output extent is 2n_j - 1.
inline Tensor additive_convolve(const Tensor& f, const Tensor& g, const ConvPlan& plan) {
  if (!f.same_shape(g)) throw std::invalid_argument("additive_convolve: shape mismatch");
  const Shape& n = f.shape();
  Shape out_shape(n.size());
  for (std::size_t j = 0; j < n.size(); ++j) out_shape[j] = 2 * n[j] - 1;
  Tensor out(out_shape);
  const double vol = plan.grid.cell_volume();
  if (plan.method == ConvMethod::direct) {
    std::vector<Index> k(n.size(), 0);
    Index lin = 0;
    do {
      out[lin++] = vol * detail::conv_sum(f, g, k);
    } while (next_multi_index(k, out_shape));
    return out;
  }
  for (std::size_t j = 0; j < n.size(); ++j)
    if (plan.pad < n[j] - 1) throw std::invalid_argument("additive_convolve: fft plan with insufficient padding");
  const Shape L = detail::padded_shape(n, plan.pad);
  auto F = detail::embed_complex(f, L);
  auto G = detail::embed_complex(g, L);
  spectral::fft_nd(F, L, false);
  spectral::fft_nd(G, L, false);
  for (std::size_t i = 0; i < F.size(); ++i) F[i] *= G[i];
  spectral::fft_nd(F, L, true);
  const Shape ls = row_major_strides(L);
  std::vector<Index> k(n.size(), 0);
  Index lin = 0;
  do {
    Index o = 0;
    for (std::size_t j = 0; j < n.size(); ++j) o += k[j] * ls[j];
    out[lin++] = vol * F[static_cast<std::size_t>(o)].real();
  } while (next_multi_index(k, out_shape));
  return out;
}

namespace detail {

inline void shift_line_cubic(std::span<const double> in, std::span<double> out, double sigma) {
  const auto n = static_cast<Index>(in.size());
  const double kf = std::floor(sigma);
  double frac = sigma - kf;
  auto k = static_cast<Index>(kf);
  if (frac > 1.0 - 1e-12) {
    ++k;
    frac = 0.0;
  }
  if (frac < 1e-12) {
    for (Index i = 0; i < n; ++i) {
      const Index s = i + k;
      out[static_cast<std::size_t>(i)] = (s >= 0 && s < n) ? in[static_cast<std::size_t>(s)] : 0.0;
    }
    return;
  }
  double w[4];
  cubic_weights(frac, w);
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int r = -1; r <= 2; ++r) {
      const Index s = i + k + r;
      if (s >= 0 && s < n) acc += w[r + 1] * in[static_cast<std::size_t>(s)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
}

inline void shift_line_spectral(std::span<const double> in, std::span<double> out, double sigma, double h) {
  const auto n = static_cast<Index>(in.size());
  if (!spectral::is_pow2(n))
    throw std::invalid_argument("spectral shift: axis size must be a power of two");
  std::vector<spectral::Complex> a(in.begin(), in.end());
  spectral::fft(a, false);
  const double base = 2.0 * std::numbers::pi / static_cast<double>(n);
  const double delta = sigma;  // shift in node units; phase = k * delta
  for (Index m = 0; m < n; ++m) {
    const double freq = static_cast<double>(m < n / 2 ? m : m - n);
    const double phase = base * freq * delta;
    if (m == n / 2)
      a[static_cast<std::size_t>(m)] *= std::cos(base * static_cast<double>(n / 2) * delta);
    else
      a[static_cast<std::size_t>(m)] *= spectral::Complex(std::cos(phase), std::sin(phase));
  }
  spectral::fft(a, true);
  (void)h;
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)].real();
}

/// Samples of u -> t(u + delta); delta given in log units per axis.
inline Tensor shift_field(const Tensor& t, const LogGrid& grid, std::span<const double> delta, ShiftMethod method) {
  Tensor out = t;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const double sigma = delta[static_cast<std::size_t>(axis)] / grid.dt(axis);
    if (sigma == 0.0) continue;
    const auto n = static_cast<std::size_t>(out.extent(axis));
    std::vector<double> in(n), line(n);
    const double rounded = std::round(sigma);
    const bool on_node = std::abs(sigma - rounded) < 1e-12 * std::max(1.0, std::abs(sigma));
    for_each_line(out.shape(), axis, [&](Index base, Index stride) {
      for (std::size_t i = 0; i < n; ++i) in[i] = out[base + static_cast<Index>(i) * stride];
      if (on_node)
        shift_line_cubic(in, line, rounded);
      else if (method == ShiftMethod::cubic)
        shift_line_cubic(in, line, sigma);
      else
        shift_line_spectral(in, line, sigma, grid.dt(axis));
      for (std::size_t i = 0; i < n; ++i) out[base + static_cast<Index>(i) * stride] = line[i];
    });
  }
  return out;
}

/// Kernel samples with the Jacobian e^{sum u_j} folded in once.
inline Tensor density_samples_with_jacobian(const DensityTerm& term, const LogGrid& grid) {
  std::vector<std::vector<double>> ax(static_cast<std::size_t>(grid.dim()));
  for (int j = 0; j < grid.dim(); ++j) {
    auto& a = ax[static_cast<std::size_t>(j)];
    a.resize(static_cast<std::size_t>(grid.n(j)));
    for (Index i = 0; i < grid.n(j); ++i) {
      const double u = grid.node(j, i);
      a[static_cast<std::size_t>(i)] = term.density.axes[static_cast<std::size_t>(j)].value(u) * std::exp(u);
    }
  }
  Tensor out(grid.extents());
  std::vector<Index> idx(static_cast<std::size_t>(grid.dim()), 0);
  Index lin = 0;
  do {
    double v = term.weight * term.density.weight;
    for (int j = 0; j < grid.dim(); ++j) v *= ax[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    out[lin++] = v;
  } while (next_multi_index(idx, grid.extents()));
  return out;
}

inline double boundary_max_abs(const Tensor& t) {
  double m = 0.0;
  std::vector<Index> idx(t.shape().size(), 0);
  Index lin = 0;
  do {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (idx[j] == 0 || idx[j] == t.shape()[j] - 1) {
        m = std::max(m, std::abs(t[lin]));
        break;
      }
    }
    ++lin;
  } while (next_multi_index(idx, t.shape()));
  return m;
}

}  // namespace detail

namespace detail {

/// Common assembly of the operator action. `psi_of` supplies the samples of
/// (theta*)^beta phi on a source quadrant; `part_zero` says whether phi
/// vanishes on a quadrant.
template <class PsiOf, class PartZero>
inline PiecewiseFn apply_assemble(const KernelDistribution& T, const ConvPlan& plan, PsiOf&& psi_of,
                                  PartZero&& part_zero, std::vector<std::string> warnings) {
  const LogGrid& grid = plan.grid;
  const int d = grid.dim();
  const unsigned nq = 1u << d;

  PiecewiseFn out = make_piecewise(grid);
  out.warnings = std::move(warnings);

  if (!T.densities.empty()) {
    const std::vector<Index> rho = lattice_offsets(grid);
    const double vol = grid.cell_volume();
    for (const auto& term : T.densities) {
      const Tensor a = density_samples_with_jacobian(term, grid);
      if (a.all_zero()) continue;
      const unsigned e_mask = term.quadrant.mask();
      for (unsigned q = 0; q < nq; ++q) {
        const unsigned src = q ^ e_mask;
        if (part_zero(src)) continue;
        Tensor corr = correlate(a, psi_of(src, term.beta), rho, plan);
        out.parts[q].values.add_scaled(corr, vol);
      }
    }
  }

  for (const auto& term : T.diracs) {
    const unsigned a_mask = dirac_quadrant(term).mask();
    std::vector<double> delta(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) delta[static_cast<std::size_t>(j)] = std::log(std::abs(term.point[static_cast<std::size_t>(j)]));
    for (unsigned q = 0; q < nq; ++q) {
      const unsigned src = q ^ a_mask;
      if (part_zero(src)) continue;
      Tensor shifted = shift_field(psi_of(src, term.beta), grid, delta, plan.shift);
      out.parts[q].values.add_scaled(shifted, term.weight);
    }
  }

  return out;
}

}  // namespace detail

/// The operator action f(y) = T_x phi(xy) assembled across quadrants.
///
/// Per density term theta^beta t_beta on quadrant Q_e, the output on
/// quadrant Q_q is the log-side cross-correlation of the Jacobian-weighted
/// kernel samples with psi = (theta*)^beta phi taken from quadrant Q_{e q}.
/// Dirac terms c theta^beta delta_a contribute c psi(a y), evaluated by
/// resampling psi at log-shifted coordinates. Dual words on sampled input
/// use the plan's differentiation method.
inline PiecewiseFn hadamard_apply(const KernelDistribution& T, const PiecewiseFn& phi, const ConvPlan& plan) {
  if (T.dim != phi.grid.dim()) throw std::invalid_argument("hadamard_apply: dimension mismatch");
  if (!phi.grid.same_as(plan.grid)) throw std::invalid_argument("hadamard_apply: test function grid differs from plan grid");
  const LogGrid& grid = plan.grid;

  std::vector<std::string> warnings;
  double phi_max = 0.0, phi_edge = 0.0;
  for (const auto& p : phi.parts) {
    phi_max = std::max(phi_max, p.values.max_abs());
    phi_edge = std::max(phi_edge, detail::boundary_max_abs(p.values));
  }
  if (phi_max > 0.0 && phi_edge > 1e-12 * std::max(1.0, phi_max))
    warnings.push_back("test function does not decay below 1e-12 at the window edge; truncation error likely");

  std::map<std::pair<unsigned, std::vector<int>>, Tensor> psi_cache;
  const auto psi_of = [&](unsigned src_mask, const MultiIndex& beta) -> const Tensor& {
    const auto key = std::make_pair(src_mask, beta.entries());
    auto it = psi_cache.find(key);
    if (it == psi_cache.end())
      it = psi_cache.emplace(key, apply_dual_word(phi.parts[src_mask].values, beta, grid, plan.deriv)).first;
    return it->second;
  };
  const auto part_zero = [&](unsigned q) { return phi.parts[q].values.all_zero(); };
  return detail::apply_assemble(T, plan, psi_of, part_zero, std::move(warnings));
}

inline PiecewiseFn hadamard_apply(const KernelDistribution& T, const QuadrantFn& phi, const ConvPlan& plan) {
  return hadamard_apply(T, piecewise_from(phi), plan);
}

/// Same action for an evaluable test function: the dual words
/// (theta*)^beta phi are sampled from their closed forms instead of
/// differencing samples, which keeps the far tails exact.
inline PiecewiseFn hadamard_apply(const KernelDistribution& T, const TestFunction& phi, const ConvPlan& plan) {
  if (T.dim != phi.dim) throw std::invalid_argument("hadamard_apply: dimension mismatch");
  const LogGrid& grid = plan.grid;
  const int d = grid.dim();

  std::map<std::pair<unsigned, std::vector<int>>, Tensor> psi_cache;
  const auto psi_of = [&](unsigned src_mask, const MultiIndex& beta) -> const Tensor& {
    const auto key = std::make_pair(src_mask, beta.entries());
    auto it = psi_cache.find(key);
    if (it == psi_cache.end()) {
      const SeparableLogFn& fn = *phi.parts[src_mask];
      // per-axis factor (-1)^{b} sum_m C(b, m) g^(m)
      std::vector<std::vector<double>> ax(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) {
        auto& arr = ax[static_cast<std::size_t>(j)];
        arr.resize(static_cast<std::size_t>(grid.n(j)));
        const int b = beta[j];
        for (Index i = 0; i < grid.n(j); ++i) {
          const double u = grid.node(j, i);
          double factor = 0.0;
          for (int m = 0; m <= b; ++m)
            factor += hadamard::detail::binomial(b, m) * fn.axes[static_cast<std::size_t>(j)].derivative(u, m);
          arr[static_cast<std::size_t>(i)] = (b % 2) ? -factor : factor;
        }
      }
      Tensor psi(grid.extents());
      std::vector<Index> idx(static_cast<std::size_t>(d), 0);
      Index lin = 0;
      do {
        double v = fn.weight;
        for (int j = 0; j < d; ++j) v *= ax[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        psi[lin++] = v;
      } while (next_multi_index(idx, grid.extents()));
      it = psi_cache.emplace(key, std::move(psi)).first;
    }
    return it->second;
  };
  const auto part_zero = [&](unsigned q) { return !phi.parts[q].has_value(); };
  return detail::apply_assemble(T, plan, psi_of, part_zero, {});
}

namespace detail {

/// The pairing weight grows polynomially toward the window edge, where the
/// transform path leaves roundoff on nodes whose true values vanish to
/// double precision (the operator class produces rapidly decreasing
/// outputs). Values below 3e-15 of the output maximum are flushed to zero
/// before integration so that noise does not get amplified by the weight;
/// the measured transform noise floor sits one to two orders below that.
inline double pair_with_output(const PiecewiseFn& S, PiecewiseFn f) {
  double global_max = 0.0;
  for (const auto& p : f.parts) global_max = std::max(global_max, p.values.max_abs());
  if (global_max > 0.0) {
    const double floor = 3e-15 * global_max;
    for (auto& p : f.parts)
      for (Index i = 0; i < p.values.size(); ++i)
        if (std::abs(p.values[i]) < floor) p.values[i] = 0.0;
  }
  double acc = 0.0;
  for (unsigned q = 0; q < f.quadrant_count(); ++q) acc += integrate_product(S.parts[q], f.parts[q]);
  return acc;
}

}  // namespace detail

/// <S * T, phi> = int s(y) f(y) dy with f = hadamard_apply(T, phi), summed
/// over quadrants; S enters as a sampled (polynomially bounded) density.
inline double star_pair(const PiecewiseFn& S, const KernelDistribution& T, const PiecewiseFn& phi,
                        const ConvPlan& plan) {
  if (!S.grid.same_as(plan.grid)) throw std::invalid_argument("star_pair: density grid differs from plan grid");
  return detail::pair_with_output(S, hadamard_apply(T, phi, plan));
}

/// Evaluable-test-function variant: dual words come from closed forms.
inline double star_pair(const PiecewiseFn& S, const KernelDistribution& T, const TestFunction& phi,
                        const ConvPlan& plan) {
  if (!S.grid.same_as(plan.grid)) throw std::invalid_argument("star_pair: density grid differs from plan grid");
  return detail::pair_with_output(S, hadamard_apply(T, phi, plan));
}

}  // namespace hadamard
