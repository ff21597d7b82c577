#pragma once

#include <complex>
#include <map>
#include <numbers>
#include <vector>

#include "hadamard/tensor.hpp"

namespace hadamard::spectral {

using Complex = std::complex<double>;

inline bool is_pow2(Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace detail {

// Forward twiddles e^{-2πik/n}, k < n/2, cached per size.
inline const std::vector<Complex>& twiddles(std::size_t n) {
  thread_local std::map<std::size_t, std::vector<Complex>> cache;
  auto& t = cache[n];
  if (t.empty() && n >= 2) {
    t.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      t[k] = Complex(std::cos(ang), std::sin(ang));
    }
  }
  return t;
}

}  // namespace detail

/// In-place iterative radix-2 transform; size must be a power of two.
/// The inverse includes the 1/n normalization.
inline void fft(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0) return;
  if (!is_pow2(static_cast<Index>(n))) throw std::invalid_argument("fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& tw = detail::twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        Complex w = tw[k * step];
        if (inverse) w = std::conj(w);
        const Complex u = a[i + k];
        const Complex t = w * a[i + k + len / 2];
        a[i + k] = u + t;
        a[i + k + len / 2] = u - t;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= inv;
  }
}

/// Separable multi-axis transform of a flat row-major complex array.
inline void fft_nd(std::vector<Complex>& a, const Shape& shape, bool inverse) {
  if (static_cast<Index>(a.size()) != shape_size(shape))
    throw std::invalid_argument("fft_nd: data size does not match shape");
  std::vector<Complex> line;
  for (int axis = 0; axis < static_cast<int>(shape.size()); ++axis) {
    const auto n = static_cast<std::size_t>(shape[static_cast<std::size_t>(axis)]);
    line.resize(n);
    for_each_line(shape, axis, [&](Index base, Index stride) {
      for (std::size_t i = 0; i < n; ++i) line[i] = a[static_cast<std::size_t>(base + static_cast<Index>(i) * stride)];
      fft(line, inverse);
      for (std::size_t i = 0; i < n; ++i) a[static_cast<std::size_t>(base + static_cast<Index>(i) * stride)] = line[i];
    });
  }
}

}  // namespace hadamard::spectral
