#pragma once

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

#include "hadamard/convolve.hpp"
#include "hadamard/spectra.hpp"

namespace hadamard::bench {

struct Row {
  Index n = 0;
  std::string method;
  double seconds_median = 0.0;
  int runs = 0;
};

struct Result {
  std::vector<Row> rows;
  double speedup_at(Index n) const {
    double direct = 0.0, fft = 0.0;
    for (const auto& r : rows) {
      if (r.n != n) continue;
      if (r.method == "direct") direct = r.seconds_median;
      if (r.method == "fft") fft = r.seconds_median;
    }
    return fft > 0.0 ? direct / fft : 0.0;
  }
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

/// Times the 1-d operator application (gaussian-in-log density kernel, bump
/// test function) for each grid size, direct vs fft.
inline Result run(const std::vector<Index>& sizes, int runs) {
  Result out;
  for (Index n : sizes) {
    const LogGrid grid = symmetric_grid(1, 6.0, n);
    KernelDistribution kernel;
    kernel.dim = 1;
    kernel.k_star = 1;
    kernel.densities.push_back(
        DensityTerm{MultiIndex::zero(1), SignVector::positive(1), 1.0, SeparableLogFn{{LogProfile::gauss(0.0, 0.5)}, 1.0}});
    const std::vector<double> mu{0.0}, s{0.4};
    const PiecewiseFn phi = sample_piecewise(bump_gauss(SignVector::positive(1), mu, s), grid);
    for (const char* method : {"direct", "fft"}) {
      const ConvPlan plan = make_plan(grid, method == std::string("direct") ? ConvMethod::direct : ConvMethod::fft);
      std::vector<double> times;
      double sink = 0.0;
      for (int r = 0; r < runs; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const PiecewiseFn f = hadamard_apply(kernel, phi, plan);
        const auto t1 = std::chrono::steady_clock::now();
        sink += f.parts[0].values[0];
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      (void)sink;
      out.rows.push_back(Row{n, method, median(times), runs});
    }
  }
  return out;
}

}  // namespace hadamard::bench
