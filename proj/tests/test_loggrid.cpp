#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <random>

#include "hadamard/loggrid.hpp"
#include "support/oracles.hpp"

using namespace hadamard;

TEST_CASE("make_grid constructs and validates", "[loggrid]") {
  const LogGrid g = make_grid(1, {-5.0}, {0.01}, {1001});
  CHECK(g.node(0, 0) == -5.0);
  CHECK(g.node(0, 1000) == Catch::Approx(5.0).margin(1e-12));
  CHECK(g.total_nodes() == 1001);

  const LogGrid g2 = make_grid(2, {-4.0, -4.0}, {0.05, 0.05}, {161, 161});
  CHECK(g2.total_nodes() == 161 * 161);

  CHECK_THROWS_AS(make_grid(1, {0.0}, {-0.1}, {100}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, {0.0}, {0.1}, {4}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, {0.0}, {0.0}, {100}), std::invalid_argument);
}

TEST_CASE("sampling is exact at nodes", "[loggrid]") {
  const LogGrid g = make_grid(1, {-5.0}, {0.01}, {1001});
  const SignVector plus = SignVector::positive(1);

  const QuadrantFn fx = sample([](std::span<const double> x) { return x[0]; }, g, plus);
  for (Index i = 0; i < g.n(0); i += 111) CHECK(fx.values[i] == std::exp(g.node(0, i)));

  // x^3 at the node t = 0 is exactly 1
  const QuadrantFn fc = sample([](std::span<const double> x) { return x[0] * x[0] * x[0]; }, g, plus);
  CHECK(fc.values[500] == 1.0);

  const QuadrantFn fe = sample([](std::span<const double> x) { return std::exp(-(x[0] + 1.0 / x[0])); }, g, plus);
  CHECK(fe.values[500] == Catch::Approx(0.1353352832366127).epsilon(1e-14));

  const auto bad = [&](std::span<const double> x) { return x[0] > 140.0 ? INFINITY : 1.0; };
  CHECK_THROWS_WITH(sample(bad, g, plus), Catch::Matchers::ContainsSubstring("node"));
}

TEST_CASE("log relabeling is a bit-exact involution", "[loggrid]") {
  const LogGrid g = make_grid(1, {-3.0}, {0.02}, {256});
  std::mt19937_64 rng(7u);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const QuadrantFn f = sample([&](std::span<const double>) { return u(rng); }, g, SignVector::positive(1));
  const QuadrantFn back = to_linear(to_log(f), f.quadrant);
  REQUIRE(back.values.size() == f.values.size());
  CHECK(std::memcmp(back.values.data(), f.values.data(), sizeof(double) * static_cast<std::size_t>(f.values.size())) == 0);

  // x^c turns into e^{c t} under the relabeling
  const double c = 1.75;
  const LogField lg = to_log(sample([&](std::span<const double> x) { return std::pow(x[0], c); }, g, SignVector::positive(1)));
  for (Index i = 0; i < g.n(0); i += 37)
    CHECK(lg.values[i] == Catch::Approx(std::exp(c * g.node(0, i))).epsilon(1e-13));

  // constants are fixed points
  const LogField one = to_log(sample([](std::span<const double>) { return 1.0; }, g, SignVector::positive(1)));
  for (Index i = 0; i < g.n(0); ++i) CHECK(one.values[i] == 1.0);
}

TEST_CASE("weight_omega values and bounds", "[loggrid]") {
  {
    const double x = 0.0;
    CHECK(weight_omega(std::span<const double>(&x, 1), 1) == 2.0);
  }
  {
    const double x = 1.0;
    CHECK(weight_omega(std::span<const double>(&x, 1), 1) == Catch::Approx(3.0861612696304876).epsilon(1e-14));
  }
  {
    const std::vector<double> x{0.0, 0.0};
    CHECK(weight_omega(x, 1) == 4.0);
    CHECK(weight_omega(x, 7) == 4.0);
  }
  {
    const double x = 200.0;
    CHECK_THROWS_AS(weight_omega(std::span<const double>(&x, 1), 5), window_error);
  }

  std::mt19937_64 rng(11u);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int dim = 1; dim <= 3; ++dim) {
    for (int k : {1, 2, 5}) {
      for (int rep = 0; rep < 500; ++rep) {
        std::vector<double> x(static_cast<std::size_t>(dim));
        double l1 = 0.0;
        for (auto& xj : x) {
          xj = u(rng);
          l1 += std::abs(xj) * static_cast<double>(k);
        }
        const double w = weight_omega(x, k);
        const double lower = std::exp(l1);
        REQUIRE(lower <= w);
        REQUIRE(w <= std::ldexp(lower, dim));
      }
    }
  }
}

TEST_CASE("decay_norm behaves like the weighted sup", "[loggrid]") {
  const LogGrid g = make_grid(1, {-5.0}, {0.01}, {1001});
  const SignVector plus = SignVector::positive(1);

  const QuadrantFn zero = sample([](std::span<const double>) { return 0.0; }, g, plus);
  for (int k = 0; k <= 3; ++k) CHECK(decay_norm(zero, k) == 0.0);

  // k = 0 weight is exactly |y|^0 + |y|^0 = 2
  const QuadrantFn bump = sample(
      [](std::span<const double> x) {
        const double u = std::log(x[0]);
        return std::exp(-8.0 * u * u);
      },
      g, plus);
  CHECK(decay_norm(bump, 0) == Catch::Approx(2.0 * bump.values.max_abs()).epsilon(1e-14));

  const QuadrantFn f = sample([](std::span<const double> x) { return std::exp(-(x[0] + 1.0 / x[0])); }, g, plus);
  const double norm = decay_norm(f, 1);
  double edge = 0.0;
  for (Index i : {Index{0}, g.n(0) - 1}) {
    const double y = std::exp(g.node(0, i));
    edge = std::max(edge, std::abs(f.values[i]) * (y * y + 1.0 / (y * y)));
  }
  CHECK(edge < 1e-6 * norm);

  // monotone in k once every |y| >= 1
  const LogGrid outer = make_grid(1, {0.05}, {0.01}, {256});
  const QuadrantFn h = sample([](std::span<const double> x) { return std::exp(-x[0]); }, outer, plus);
  for (int k = 0; k < 4; ++k) CHECK(decay_norm(h, k + 1) >= decay_norm(h, k));
}

TEST_CASE("log-substitution quadrature matches an independent oracle", "[loggrid]") {
  const LogGrid g = make_grid(1, {-6.0}, {12.0 / 1024.0}, {1024});
  const auto f = [](double x) {
    const double u = std::log(x);
    return std::exp(-u * u / (2.0 * 0.45 * 0.45));
  };
  const QuadrantFn s = sample([&](std::span<const double> x) { return f(x[0]); }, g, SignVector::positive(1));
  const double want = oracles::integrate_halfline(f, -8.0, 8.0);
  CHECK(integrate(s) == Catch::Approx(want).epsilon(1e-11));
}
