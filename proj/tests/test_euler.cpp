#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hadamard/euler.hpp"
#include "hadamard/families.hpp"
#include "support/oracles.hpp"

using namespace hadamard;

namespace {

EulerPolynomial random_poly(std::mt19937_64& rng, int dim, int max_deg) {
  std::uniform_int_distribution<int> coeff(-6, 6);
  std::uniform_int_distribution<int> deg(0, max_deg);
  EulerPolynomial p(dim);
  for (int t = 0; t < 5; ++t) {
    std::vector<int> gamma(static_cast<std::size_t>(dim));
    for (auto& gj : gamma) gj = deg(rng);
    p.add_term(MultiIndex(gamma), coeff(rng));
  }
  return p;
}

}  // namespace

TEST_CASE("euler_dual expands theta -> -theta-1", "[euler]") {
  EulerPolynomial theta = EulerPolynomial::theta(1, 0);
  EulerPolynomial want(1);
  want.add_term(MultiIndex({1}), -1.0);
  want.add_term(MultiIndex({0}), -1.0);
  CHECK(euler_dual(theta) == want);

  CHECK(euler_dual(EulerPolynomial::constant(1, 1.0)) == EulerPolynomial::constant(1, 1.0));

  EulerPolynomial theta2 = EulerPolynomial::theta_word(MultiIndex({2}));
  EulerPolynomial want2(1);
  want2.add_term(MultiIndex({2}), 1.0);
  want2.add_term(MultiIndex({1}), 2.0);
  want2.add_term(MultiIndex({0}), 1.0);
  CHECK(euler_dual(theta2) == want2);
}

TEST_CASE("euler_dual is an exact involution", "[euler]") {
  std::mt19937_64 rng(13u);
  for (int rep = 0; rep < 30; ++rep) {
    const EulerPolynomial p = random_poly(rng, 1, 4);
    CHECK(euler_dual(euler_dual(p)) == p);
  }
  for (int rep = 0; rep < 20; ++rep) {
    const EulerPolynomial p = random_poly(rng, 2, 3);
    CHECK(euler_dual(euler_dual(p)) == p);
  }
}

TEST_CASE("euler_apply acts diagonally on monomials", "[euler]") {
  const LogGrid g = symmetric_grid(1, 6.0, 1024);
  const SignVector plus = SignVector::positive(1);
  const EulerPolynomial theta = EulerPolynomial::theta(1, 0);

  const QuadrantFn x3 = sample([](std::span<const double> x) { return x[0] * x[0] * x[0]; }, g, plus);
  const QuadrantFn th = euler_apply(theta, x3, DerivMethod::fd4);
  for (Index i = g.n(0) / 4; i < 3 * g.n(0) / 4; i += 57)
    CHECK(th.values[i] == Catch::Approx(3.0 * x3.values[i]).epsilon(1e-6));

  const QuadrantFn fe = sample([](std::span<const double> x) { return std::exp(-x[0]); }, g, plus);
  const QuadrantFn the = euler_apply(theta, fe, DerivMethod::fd4);
  for (Index i = g.n(0) / 4; i < 3 * g.n(0) / 4; i += 57) {
    const double x = std::exp(g.node(0, i));
    CHECK(the.values[i] == Catch::Approx(-x * std::exp(-x)).margin(1e-7));
  }
}

TEST_CASE("euler_apply handles product words in two dimensions", "[euler]") {
  const LogGrid g = symmetric_grid(2, 4.0, 128);
  const SignVector plus = SignVector::positive(2);
  const QuadrantFn f = sample([](std::span<const double> x) { return x[0] * x[0] * x[1]; }, g, plus);
  const QuadrantFn th = euler_apply(EulerPolynomial::theta_word(MultiIndex({1, 1})), f, DerivMethod::fd4);
  const Index n = g.n(0);
  for (Index i = n / 4; i < 3 * n / 4; i += 13)
    for (Index j = n / 4; j < 3 * n / 4; j += 13) {
      const Index lin = i * n + j;
      CHECK(th.values[lin] == Catch::Approx(2.0 * f.values[lin]).epsilon(1e-5));
    }
  CHECK_THROWS_AS(euler_apply(EulerPolynomial::theta(1, 0), f), std::invalid_argument);
}

TEST_CASE("eigen-exactness across words and exponents", "[euler]") {
  const LogGrid g = symmetric_grid(1, 6.0, 1024);
  const SignVector plus = SignVector::positive(1);
  for (int alpha = 0; alpha <= 4; ++alpha) {
    const QuadrantFn f = sample([&](std::span<const double> x) { return std::pow(x[0], alpha); }, g, plus);
    for (int gamma = 1; gamma <= 3; ++gamma) {
      const QuadrantFn th = euler_apply(EulerPolynomial::theta_word(MultiIndex({gamma})), f, DerivMethod::fd4);
      const double eig = std::pow(static_cast<double>(alpha), gamma);
      for (Index i = g.n(0) / 4; i < 3 * g.n(0) / 4; i += 101) {
        const double want = eig * f.values[i];
        CHECK(std::abs(th.values[i] - want) <= 1e-4 * (1.0 + std::abs(want)));
      }
    }
  }
}

TEST_CASE("spectral differentiation is near-exact on decaying bumps", "[euler]") {
  const LogGrid g = symmetric_grid(1, 6.0, 512);
  const LogProfile bump = LogProfile::gauss(0.3, 0.5);
  const QuadrantFn f = sample_separable(SeparableLogFn{{bump}, 1.0}, g, SignVector::positive(1));
  const QuadrantFn th = euler_apply(EulerPolynomial::theta(1, 0), f, DerivMethod::spectral);
  double worst = 0.0;
  for (Index i = 0; i < g.n(0); ++i) worst = std::max(worst, std::abs(th.values[i] - bump.derivative(g.node(0, i), 1)));
  CHECK(worst < 1e-11);
}

TEST_CASE("fd4 truncation drops by ~16x when dt halves", "[euler]") {
  double err[2] = {0.0, 0.0};
  const LogProfile bump = LogProfile::gauss(0.2, 0.5);
  for (int r = 0; r < 2; ++r) {
    const LogGrid g = symmetric_grid(1, 6.0, 256 << r);
    const QuadrantFn f = sample_separable(SeparableLogFn{{bump}, 1.0}, g, SignVector::positive(1));
    const QuadrantFn th = euler_apply(EulerPolynomial::theta(1, 0), f, DerivMethod::fd4);
    for (Index i = 0; i < g.n(0); ++i)
      err[r] = std::max(err[r], std::abs(th.values[i] - bump.derivative(g.node(0, i), 1)));
  }
  const double ratio = err[0] / err[1];
  CHECK(ratio > 11.2);
  CHECK(ratio < 20.8);
}

TEST_CASE("euler_pair quadrature and duality", "[euler]") {
  const LogGrid g = symmetric_grid(1, 6.0, 1024);
  const SignVector plus = SignVector::positive(1);
  const SeparableLogFn tf{{LogProfile::gauss(-0.4, 0.5)}, 1.0};
  const SeparableLogFn pf{{LogProfile::gauss(0.3, 0.45)}, 1.0};
  const QuadrantFn t = sample_separable(tf, g, plus);
  const QuadrantFn phi = sample_separable(pf, g, plus);

  // P = 1: plain pairing against the oracle integral
  const double got = euler_pair(EulerPolynomial::constant(1, 1.0), t, phi);
  const double want = oracles::integrate_halfline([&](double x) {
    const double u = std::log(x);
    return tf.axes[0].value(u) * pf.axes[0].value(u);
  });
  CHECK(got == Catch::Approx(want).epsilon(1e-11));

  // P = theta: integration by parts computed two ways
  const EulerPolynomial theta = EulerPolynomial::theta(1, 0);
  const double lhs = euler_pair(theta, t, phi, DerivMethod::spectral);
  const double rhs = integrate_product(euler_apply(theta, t, DerivMethod::spectral), phi);
  CHECK(std::abs(lhs - rhs) <= 1e-10);

  // zero test function annihilates any pairing
  const QuadrantFn zero = sample([](std::span<const double>) { return 0.0; }, g, plus);
  std::mt19937_64 rng(3u);
  CHECK(euler_pair(random_poly(rng, 1, 3), t, zero) == 0.0);

  // duality for a full word, against the derivative moved onto t
  const EulerPolynomial word = EulerPolynomial::theta_word(MultiIndex({2}));
  const double a = euler_pair(word, t, phi, DerivMethod::spectral);
  const double b = euler_pair(EulerPolynomial::constant(1, 1.0), euler_apply(word, t, DerivMethod::spectral), phi,
                              DerivMethod::spectral);
  CHECK(std::abs(a - b) <= 1e-8);

  CHECK_THROWS_AS(euler_pair(theta, t, sample([](std::span<const double>) { return 0.0; },
                                               symmetric_grid(1, 5.0, 512), plus)),
                  std::invalid_argument);
}
