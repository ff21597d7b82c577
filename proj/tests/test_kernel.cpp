#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "hadamard/io.hpp"
#include "hadamard/kernel.hpp"
#include "support/oracles.hpp"

using namespace hadamard;
using nlohmann::json;

namespace {

KernelDistribution exp_symmetric_1d() {
  KernelDistribution k;
  k.dim = 1;
  k.k_star = 5;
  k.densities.push_back(
      DensityTerm{MultiIndex::zero(1), SignVector::positive(1), 1.0, SeparableLogFn{{LogProfile::exp2cosh()}, 1.0}});
  return k;
}

}  // namespace

TEST_CASE("kernel_dirac validates its point", "[kernel]") {
  const KernelDistribution id = kernel_dirac({1.0}, 1.0);
  CHECK(id.k_star == kUnboundedKStar);
  CHECK(id.diracs.size() == 1);

  const KernelDistribution k2 = kernel_dirac({0.5, -3.0}, 1.0);
  const SignVector q = dirac_quadrant(k2.diracs[0]);
  CHECK(q[0] == 1);
  CHECK(q[1] == -1);

  CHECK_THROWS_AS(kernel_dirac({0.0, 1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("validate_theta_rapid flags truncated mass", "[kernel]") {
  const LogGrid g = symmetric_grid(1, 6.0, 1024);

  const auto ok = validate_theta_rapid(exp_symmetric_1d(), 1, g);
  REQUIRE(ok.terms.size() == 1);
  CHECK_FALSE(ok.any_flagged);
  CHECK(ok.terms[0].edge_ratio < 1e-6);

  KernelDistribution flat;
  flat.dim = 1;
  flat.k_star = 1;
  flat.densities.push_back(
      DensityTerm{MultiIndex::zero(1), SignVector::positive(1), 1.0, SeparableLogFn{{LogProfile::expo(0.0)}, 1.0}});
  const auto bad = validate_theta_rapid(flat, 1, g);
  CHECK(bad.any_flagged);
  CHECK(bad.terms[0].edge_ratio == Catch::Approx(1.0).margin(1e-9));

  const auto none = validate_theta_rapid(kernel_dirac({2.0}, 1.0), 1, g);
  CHECK(none.terms.empty());
  CHECK_FALSE(none.any_flagged);

  CHECK_THROWS_AS(validate_theta_rapid(flat, 2, g), std::invalid_argument);
}

TEST_CASE("apply_to_test evaluates point masses and densities", "[kernel]") {
  const LogGrid g = symmetric_grid(1, 6.0, 1024);
  const std::vector<double> mu{0.2}, s{0.4};
  const TestFunction phi = bump_gauss(SignVector::positive(1), mu, s);

  // delta_1 is point evaluation
  {
    const double got = apply_to_test(kernel_dirac({1.0}, 1.0), phi, g);
    CHECK(got == Catch::Approx(test_value(phi, std::vector<double>{1.0})).epsilon(1e-14));
  }
  // theta delta_1 pairs as -phi(1) - phi'(1); for the log-gauss bump
  // phi'(1) = d/du g(u)|_{u=0}
  {
    const KernelDistribution k = kernel_dirac_word({1.0}, MultiIndex({1}), 1.0);
    const double got = apply_to_test(k, phi, g);
    const LogProfile& prof = phi.parts[0]->axes[0];
    const double want = -prof.value(0.0) - prof.derivative(0.0, 1);
    CHECK(got == Catch::Approx(want).epsilon(1e-13));
  }
  // exp-symmetric density against phi(x) = 1/x: the Bessel-type integral
  {
    TestFunction inv = TestFunction::on_quadrant(SignVector::positive(1), SeparableLogFn{{LogProfile::expo(-1.0)}, 1.0});
    const double got = apply_to_test(exp_symmetric_1d(), inv, g);
    const double oracle = oracles::integrate_halfline([](double x) { return std::exp(-(x + 1.0 / x)) / x; });
    CHECK(oracle == Catch::Approx(oracles::kTwoK0_2).epsilon(1e-12));
    CHECK(got == Catch::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("apply_to_test is linear and consistent for dirac kernels", "[kernel]") {
  const LogGrid g = symmetric_grid(1, 6.0, 1024);
  const std::vector<double> mu{0.0}, s{0.5};
  const TestFunction phi = bump_gauss(SignVector::positive(1), mu, s);

  KernelDistribution gl;
  gl.dim = 1;
  gl.k_star = 3;
  gl.densities.push_back(
      DensityTerm{MultiIndex::zero(1), SignVector::positive(1), 0.7, SeparableLogFn{{LogProfile::gauss(0.1, 0.4)}, 1.0}});
  const KernelDistribution es = exp_symmetric_1d();

  const double sum = apply_to_test(kernel_sum(gl, es), phi, g);
  const double parts = apply_to_test(gl, phi, g) + apply_to_test(es, phi, g);
  CHECK(std::abs(sum - parts) <= 1e-12 * (1.0 + std::abs(sum)));

  const KernelDistribution d = kernel_dirac({std::exp(0.3)}, -2.5);
  const double got = apply_to_test(d, phi, g);
  const double want = -2.5 * test_value(phi, std::vector<double>{std::exp(0.3)});
  CHECK(got == Catch::Approx(want).epsilon(1e-14));
}

TEST_CASE("integration-by-parts shifts of the representation", "[kernel]") {
  const LogGrid g = symmetric_grid(1, 6.0, 1024);
  const std::vector<double> mu{0.3}, s{0.45};
  const TestFunction phi = bump_gauss(SignVector::positive(1), mu, s);
  const double tmu = 0.1, ts = 0.35;

  // representation A: theta^1 applied to a gaussian profile
  KernelDistribution repA;
  repA.dim = 1;
  repA.k_star = 1;
  repA.densities.push_back(
      DensityTerm{MultiIndex({1}), SignVector::positive(1), 1.0, SeparableLogFn{{LogProfile::gauss(tmu, ts)}, 1.0}});

  // representation B: beta -> beta - e_j with the derivative of the density
  KernelDistribution repB;
  repB.dim = 1;
  repB.k_star = 1;
  repB.densities.push_back(DensityTerm{
      MultiIndex({0}), SignVector::positive(1), 1.0,
      SeparableLogFn{{LogProfile::custom([=](double u) { return detail::gauss_log_derivative(u, tmu, ts, 1); })}, 1.0}});

  // representation C: beta -> beta + e_j with the antiderivative (erf)
  KernelDistribution repC;
  repC.dim = 1;
  repC.k_star = 1;
  repC.densities.push_back(DensityTerm{
      MultiIndex({2}), SignVector::positive(1), 1.0,
      SeparableLogFn{{LogProfile::custom([=](double u) {
        return ts * std::sqrt(std::numbers::pi / 2.0) * (1.0 + std::erf((u - tmu) / (std::sqrt(2.0) * ts)));
      })},
                     1.0}});

  const double a = apply_to_test(repA, phi, g);
  const double b = apply_to_test(repB, phi, g);
  const double c = apply_to_test(repC, phi, g);
  CHECK(std::abs(a - b) <= 1e-6 * (1.0 + std::abs(a)));
  CHECK(std::abs(a - c) <= 1e-6 * (1.0 + std::abs(a)));
}

TEST_CASE("support_distance over term kinds", "[kernel]") {
  CHECK(support_distance(kernel_dirac({2.0}, 1.0)) == 2.0);

  // tabulated density supported on [1, 2] in physical units
  TableAxis t;
  t.t0 = 0.0;
  t.dt = std::numbers::ln2 / 63.0;
  t.v.assign(64, 1.0);
  t.lo = 0.0;
  t.hi = std::numbers::ln2;
  KernelDistribution tab;
  tab.dim = 1;
  tab.k_star = 1;
  tab.densities.push_back(
      DensityTerm{MultiIndex::zero(1), SignVector::positive(1), 1.0, SeparableLogFn{{LogProfile::table(t)}, 1.0}});
  CHECK(support_distance(tab) == Catch::Approx(1.0).epsilon(1e-14));

  CHECK(support_distance(exp_symmetric_1d()) == 0.0);

  // the infimum over mixed terms
  CHECK(support_distance(kernel_sum(tab, kernel_dirac({2.0}, 1.0))) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("kernel spec files parse strictly", "[kernel][io]") {
  const std::string dir = HADAMARD_KERNELS_DIR;
  for (const char* name : {"dirac_identity_1d.json", "dirac_a2_1d.json", "theta_dirac_1d.json",
                           "exp_symmetric_1d.json", "gauss_log_1d.json", "dirac_identity_2d.json",
                           "exp_symmetric_2d.json"}) {
    const io::KernelSpec spec = io::load_kernel_file(dir + "/" + name);
    CHECK(spec.kernel.dim >= 1);
    CHECK(spec.content_hash != 0);
  }

  // defaults: pure dirac kernels carry the unbounded sentinel
  CHECK(io::load_kernel_file(dir + "/dirac_identity_1d.json").kernel.k_star == kUnboundedKStar);
  CHECK(io::load_kernel_file(dir + "/exp_symmetric_1d.json").kernel.k_star == 5);

  // unknown fields are rejected at every level
  json j = json::parse(R"({"dim":1, "terms":[{"kind":"dirac","params":{"point":[1.0]}}], "extra":1})");
  CHECK_THROWS_WITH(io::parse_kernel(j), Catch::Matchers::ContainsSubstring("unknown field"));
  j = json::parse(R"({"dim":1, "terms":[{"kind":"dirac","params":{"point":[1.0]},"color":"red"}]})");
  CHECK_THROWS_WITH(io::parse_kernel(j), Catch::Matchers::ContainsSubstring("unknown field"));
  j = json::parse(R"({"dim":1, "terms":[{"kind":"density","quadrant":[1],"family":"gauss_log",
                      "params":{"mu":[0.0],"s":[0.5],"skew":[1.0]}}]})");
  CHECK_THROWS_WITH(io::parse_kernel(j), Catch::Matchers::ContainsSubstring("unknown field"));

  // inconsistent quadrant vs point sign
  j = json::parse(R"({"dim":1, "terms":[{"kind":"dirac","quadrant":[-1],"params":{"point":[1.0]}}]})");
  CHECK_THROWS_AS(io::parse_kernel(j), std::invalid_argument);

  // dirac points on a hyperplane are rejected
  j = json::parse(R"({"dim":2, "terms":[{"kind":"dirac","params":{"point":[1.0, 0.0]}}]})");
  CHECK_THROWS_AS(io::parse_kernel(j), std::invalid_argument);

  // a table round-trips through the parser and evaluates inside its support
  j = json::parse(R"({"dim":1, "k_star":1, "terms":[{"kind":"density","quadrant":[1],"family":"table",
       "params":{"axes":[{"t0":0.0,"dt":0.011,"values":[1.0,1.0,1.0,1.0,1.0,1.0,1.0,1.0],"support_log":[0.0,0.077]}]},
       "weight":2.0}]})");
  const io::KernelSpec tab = io::parse_kernel(j);
  REQUIRE(tab.kernel.densities.size() == 1);
  CHECK(value(tab.kernel.densities[0].density, std::vector<double>{0.03}) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(value(tab.kernel.densities[0].density, std::vector<double>{0.5}) == 0.0);
}
