#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hadamard/loggrid.hpp"
#include "hadamard/families.hpp"

namespace {

const std::string kCli = HADAMARD_CLI_PATH;
const std::string kKernels = HADAMARD_KERNELS_DIR;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string out_path = std::string(std::tmpnam(nullptr)) + ".out";
  const std::string cmd = kCli + " " + args + " > " + out_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.out = buf.str();
  std::remove(out_path.c_str());
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string temp_path(const char* suffix) { return std::string(std::tmpnam(nullptr)) + suffix; }

std::vector<double> csv_last_column(const std::string& text) {
  std::vector<double> vals;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    vals.push_back(std::stod(line.substr(pos + 1)));
  }
  return vals;
}

}  // namespace

TEST_CASE("eigentable emits the closed-form anchors", "[cli]") {
  const auto id = run("eigentable --kernel " + kKernels + "/dirac_identity_1d.json --alpha-max 3");
  REQUIRE(id.exit_code == 0);
  const auto vals = csv_last_column(id.out);
  REQUIRE(vals.size() == 4);
  for (double v : vals) CHECK(v == Catch::Approx(1.0).margin(1e-10));

  const auto d2 = run("eigentable --kernel " + kKernels + "/dirac_a2_1d.json --alpha-max 2");
  REQUIRE(d2.exit_code == 0);
  const auto v2 = csv_last_column(d2.out);
  REQUIRE(v2.size() == 3);
  CHECK(v2[0] == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(v2[1] == Catch::Approx(0.25).epsilon(1e-12));
  CHECK(v2[2] == Catch::Approx(0.125).epsilon(1e-12));

  const auto es = run("eigentable --kernel " + kKernels + "/exp_symmetric_1d.json --alpha-max 0");
  REQUIRE(es.exit_code == 0);
  CHECK(csv_last_column(es.out).at(0) == Catch::Approx(0.2277877454990669).epsilon(1e-7));
}

TEST_CASE("exit codes separate input and domain errors", "[cli]") {
  const std::string bad = temp_path(".json");
  {
    std::ofstream out(bad);
    out << "{ this is not json";
  }
  CHECK(run("eigentable --kernel " + bad + " --alpha-max 1").exit_code == 1);
  CHECK(run("verify --kernel " + bad).exit_code == 1);
  std::remove(bad.c_str());

  const std::string unknown = temp_path(".json");
  {
    std::ofstream out(unknown);
    out << R"({"dim":1, "terms":[{"kind":"dirac","params":{"point":[1.0]}}], "bogus":true})";
  }
  CHECK(run("eigentable --kernel " + unknown + " --alpha-max 1").exit_code == 1);
  std::remove(unknown.c_str());

  // a window too narrow for the requested moment is a domain error (exit 2)
  const auto r = run("eigentable --kernel " + kKernels + "/exp_symmetric_1d.json --alpha-max 4 --grid-window -2 2 --grid-n 64");
  CHECK(r.exit_code == 2);
}

TEST_CASE("eigentable output is byte-identical across runs", "[cli]") {
  const std::string out1 = temp_path(".csv"), out2 = temp_path(".csv");
  REQUIRE(run("eigentable --kernel " + kKernels + "/gauss_log_1d.json --alpha-max 3 --out " + out1).exit_code == 0);
  REQUIRE(run("eigentable --kernel " + kKernels + "/gauss_log_1d.json --alpha-max 3 --out " + out2).exit_code == 0);
  const std::string a = slurp(out1), b = slurp(out2);
  REQUIRE_FALSE(a.empty());
  CHECK(a == b);
  const std::string meta = slurp(out1 + ".meta.json");
  CHECK(meta.find("kernel_hash") != std::string::npos);
  std::remove(out1.c_str());
  std::remove(out2.c_str());
  std::remove((out1 + ".meta.json").c_str());
  std::remove((out2 + ".meta.json").c_str());
}

TEST_CASE("transform through the identity kernel returns the input samples", "[cli]") {
  using namespace hadamard;
  const auto r = run("transform --kernel " + kKernels + "/dirac_identity_1d.json --phi " + kKernels +
                     "/bump_phi_1d.json --grid-n 256");
  REQUIRE(r.exit_code == 0);
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "q_1,t_1,value");

  const LogGrid g = symmetric_grid(1, 6.0, 256);
  const std::vector<double> mu{0.0}, s{0.4};
  const PiecewiseFn phi = sample_piecewise(bump_gauss(SignVector::positive(1), mu, s), g);
  std::string line;
  Index row = 0;
  double worst = 0.0;
  while (std::getline(in, line)) {
    const auto p1 = line.find(','), p2 = line.rfind(',');
    const int q = std::stoi(line.substr(0, p1));
    const double value = std::stod(line.substr(p2 + 1));
    const unsigned mask = q > 0 ? 0u : 1u;
    const Index i = row % g.n(0);
    worst = std::max(worst, std::abs(value - phi.parts[mask].values[i]));
    ++row;
  }
  CHECK(row == 2 * g.n(0));
  CHECK(worst == 0.0);

  // the alias subcommand drives the same path
  const auto alias = run("convolve --kernel " + kKernels + "/dirac_identity_1d.json --phi " + kKernels +
                         "/bump_phi_1d.json --grid-n 256");
  CHECK(alias.exit_code == 0);
  CHECK(alias.out == r.out);
}

TEST_CASE("verify passes on defaults and reports failures via exit 3", "[cli]") {
  const std::string report = temp_path(".json");
  const auto ok = run("verify --grid-n 512 --out " + report);
  INFO(slurp(report));
  CHECK(ok.exit_code == 0);
  CHECK(slurp(report).find("\"passed\": true") != std::string::npos);
  std::remove(report.c_str());

  // an absurd tolerance override forces a reported failure
  const auto fail = run("verify --grid-n 512 --tol spectra.anchor_bessel=1e-18");
  CHECK(fail.exit_code == 3);
}

TEST_CASE("bench runs and writes its table", "[cli]") {
  const std::string csv = temp_path(".csv");
  const auto r = run("bench --sizes 64 128 --runs 2 --out " + csv);
  REQUIRE(r.exit_code == 0);
  const std::string table = slurp(csv);
  CHECK(table.rfind("n,method,seconds_median,runs\n", 0) == 0);
  CHECK(table.find("64,direct,") != std::string::npos);
  CHECK(table.find("128,fft,") != std::string::npos);
  std::remove(csv.c_str());
}
