// Command-line surface: kernel-spec ingestion, eigenvalue tables,
// convolution runs, the verification suite, and the direct-vs-FFT benchmark.
//
// Exit codes: 0 success, 1 input error, 2 numerical-domain error (window too
// small or weight overflow), 3 invariant failure in verify.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hadamard/bench.hpp"
#include "hadamard/hadamard.hpp"
#include "hadamard/verify.hpp"

namespace {

using nlohmann::json;

struct GridFlags {
  std::optional<hadamard::Index> n;
  std::optional<std::pair<double, double>> window;
};

void add_grid_flags(CLI::App* cmd, GridFlags& flags) {
  cmd->add_option_function<hadamard::Index>(
      "--grid-n", [&flags](hadamard::Index n) { flags.n = n; }, "Nodes per axis");
  cmd->add_option_function<std::vector<double>>(
         "--grid-window",
         [&flags](const std::vector<double>& w) {
           if (w.size() != 2) throw CLI::ValidationError("--grid-window needs two values A B");
           flags.window = std::make_pair(w[0], w[1]);
         },
         "Log-coordinate window [A, B) per axis")
      ->expected(2);
}

hadamard::LogGrid resolve_grid(const GridFlags& flags, const std::optional<hadamard::LogGrid>& from_spec, int dim) {
  using namespace hadamard;
  double a = -6.0, b = 6.0;
  Index n = dim >= 2 ? 128 : 1024;
  if (from_spec) {
    const LogGrid& g = *from_spec;
    a = g.t0(0);
    b = g.t0(0) + static_cast<double>(g.n(0)) * g.dt(0);
    n = g.n(0);
  }
  if (flags.window) {
    a = flags.window->first;
    b = flags.window->second;
  }
  if (flags.n) n = *flags.n;
  if (!(b > a)) throw std::invalid_argument("grid window is empty");
  const double dt = (b - a) / static_cast<double>(n);
  return make_grid(dim, std::vector<double>(static_cast<std::size_t>(dim), a),
                   std::vector<double>(static_cast<std::size_t>(dim), dt),
                   std::vector<Index>(static_cast<std::size_t>(dim), n));
}

hadamard::ConvMethod parse_method(const std::string& m) {
  if (m == "direct") return hadamard::ConvMethod::direct;
  if (m == "fft") return hadamard::ConvMethod::fft;
  throw std::invalid_argument("method must be 'direct' or 'fft'");
}

std::map<std::string, double> parse_tols(const std::vector<std::string>& entries) {
  std::map<std::string, double> tols;
  for (const auto& e : entries) {
    const auto eq = e.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--tol expects NAME=VALUE, got: " + e);
    tols[e.substr(0, eq)] = std::stod(e.substr(eq + 1));
  }
  return tols;
}

std::vector<int> parse_alpha_max(const std::string& s, int dim) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.size() == 1) out.assign(static_cast<std::size_t>(dim), out[0]);
  if (out.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("--alpha-max needs one value or one per axis");
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << content;
}

hadamard::TestFunction load_test_function(const std::string& path, int dim) {
  using namespace hadamard;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open test function file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("test function file: ") + e.what());
  }
  // same vocabulary as density terms: family + params + quadrant
  json wrapper;
  wrapper["dim"] = dim;
  wrapper["terms"] = json::array();
  json term = j;
  term["kind"] = "density";
  wrapper["terms"].push_back(term);
  io::KernelSpec spec = io::parse_kernel(wrapper);
  const DensityTerm& t = spec.kernel.densities.at(0);
  SeparableLogFn fn = t.density;
  fn.weight *= t.weight;
  return TestFunction::on_quadrant(t.quadrant, std::move(fn));
}

int cmd_eigentable(const std::string& kernel_path, const GridFlags& gflags, const std::string& method,
                   hadamard::Index pad, const std::string& alpha_max_str, const std::string& out_path) {
  using namespace hadamard;
  const io::KernelSpec spec = io::load_kernel_file(kernel_path);
  const LogGrid grid = resolve_grid(gflags, spec.grid, spec.kernel.dim);
  const ConvPlan plan = make_plan(grid, parse_method(method), pad);
  const HadamardOperator op = make_operator(spec.kernel, plan);
  const MultiIndex alpha_max(parse_alpha_max(alpha_max_str, spec.kernel.dim));
  const EigenTable table = eigen_table(op, alpha_max);

  std::ostringstream csv;
  io::write_eigen_table_csv(csv, table);
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    write_file(out_path, csv.str());
    write_file(out_path + ".meta.json", io::eigen_table_sidecar(table, spec, grid).dump(2) + "\n");
  }
  return 0;
}

int cmd_transform(const std::string& kernel_path, const std::string& phi_path, const GridFlags& gflags,
                  const std::string& method, hadamard::Index pad, const std::string& out_path) {
  using namespace hadamard;
  const io::KernelSpec spec = io::load_kernel_file(kernel_path);
  const LogGrid grid = resolve_grid(gflags, spec.grid, spec.kernel.dim);
  const ConvPlan plan = make_plan(grid, parse_method(method), pad);
  const TestFunction phi = load_test_function(phi_path, spec.kernel.dim);
  const PiecewiseFn f = hadamard_apply(spec.kernel, sample_piecewise(phi, grid), plan);
  for (const auto& w : f.warnings) std::cerr << "warning: " << w << "\n";
  std::ostringstream csv;
  io::write_piecewise_csv(csv, f);
  if (out_path.empty())
    std::cout << csv.str();
  else
    write_file(out_path, csv.str());
  return 0;
}

int cmd_verify(const std::string& kernel_path, const GridFlags& gflags, const std::vector<std::string>& tol_entries,
               const std::string& out_path) {
  using namespace hadamard;
  verify::Options opt;
  opt.tol_overrides = parse_tols(tol_entries);
  if (gflags.n) opt.n_1d = *gflags.n;
  if (gflags.window) opt.window = 0.5 * (gflags.window->second - gflags.window->first);

  json report;
  report["checks"] = json::array();

  if (!kernel_path.empty()) {
    // parse failures abort before any check runs
    const io::KernelSpec spec = io::load_kernel_file(kernel_path);
    const LogGrid grid = resolve_grid(gflags, spec.grid, spec.kernel.dim);
    const auto validation = validate_theta_rapid(spec.kernel, std::min(1, spec.kernel.k_star), grid);
    json jk;
    jk["name"] = "kernel.theta_rapid_decay";
    double worst = 0.0;
    for (const auto& t : validation.terms) worst = std::max(worst, t.edge_ratio);
    jk["measured"] = worst;
    jk["tolerance"] = 1e-3;
    jk["pass"] = !validation.any_flagged;
    report["checks"].push_back(jk);
  }

  const auto checks = verify::run_all(opt);
  bool all = true;
  for (const auto& c : checks) {
    json jc;
    jc["name"] = c.name;
    jc["measured"] = c.measured;
    jc["tolerance"] = c.tolerance;
    jc["pass"] = c.pass;
    if (!c.note.empty()) jc["note"] = c.note;
    report["checks"].push_back(jc);
    all = all && c.pass;
  }
  for (const auto& c : report["checks"])
    if (!c["pass"].get<bool>()) all = false;
  report["passed"] = all;

  const std::string text = report.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
  if (!all) {
    for (const auto& c : report["checks"])
      if (!c["pass"].get<bool>()) std::cerr << "FAILED: " << c["name"].get<std::string>() << "\n";
    return 3;
  }
  return 0;
}

int cmd_bench(const std::vector<hadamard::Index>& sizes, int runs, const std::string& out_path) {
  using namespace hadamard;
  const bench::Result result = bench::run(sizes, runs);
  std::ostringstream csv;
  csv << "n,method,seconds_median,runs\n";
  std::cout << "   n        direct [s]       fft [s]    speedup\n";
  for (Index n : sizes) {
    double direct = 0.0, fft = 0.0;
    for (const auto& r : result.rows) {
      csv << r.n << "," << r.method << "," << io::format_double(r.seconds_median) << "," << r.runs << "\n";
      if (r.n != n) continue;
      if (r.method == "direct") direct = r.seconds_median;
      if (r.method == "fft") fft = r.seconds_median;
    }
    std::printf("%6lld  %14.6f  %12.6f  %8.1fx\n", static_cast<long long>(n), direct, fft,
                fft > 0 ? direct / fft : 0.0);
  }
  const bool has4096 = std::find(sizes.begin(), sizes.end(), Index{4096}) != sizes.end();
  if (has4096) {
    const double speedup = result.speedup_at(4096);
    if (speedup < 10.0)
      std::cerr << "warning: fft speedup below 10x at n=4096 (measured " << speedup << "x)\n";
  }
  if (!out_path.empty()) write_file(out_path, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hadamard (multiplicative-convolution) operator toolkit"};
  app.require_subcommand(1);

  std::string kernel_path, out_path, method = "fft", alpha_max = "4", phi_path;
  hadamard::Index pad = -1;
  GridFlags gflags;
  std::vector<std::string> tol_entries;
  std::vector<hadamard::Index> sizes{256, 1024, 4096, 16384};
  int runs = 5;

  auto* eig = app.add_subcommand("eigentable", "Eigenvalue table m_alpha for a kernel spec");
  eig->add_option("--kernel", kernel_path, "Kernel spec JSON")->required();
  eig->add_option("--alpha-max", alpha_max, "Max exponent per axis, K or K1,K2,...");
  eig->add_option("--method", method, "direct|fft");
  eig->add_option("--pad", pad, "Zero-pad length per axis (fft)");
  eig->add_option("--out", out_path, "Output CSV path (stdout if absent)");
  add_grid_flags(eig, gflags);

  auto* tra = app.add_subcommand("transform", "Apply the operator of a kernel spec to a test function");
  tra->add_option("--kernel", kernel_path, "Kernel spec JSON")->required();
  tra->add_option("--phi", phi_path, "Test function JSON (family/params/quadrant)")->required();
  tra->add_option("--method", method, "direct|fft");
  tra->add_option("--pad", pad, "Zero-pad length per axis (fft)");
  tra->add_option("--out", out_path, "Output CSV path (stdout if absent)");
  add_grid_flags(tra, gflags);
  auto* con = app.add_subcommand("convolve", "Alias of transform");
  con->add_option("--kernel", kernel_path, "Kernel spec JSON")->required();
  con->add_option("--phi", phi_path, "Test function JSON")->required();
  con->add_option("--method", method, "direct|fft");
  con->add_option("--pad", pad, "Zero-pad length per axis (fft)");
  con->add_option("--out", out_path, "Output CSV path (stdout if absent)");
  add_grid_flags(con, gflags);

  auto* ver = app.add_subcommand("verify", "Run the invariant suite; nonzero exit on failure");
  ver->add_option("--kernel", kernel_path, "Optional kernel spec to validate first");
  ver->add_option("--tol", tol_entries, "Tolerance override NAME=VALUE (repeatable)");
  ver->add_option("--out", out_path, "Report JSON path (stdout if absent)");
  add_grid_flags(ver, gflags);

  auto* ben = app.add_subcommand("bench", "Direct-vs-FFT wall-time benchmark");
  ben->add_option("--sizes", sizes, "Grid sizes to time");
  ben->add_option("--runs", runs, "Runs per measurement (median reported)");
  ben->add_option("--out", out_path, "Output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eig->parsed()) return cmd_eigentable(kernel_path, gflags, method, pad, alpha_max, out_path);
    if (tra->parsed()) return cmd_transform(kernel_path, phi_path, gflags, method, pad, out_path);
    if (con->parsed()) return cmd_transform(kernel_path, phi_path, gflags, method, pad, out_path);
    if (ver->parsed()) return cmd_verify(kernel_path, gflags, tol_entries, out_path);
    if (ben->parsed()) return cmd_bench(sizes, runs, out_path);
  } catch (const hadamard::window_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
