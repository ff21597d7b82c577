#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hadamard/kernel.hpp"
#include "hadamard/loggrid.hpp"
#include "hadamard/spectra.hpp"

namespace hadamard::io {

using nlohmann::json;

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Round-trip-safe formatting: 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

[[noreturn]] inline void fail(const std::string& context, const std::string& what) {
  throw std::invalid_argument("kernel spec: " + context + ": " + what);
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& context) {
  if (!j.is_object()) fail(context, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) fail(context, "unknown field \"" + key + "\"");
  }
}

inline std::vector<double> real_list(const json& j, std::size_t dim, const std::string& context) {
  if (!j.is_array() || j.size() != dim) fail(context, "expected an array of length dim");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(context, "expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::vector<int> int_list(const json& j, std::size_t dim, const std::string& context) {
  if (!j.is_array() || j.size() != dim) fail(context, "expected an array of length dim");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) fail(context, "expected integers");
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace detail

inline LogGrid parse_grid(const json& j, const std::string& context) {
  detail::check_keys(j, {"dim", "t0", "dt", "n"}, context);
  if (!j.contains("dim") || !j["dim"].is_number_integer()) detail::fail(context, "missing integer \"dim\"");
  const int dim = j["dim"].get<int>();
  if (dim < 1) detail::fail(context, "dim must be positive");
  const auto d = static_cast<std::size_t>(dim);
  if (!j.contains("t0") || !j.contains("dt") || !j.contains("n")) detail::fail(context, "grid needs t0, dt, n");
  const auto t0 = detail::real_list(j["t0"], d, context + ".t0");
  const auto dt = detail::real_list(j["dt"], d, context + ".dt");
  const auto ni = detail::int_list(j["n"], d, context + ".n");
  std::vector<Index> n(ni.begin(), ni.end());
  return make_grid(dim, t0, dt, n);
}

inline json grid_to_json(const LogGrid& g) {
  json j;
  j["dim"] = g.dim();
  for (int a = 0; a < g.dim(); ++a) {
    j["t0"].push_back(g.t0(a));
    j["dt"].push_back(g.dt(a));
    j["n"].push_back(g.n(a));
  }
  return j;
}

struct KernelSpec {
  KernelDistribution kernel;
  std::optional<LogGrid> grid;
  std::uint64_t content_hash = 0;
  std::string source;
};

namespace detail {

inline SeparableLogFn parse_density_family(const json& term, int dim, const std::string& context) {
  if (!term.contains("family") || !term["family"].is_string()) fail(context, "density term needs a \"family\"");
  const std::string family = term["family"].get<std::string>();
  const json params = term.contains("params") ? term["params"] : json::object();
  SeparableLogFn fn;
  if (family == "exp_symmetric") {
    check_keys(params, {}, context + ".params");
    for (int j = 0; j < dim; ++j) fn.axes.push_back(LogProfile::exp2cosh());
  } else if (family == "gauss_log") {
    check_keys(params, {"mu", "s"}, context + ".params");
    if (!params.contains("mu") || !params.contains("s")) fail(context, "gauss_log needs params.mu and params.s");
    const auto mu = real_list(params["mu"], static_cast<std::size_t>(dim), context + ".params.mu");
    const auto s = real_list(params["s"], static_cast<std::size_t>(dim), context + ".params.s");
    for (int j = 0; j < dim; ++j)
      fn.axes.push_back(LogProfile::gauss(mu[static_cast<std::size_t>(j)], s[static_cast<std::size_t>(j)]));
  } else if (family == "table") {
    check_keys(params, {"axes"}, context + ".params");
    if (!params.contains("axes") || !params["axes"].is_array() || params["axes"].size() != static_cast<std::size_t>(dim))
      fail(context, "table needs params.axes with one entry per axis");
    for (const auto& axj : params["axes"]) {
      check_keys(axj, {"t0", "dt", "values", "support_log"}, context + ".params.axes[]");
      if (!axj.contains("t0") || !axj.contains("dt") || !axj.contains("values"))
        fail(context, "table axis needs t0, dt, values");
      TableAxis t;
      t.t0 = axj["t0"].get<double>();
      t.dt = axj["dt"].get<double>();
      for (const auto& v : axj["values"]) t.v.push_back(v.get<double>());
      if (axj.contains("support_log")) {
        const auto sup = real_list(axj["support_log"], 2, context + ".support_log");
        t.lo = sup[0];
        t.hi = sup[1];
      } else {
        t.lo = t.t0;
        t.hi = t.t0 + t.dt * static_cast<double>(t.v.size() - 1);
      }
      fn.axes.push_back(LogProfile::table(std::move(t)));
    }
  } else {
    fail(context, "unknown family \"" + family + "\"");
  }
  return fn;
}

}  // namespace detail

/// Parses a kernel spec object. Unknown fields are rejected anywhere in the
/// document. Schema (one term per entry of "terms"):
///   {"dim":d, "k_star":k, "grid":{...}?, "terms":[
///      {"kind":"density", "beta":[..], "quadrant":[+-1,..],
///       "family":"exp_symmetric"|"gauss_log"|"table", "params":{..}, "weight":c},
///      {"kind":"dirac", "beta":[..], "params":{"point":[..]}, "weight":c}]}
inline KernelSpec parse_kernel(const json& j, std::uint64_t content_hash = 0) {
  detail::check_keys(j, {"dim", "k_star", "grid", "terms"}, "top level");
  if (!j.contains("dim") || !j["dim"].is_number_integer())
    detail::fail("top level", "missing integer \"dim\"");
  const int dim = j["dim"].get<int>();
  if (dim < 1) detail::fail("top level", "dim must be positive");
  if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty())
    detail::fail("top level", "needs a nonempty \"terms\" array");

  KernelSpec spec;
  spec.content_hash = content_hash;
  spec.kernel.dim = dim;
  if (j.contains("grid")) spec.grid = parse_grid(j["grid"], "grid");

  std::size_t index = 0;
  for (const auto& term : j["terms"]) {
    const std::string context = "terms[" + std::to_string(index++) + "]";
    if (!term.is_object() || !term.contains("kind") || !term["kind"].is_string())
      detail::fail(context, "needs a string \"kind\"");
    const std::string kind = term["kind"].get<std::string>();
    const double weight = term.contains("weight") ? term["weight"].get<double>() : 1.0;
    MultiIndex beta = MultiIndex::zero(dim);
    if (term.contains("beta")) {
      auto b = detail::int_list(term["beta"], static_cast<std::size_t>(dim), context + ".beta");
      beta = MultiIndex(std::move(b));
    }
    if (kind == "dirac") {
      detail::check_keys(term, {"kind", "beta", "quadrant", "family", "params", "weight"}, context);
      if (term.contains("family") && term["family"].get<std::string>() != "dirac")
        detail::fail(context, "dirac terms may only carry family \"dirac\"");
      if (!term.contains("params")) detail::fail(context, "dirac term needs params.point");
      detail::check_keys(term["params"], {"point"}, context + ".params");
      auto point = detail::real_list(term["params"]["point"], static_cast<std::size_t>(dim), context + ".params.point");
      for (double aj : point)
        if (aj == 0.0) detail::fail(context, "dirac point must avoid the coordinate hyperplanes");
      if (term.contains("quadrant")) {
        const SignVector q(detail::int_list(term["quadrant"], static_cast<std::size_t>(dim), context + ".quadrant"));
        if (!(q == SignVector::of_point(point))) detail::fail(context, "quadrant does not match the sign of point");
      }
      spec.kernel.diracs.push_back(DiracTerm{beta, std::move(point), weight});
    } else if (kind == "density") {
      detail::check_keys(term, {"kind", "beta", "quadrant", "family", "params", "weight"}, context);
      if (!term.contains("quadrant")) detail::fail(context, "density term needs a quadrant");
      SignVector quadrant(detail::int_list(term["quadrant"], static_cast<std::size_t>(dim), context + ".quadrant"));
      SeparableLogFn density = detail::parse_density_family(term, dim, context);
      spec.kernel.densities.push_back(DensityTerm{beta, std::move(quadrant), weight, std::move(density)});
    } else {
      detail::fail(context, "kind must be \"density\" or \"dirac\"");
    }
  }

  if (j.contains("k_star")) {
    if (!j["k_star"].is_number_integer()) detail::fail("top level", "k_star must be an integer");
    spec.kernel.k_star = j["k_star"].get<int>();
  } else {
    spec.kernel.k_star = spec.kernel.densities.empty() ? kUnboundedKStar : 1;
  }
  return spec;
}

inline KernelSpec load_kernel_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open kernel spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw std::invalid_argument("kernel spec: " + path + ": " + e.what());
  }
  KernelSpec spec = parse_kernel(j, fnv1a64(bytes));
  spec.source = path;
  return spec;
}

inline void write_eigen_table_csv(std::ostream& out, const EigenTable& table) {
  for (int j = 0; j < table.dim; ++j) out << "alpha_" << (j + 1) << ",";
  out << "m_alpha\n";
  for (const auto& [alpha, m] : table.entries) {
    for (int j = 0; j < table.dim; ++j) out << alpha[j] << ",";
    out << format_double(m) << "\n";
  }
}

inline json eigen_table_sidecar(const EigenTable& table, const KernelSpec& spec, const LogGrid& grid,
                                const json& tolerances = json::object()) {
  json j;
  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, spec.content_hash);
  j["kernel_hash"] = std::string("fnv1a64:") + hash;
  if (!spec.source.empty()) j["kernel_path"] = spec.source;
  j["grid"] = grid_to_json(grid);
  j["method"] = table.method;
  j["rows"] = table.entries.size();
  j["tolerances"] = tolerances;
  return j;
}

/// Sampled-function CSV: one row per (quadrant, node) with the quadrant
/// signs, the log coordinates and the value.
inline void write_piecewise_csv(std::ostream& out, const PiecewiseFn& f) {
  const int d = f.grid.dim();
  for (int j = 0; j < d; ++j) out << "q_" << (j + 1) << ",";
  for (int j = 0; j < d; ++j) out << "t_" << (j + 1) << ",";
  out << "value\n";
  for (unsigned q = 0; q < f.quadrant_count(); ++q) {
    const SignVector e = SignVector::from_mask(d, q);
    std::vector<Index> idx(static_cast<std::size_t>(d), 0);
    Index lin = 0;
    do {
      for (int j = 0; j < d; ++j) out << e[j] << ",";
      for (int j = 0; j < d; ++j) out << format_double(f.grid.node(j, idx[static_cast<std::size_t>(j)])) << ",";
      out << format_double(f.parts[q].values[lin++]) << "\n";
    } while (next_multi_index(idx, f.grid.extents()));
  }
}

}  // namespace hadamard::io
