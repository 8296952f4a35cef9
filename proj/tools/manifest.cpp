#include "manifest.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bergman/error.hpp"

namespace bergman::cli {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  const auto mark = node.Mark();
  if (mark.is_null()) throw ManifestError(what);
  throw ManifestError(what, mark.line + 1, mark.column + 1);
}

template <class T>
T scalar(const YAML::Node& node, const std::string& name) {
  if (!node.IsScalar()) fail(node, name + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "cannot read " + name);
  }
}

double real_value(const YAML::Node& node, const std::string& name) {
  const double v = scalar<double>(node, name);
  if (!std::isfinite(v)) fail(node, name + " must be finite");
  return v;
}

// A complex number is written as a real scalar or as [re, im].
cplx complex_value(const YAML::Node& node, const std::string& name) {
  if (node.IsScalar()) return real_value(node, name);
  if (node.IsSequence() && node.size() == 2) return {real_value(node[0], name), real_value(node[1], name)};
  fail(node, name + " must be a number or [re, im]");
}

std::vector<double> real_list(const YAML::Node& node, const std::string& name) {
  if (!node.IsSequence()) fail(node, name + " must be a list");
  std::vector<double> out;
  for (const auto& v : node) out.push_back(real_value(v, name));
  return out;
}

// A point is a list of complex coordinates; for n = 1 a bare complex is accepted.
Point point_value(const YAML::Node& node, int n, const std::string& name) {
  Point p;
  if (n == 1 && (node.IsScalar() || (node.IsSequence() && node.size() == 2 && node[0].IsScalar()))) {
    p.push_back(complex_value(node, name));
  } else if (node.IsSequence()) {
    for (const auto& c : node) p.push_back(complex_value(c, name));
  } else {
    fail(node, name + " must be a list of coordinates");
  }
  if (static_cast<int>(p.size()) != n) fail(node, name + " has " + std::to_string(p.size()) + " coordinates, expected " + std::to_string(n));
  return p;
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node.IsMap()) fail(node, where + " must be a mapping");
  std::set<std::string> seen;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
    if (!seen.insert(key).second) fail(kv.first, "duplicate key '" + key + "' in " + where);
  }
}

Chart chart_value(const YAML::Node& node, int n) {
  check_keys(node, {"radius", "re_lo", "re_hi", "im_lo", "im_hi"}, "chart");
  Chart c;
  if (node["radius"]) {
    c.radius = scalar<double>(node["radius"], "chart.radius");
    if (!(c.radius > 0.0)) fail(node["radius"], "chart.radius must be positive");
  }
  const char* box[] = {"re_lo", "re_hi", "im_lo", "im_hi"};
  std::vector<double>* dst[] = {&c.re_lo, &c.re_hi, &c.im_lo, &c.im_hi};
  int present = 0;
  for (int i = 0; i < 4; ++i) {
    if (!node[box[i]]) continue;
    ++present;
    *dst[i] = real_list(node[box[i]], std::string("chart.") + box[i]);
    if (static_cast<int>(dst[i]->size()) != n) fail(node[box[i]], std::string("chart.") + box[i] + " needs n entries");
  }
  if (present != 0 && present != 4) fail(node, "chart box needs all of re_lo, re_hi, im_lo, im_hi");
  for (std::size_t j = 0; j < c.re_lo.size(); ++j)
    if (!(c.re_lo[j] < c.re_hi[j] && c.im_lo[j] < c.im_hi[j])) fail(node, "chart box is empty");
  return c;
}

ModelGeometry geometry_value(const YAML::Node& node) {
  check_keys(node, {"family", "n", "params", "derivative_mode", "chart"}, "geometry");
  if (!node["family"]) fail(node, "geometry.family is required");
  Family family;
  try {
    family = family_from_string(scalar<std::string>(node["family"], "geometry.family"));
  } catch (const Error& e) {
    fail(node["family"], e.what());
  }
  const YAML::Node params = node["params"] ? node["params"] : YAML::Node(YAML::NodeType::Map);
  if (!params.IsMap()) fail(params, "geometry.params must be a mapping");

  auto build = [&]() -> ModelGeometry {
    switch (family) {
      case Family::fock: {
        check_keys(params, {"lambda"}, "fock params");
        if (!params["lambda"]) fail(params, "fock needs params.lambda");
        return ModelGeometry::fock(real_list(params["lambda"], "lambda"));
      }
      case Family::cp1_fs: {
        check_keys(params, {"degree", "eps", "center", "width"}, "cp1_fs params");
        const int degree = params["degree"] ? scalar<int>(params["degree"], "degree") : 1;
        const double eps = params["eps"] ? real_value(params["eps"], "eps") : 0.0;
        const cplx center = params["center"] ? complex_value(params["center"], "center") : cplx(0.0);
        const double width = params["width"] ? real_value(params["width"], "width") : 1.0;
        return ModelGeometry::cp1_fs(degree, eps, center, width);
      }
      case Family::torus: {
        check_keys(params, {"tau", "degree"}, "torus params");
        const cplx tau = params["tau"] ? complex_value(params["tau"], "tau") : cplx(0.0, 1.0);
        const int degree = params["degree"] ? scalar<int>(params["degree"], "degree") : 1;
        return ModelGeometry::torus(tau, degree);
      }
      case Family::radial: {
        check_keys(params, {"coeffs"}, "radial params");
        if (!params["coeffs"]) fail(params, "radial needs params.coeffs");
        return ModelGeometry::radial(real_list(params["coeffs"], "coeffs"));
      }
      case Family::chart_expression: {
        check_keys(params, {"weight", "theta", "constants", "rotation_invariant"}, "chart_expression params");
        if (!node["n"]) fail(node, "chart_expression needs geometry.n");
        if (!params["weight"]) fail(params, "chart_expression needs params.weight");
        const int n = scalar<int>(node["n"], "n");
        std::vector<std::string> theta{"identity"};
        if (const auto t = params["theta"]) {
          theta.clear();
          if (t.IsSequence())
            for (const auto& e : t) theta.push_back(scalar<std::string>(e, "theta entry"));
          else
            theta.push_back(scalar<std::string>(t, "theta"));
        }
        std::map<std::string, double> constants;
        if (const auto c = params["constants"]) {
          if (!c.IsMap()) fail(c, "constants must be a mapping");
          for (const auto& kv : c) constants[kv.first.as<std::string>()] = real_value(kv.second, "constant");
        }
        const bool rot = params["rotation_invariant"] && scalar<bool>(params["rotation_invariant"], "rotation_invariant");
        Chart chart;
        if (node["chart"]) chart = chart_value(node["chart"], n);
        return ModelGeometry::chart_expression(n, scalar<std::string>(params["weight"], "weight"), theta, constants,
                                               chart, rot);
      }
    }
    fail(node, "unknown family");
  };

  try {
    ModelGeometry g = build();
    if (node["n"] && scalar<int>(node["n"], "n") != g.n())
      fail(node["n"], "geometry.n does not match the family parameters");
    if (node["chart"] && family != Family::chart_expression) g = g.with_chart(chart_value(node["chart"], g.n()));
    if (node["derivative_mode"]) {
      try {
        g = g.with_derivative_mode(
            derivative_mode_from_string(scalar<std::string>(node["derivative_mode"], "derivative_mode")));
      } catch (const Error& e) {
        fail(node["derivative_mode"], e.what());
      }
    }
    return g;
  } catch (const Error& e) {
    fail(params, e.what());
  }
}

Command command_value(const YAML::Node& node) {
  static const std::map<std::string, Command> names{{"describe", Command::describe}, {"coeffs", Command::coeffs},
                                                     {"exact", Command::exact},       {"compare", Command::compare},
                                                     {"heat", Command::heat},         {"morse", Command::morse}};
  const auto s = scalar<std::string>(node, "command");
  auto it = names.find(s);
  if (it == names.end()) fail(node, "unknown command '" + s + "'");
  return it->second;
}

Format format_value(const YAML::Node& node) {
  const auto s = scalar<std::string>(node, "format");
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  fail(node, "format must be csv or json");
}

// grid: {re: [lo, hi, count], im: [lo, hi, count]} in the first coordinate;
// the remaining coordinates come from base (default 0).
std::vector<Point> grid_points(const YAML::Node& node, int n) {
  check_keys(node, {"re", "im", "base"}, "grid");
  auto axis = [&](const char* key) -> std::vector<double> {
    if (!node[key]) return {0.0};
    const YAML::Node a = node[key];
    if (!a.IsSequence() || a.size() != 3) fail(a, std::string("grid.") + key + " must be [lo, hi, count]");
    const double lo = real_value(a[0], "grid"), hi = real_value(a[1], "grid");
    const int count = scalar<int>(a[2], "grid count");
    if (count < 1) fail(a[2], "grid count must be >= 1");
    if (count > 1 && !(lo < hi)) fail(a, "grid needs lo < hi");
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    return v;
  };
  Point base(static_cast<std::size_t>(n), 0.0);
  if (node["base"]) base = point_value(node["base"], n, "grid.base");
  std::vector<Point> out;
  for (double y : axis("im"))
    for (double x : axis("re")) {
      Point p = base;
      p[0] = {x, y};
      out.push_back(p);
    }
  return out;
}

}  // namespace

ManifestError::ManifestError(const std::string& what, int line, int column)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what
                                  : what),
      line_(line),
      column_(column) {}

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::describe: return "describe";
    case Command::coeffs: return "coeffs";
    case Command::exact: return "exact";
    case Command::compare: return "compare";
    case Command::heat: return "heat";
    case Command::morse: return "morse";
  }
  return "?";
}

const char* to_string(Format f) noexcept { return f == Format::json ? "json" : "csv"; }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_string(std::uint64_t h) {
  std::ostringstream os;
  os << "fnv1a64:" << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

RunManifest parse_manifest(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ManifestError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ManifestError("manifest must be a mapping", 1, 1);
  check_keys(root, {"geometry", "command", "points", "grid", "pairs", "k_list", "q", "tolerances", "output", "heat",
                    "fit", "dims"},
             "manifest");

  RunManifest m;
  m.hash = fnv1a64(text);
  if (!root["command"]) fail(root, "command is required");
  m.command = command_value(root["command"]);

  if (m.command != Command::heat) {
    if (!root["geometry"]) fail(root, "geometry is required for " + std::string(to_string(m.command)));
    m.geometry = geometry_value(root["geometry"]);
  } else if (root["geometry"]) {
    m.geometry = geometry_value(root["geometry"]);
  }
  const int n = m.geometry ? m.geometry->n() : 1;

  if (const auto pts = root["points"]) {
    if (!pts.IsSequence()) fail(pts, "points must be a list");
    for (const auto& p : pts) m.points.push_back(point_value(p, n, "point"));
  }
  if (const auto grid = root["grid"]) {
    auto extra = grid_points(grid, n);
    m.points.insert(m.points.end(), extra.begin(), extra.end());
  }
  if (m.geometry) {
    for (std::size_t i = 0; i < m.points.size(); ++i)
      if (!m.geometry->chart().contains(m.points[i]))
        fail(root["points"] ? root["points"] : root["grid"], "point " + std::to_string(i) + " lies outside the chart");
  }
  if (const auto pairs = root["pairs"]) {
    if (!pairs.IsSequence()) fail(pairs, "pairs must be a list of [z, w]");
    for (const auto& pr : pairs) {
      if (!pr.IsSequence() || pr.size() != 2) fail(pr, "each pair must be [z, w]");
      m.pairs.emplace_back(point_value(pr[0], n, "pair point"), point_value(pr[1], n, "pair point"));
    }
  }

  if (const auto ks = root["k_list"]) {
    if (!ks.IsSequence() || ks.size() == 0) fail(ks, "k_list must be a non-empty list");
    for (const auto& k : ks) {
      const int v = scalar<int>(k, "k");
      if (v < 1) fail(k, "k must be a positive integer");
      if (!m.k_list.empty() && v <= m.k_list.back()) fail(k, "k_list must be strictly increasing");
      m.k_list.push_back(v);
    }
  }
  if (root["q"]) {
    m.q = scalar<int>(root["q"], "q");
    if (m.q < 0 || m.q > n) fail(root["q"], "q must be in 0..n");
  }

  if (const auto tol = root["tolerances"]) {
    check_keys(tol, {"quadrature", "dense", "stratum", "derivative", "degeneracy"}, "tolerances");
    auto positive = [&](const char* key, double& dst) {
      if (!tol[key]) return;
      dst = real_value(tol[key], key);
      if (!(dst > 0.0)) fail(tol[key], std::string(key) + " tolerance must be positive");
    };
    positive("quadrature", m.tolerances.quadrature);
    positive("dense", m.tolerances.dense);
    positive("stratum", m.tolerances.stratum);
    positive("derivative", m.tolerances.derivative);
    positive("degeneracy", m.tolerances.degeneracy);
  }

  if (const auto out = root["output"]) {
    check_keys(out, {"format", "path", "plot_data"}, "output");
    if (out["format"]) m.output.format = format_value(out["format"]);
    if (out["path"]) m.output.path = scalar<std::string>(out["path"], "path");
    if (out["plot_data"]) m.output.plot_data = scalar<bool>(out["plot_data"], "plot_data");
  }

  if (const auto fit = root["fit"]) {
    check_keys(fit, {"nuisance_terms"}, "fit");
    if (fit["nuisance_terms"]) {
      m.nuisance_terms = scalar<int>(fit["nuisance_terms"], "nuisance_terms");
      if (m.nuisance_terms < 0 || m.nuisance_terms > 3) fail(fit["nuisance_terms"], "nuisance_terms must be in 0..3");
    }
  }

  if (const auto heat = root["heat"]) {
    check_keys(heat, {"eigenvalues", "t", "q", "k", "random_draws"}, "heat");
    if (heat["eigenvalues"]) m.heat.eigenvalues = real_list(heat["eigenvalues"], "eigenvalues");
    if (heat["t"]) {
      m.heat.t = heat["t"].IsSequence() ? real_list(heat["t"], "t") : std::vector<double>{real_value(heat["t"], "t")};
      for (double t : m.heat.t)
        if (!(t > 0.0)) fail(heat["t"], "t must be positive");
    }
    if (heat["q"]) m.heat.q = scalar<int>(heat["q"], "heat.q");
    if (heat["k"]) m.heat.k = scalar<int>(heat["k"], "heat.k");
    if (heat["random_draws"]) m.heat.random_draws = scalar<int>(heat["random_draws"], "random_draws");
    if (m.heat.k < 1) fail(heat, "heat.k must be >= 1");
    if (m.heat.random_draws < 0) fail(heat, "random_draws must be >= 0");
  }

  if (const auto dims = root["dims"]) {
    if (!dims.IsSequence()) fail(dims, "dims must be a list, one entry per k");
    std::vector<std::vector<long>> all;
    for (const auto& row : dims) {
      if (!row.IsSequence() || static_cast<int>(row.size()) != n + 1) fail(row, "each dims entry lists dim H^0 .. dim H^n");
      std::vector<long> r;
      for (const auto& v : row) {
        r.push_back(scalar<long>(v, "dim"));
        if (r.back() < 0) fail(v, "dimensions are non-negative");
      }
      all.push_back(r);
    }
    if (all.size() != m.k_list.size()) fail(dims, "dims needs one entry per k");
    m.dims = all;
  }

  // Per-command requirements.
  switch (m.command) {
    case Command::describe:
    case Command::coeffs:
      if (m.points.empty()) fail(root, std::string(to_string(m.command)) + " needs points or grid");
      break;
    case Command::exact:
      if (m.points.empty() && m.pairs.empty()) fail(root, "exact needs points, grid or pairs");
      if (m.k_list.empty()) fail(root, "exact needs k_list");
      break;
    case Command::compare:
      if (m.points.empty()) fail(root, "compare needs points or grid");
      if (m.k_list.size() < 5) fail(root["k_list"] ? root["k_list"] : root, "compare needs at least 5 values of k");
      break;
    case Command::heat: {
      const auto& h = m.heat;
      if (h.eigenvalues.empty() && m.points.empty()) fail(root, "heat needs heat.eigenvalues or geometry points");
      if (h.t.empty()) fail(root["heat"] ? root["heat"] : root, "heat needs heat.t");
      const int hn = h.eigenvalues.empty() ? n : static_cast<int>(h.eigenvalues.size());
      if (h.q < 0 || h.q > hn) fail(root["heat"], "heat.q out of range");
      break;
    }
    case Command::morse:
      if (m.k_list.empty()) fail(root, "morse needs k_list");
      break;
  }
  return m;
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot open manifest " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

QuadSpec quad_spec(const RunManifest& m, int threads) {
  QuadSpec q;
  q.tol = m.tolerances.quadrature;
  q.dense_tol = m.tolerances.dense;
  q.threads = threads;
  return q;
}

MorseQuad morse_quad(const RunManifest& m, int threads) {
  MorseQuad q;
  q.tol = m.tolerances.stratum;
  q.threads = threads;
  return q;
}

}  // namespace bergman::cli
