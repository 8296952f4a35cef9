#include "run.hpp"

#include <fmt/format.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <random>

#include "bergman/coeffs.hpp"
#include "bergman/error.hpp"
#include "bergman/exact.hpp"
#include "bergman/heat.hpp"
#include "bergman/morse.hpp"

namespace bergman::cli {

namespace {

using json = nlohmann::ordered_json;

template <class F>
auto stage(const std::string& operation, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw CommandError(operation, e.what());
  }
}

json to_json(cplx c) { return json::array({c.real(), c.imag()}); }

json to_json(const Point& p) {
  json a = json::array();
  for (cplx c : p) a.push_back(to_json(c));
  return a;
}

json to_json(const RVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// Real part as nested rows; the imaginary part is added only when nonzero.
void put_matrix(json& obj, const std::string& key, const CMatrix& m) {
  json re = json::array(), im = json::array();
  bool complex = false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array(), s = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      s.push_back(m(i, j).imag());
      complex = complex || m(i, j).imag() != 0.0;
    }
    re.push_back(r);
    im.push_back(s);
  }
  obj[key] = re;
  if (complex) obj[key + "_im"] = im;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : std::string("nan"); }

std::string point_cells(const Point& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + num(p[i].real()) + "," + num(p[i].imag());
  return s;
}

std::string point_header(const std::string& prefix, int n) {
  std::string s;
  for (int j = 1; j <= n; ++j) s += fmt::format("{}{}re_{},{}im_{}", j > 1 ? "," : "", prefix, j, prefix, j);
  return s;
}

struct Provenance {
  std::string hash;
  Command command;
};

std::string csv_preamble(const Provenance& p) {
  return fmt::format("# bergman {} schema {} manifest {} command {}\n", kToolVersion, kSchemaVersion, p.hash,
                     to_string(p.command));
}

// Two columns per curve so any plotting tool can read it.
SideFile plot_file(const Provenance& p, const std::string& curve, const std::string& xname, const std::string& yname,
                   const std::vector<std::pair<double, double>>& xy) {
  std::string s = csv_preamble(p) + xname + "," + yname + "\n";
  for (const auto& [x, y] : xy) s += num(x) + "," + num(y) + "\n";
  return {"." + curve + ".csv", s};
}

json coefficient_json(const CoefficientSet& c) {
  json j;
  j["method"] = c.method;
  j["q"] = c.q;
  j["b0"] = c.b0;
  j["b1"] = optional_json(c.b1);
  j["b2"] = optional_json(c.b2);
  j["b0_km"] = optional_json(c.b0_km);
  j["b1_km"] = optional_json(c.b1_km);
  j["b2_km"] = optional_json(c.b2_km);
  j["negative_directions"] = c.negative_directions;
  return j;
}

// ---------------------------------------------------------------------------

struct Rendered {
  json result;
  std::string csv;  // table body including its header row
  std::vector<SideFile> side;
};

Rendered run_describe(const RunManifest& m, const Provenance&) {
  const auto& g = *m.geometry;
  const int n = g.n();
  Rendered r;
  r.result = json::array();
  r.csv = "index," + point_header("", n) + ",stratum,det_rdot,v_theta";
  for (int j = 1; j <= n; ++j) r.csv += fmt::format(",eig_{}", j);
  r.csv += ",r,r_hat\n";
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    const auto rep = stage("curvature_report", [&] { return curvature_report_partial(g, m.points[i], m.tolerances.degeneracy); });
    json j;
    j["point"] = to_json(rep.point);
    j["stratum"] = rep.stratum.label();
    j["eigenvalues"] = to_json(rep.eigenvalues);
    j["det_rdot"] = rep.det_rdot;
    j["v_theta"] = rep.v_theta;
    put_matrix(j, "rdot", rep.rdot);
    put_matrix(j, "levi", rep.levi);
    put_matrix(j, "theta", rep.theta);
    double rr = std::nan(""), rh = std::nan("");
    if (rep.omega) {
      const auto& o = *rep.omega;
      json w;
      put_matrix(w, "omega", o.omega);
      w["v_omega"] = o.v_omega;
      w["r"] = o.r;
      w["r_hat"] = o.r_hat;
      put_matrix(w, "ric", o.ric);
      put_matrix(w, "rdet", o.rdet);
      w["ric_norm2"] = o.ric_norm2;
      w["rdet_norm2"] = o.rdet_norm2;
      w["ric_rdet_pairing"] = o.ric_rdet_pairing;
      w["rtm_norm2"] = o.rtm_norm2;
      w["laplacian_r"] = o.laplacian_r;
      w["laplacian_r_hat"] = o.laplacian_r_hat;
      j["r"] = o.r;
      j["omega"] = w;
      rr = o.r;
      rh = o.r_hat;
    } else {
      j["r"] = nullptr;
      j["omega"] = nullptr;
    }
    r.result.push_back(j);
    r.csv += fmt::format("{},{},{},{},{}", i, point_cells(rep.point), rep.stratum.label(), num(rep.det_rdot),
                         num(rep.v_theta));
    for (Eigen::Index e = 0; e < rep.eigenvalues.size(); ++e) r.csv += "," + num(rep.eigenvalues(e));
    r.csv += "," + num(rr) + "," + num(rh) + "\n";
  }
  return r;
}

Rendered run_coeffs(const RunManifest& m, const Provenance&) {
  const auto& g = *m.geometry;
  Rendered r;
  r.result = json::array();
  r.csv = "index," + point_header("", g.n()) + ",method,q,b0,b1,b2,b0_km,b1_km,b2_km\n";
  auto row = [&](std::size_t i, const CoefficientSet& c) {
    auto o = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    r.csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", i, point_cells(c.point), c.method, c.q, num(c.b0), o(c.b1),
                         o(c.b2), o(c.b0_km), o(c.b1_km), o(c.b2_km));
  };
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    const auto& z = m.points[i];
    const auto closed = stage("coefficient_set", [&] { return coefficient_set(g, z, m.q, m.tolerances.degeneracy); });
    json j;
    j["point"] = to_json(z);
    j["closed_form"] = coefficient_json(closed);
    row(i, closed);
    std::optional<CoefficientSet> sp;
    std::string note;
    if (m.q == 0) {
      try {
        sp = coefficient_set_stationary_phase(g, z);
      } catch (const Error& e) {
        note = e.what();
      }
    } else {
      note = "stationary phase covers q = 0 only";
    }
    if (sp) {
      j["stationary_phase"] = coefficient_json(*sp);
      row(i, *sp);
      const double d1 = std::abs(sp->b1.value_or(0.0) - closed.b1.value_or(0.0));
      const double d2 = std::abs(sp->b2.value_or(0.0) - closed.b2.value_or(0.0));
      j["max_deviation"] = std::max(d1, d2);
      j["agree"] = std::max(d1, d2) <= m.tolerances.derivative;
    } else {
      j["stationary_phase"] = nullptr;
      j["stationary_phase_note"] = note;
    }
    r.result.push_back(j);
  }
  return r;
}

Rendered run_exact(const RunManifest& m, const Provenance& p, int threads) {
  const auto& g = *m.geometry;
  const int n = g.n();
  const QuadSpec quad = quad_spec(m, threads);
  Rendered r;
  r.result = json::array();
  r.csv = "k,kind," + point_header("z_", n) + "," + point_header("w_", n) + ",value\n";
  std::vector<std::vector<std::pair<double, double>>> per_point(m.points.size());
  for (int k : m.k_list) {
    const auto ev = stage("evaluate_kernel", [&] { return evaluate_kernel(g, k, m.points, quad, m.pairs); });
    json j;
    j["k"] = k;
    j["cond"] = ev.cond;
    json b;
    const char* kinds[] = {"polyradial", "dense_monomial", "torus_theta"};
    b["kind"] = kinds[static_cast<int>(ev.basis.kind)];
    b["size"] = ev.basis.exponents.size();
    b["unbounded"] = ev.basis.unbounded;
    b["truncation_bound"] = ev.basis.truncation_bound;
    b["tail_bound"] = ev.basis.tail_bound;
    j["basis"] = b;
    j["quadrature"] = {{"rule", ev.quadrature_meta.rule},
                       {"order", ev.quadrature_meta.order},
                       {"error_estimate", ev.quadrature_meta.error_estimate}};
    json vals = json::array();
    for (std::size_t i = 0; i < ev.points.size(); ++i) {
      json v;
      v["point"] = to_json(ev.points[i]);
      v["value"] = ev.values[i];
      try {
        v["closed_form"] = closed_form_kernel(g, k, ev.points[i]);
      } catch (const Error&) {
        v["closed_form"] = nullptr;
      }
      vals.push_back(v);
      r.csv += fmt::format("{},diag,{},{},{}\n", k, point_cells(ev.points[i]), point_cells(ev.points[i]),
                           num(ev.values[i]));
      per_point[i].emplace_back(k, ev.values[i]);
    }
    j["values"] = vals;
    json off = json::array();
    std::vector<std::pair<double, double>> curve;
    for (std::size_t i = 0; i < m.pairs.size(); ++i) {
      const auto& [z, w] = m.pairs[i];
      double dist = 0.0;
      for (std::size_t c = 0; c < z.size(); ++c) dist += std::norm(z[c] - w[c]);
      dist = std::sqrt(dist);
      off.push_back({{"z", to_json(z)}, {"w", to_json(w)}, {"distance", dist}, {"modulus", ev.offdiag_values[i]}});
      r.csv += fmt::format("{},offdiag,{},{},{}\n", k, point_cells(z), point_cells(w), num(ev.offdiag_values[i]));
      curve.emplace_back(dist, ev.offdiag_values[i]);
    }
    j["offdiag"] = off;
    r.result.push_back(j);
    if (m.output.plot_data && !curve.empty())
      r.side.push_back(plot_file(p, fmt::format("offdiag_k{}", k), "distance", "modulus", curve));
  }
  if (m.output.plot_data)
    for (std::size_t i = 0; i < per_point.size(); ++i)
      r.side.push_back(plot_file(p, fmt::format("values_point{}", i), "k", "value", per_point[i]));
  return r;
}

Rendered run_compare(const RunManifest& m, const Provenance& p, int threads) {
  const auto& g = *m.geometry;
  const QuadSpec quad = quad_spec(m, threads);
  FitOptions opts;
  opts.nuisance_terms = m.nuisance_terms;
  Rendered r;
  r.result = json::array();
  r.csv = "index,k,value,residual\n";
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    const auto& z = m.points[i];
    const auto c = stage("coefficient_set", [&] { return coefficient_set(g, z, 0, m.tolerances.degeneracy); });
    const auto fit = stage("expansion_fit", [&] { return expansion_fit(g, m.k_list, z, c, opts, quad); });
    json j;
    j["point"] = to_json(z);
    j["coefficients"] = coefficient_json(c);
    json f;
    f["k_list"] = fit.k_list;
    f["values"] = fit.values;
    f["residuals"] = fit.residuals;
    f["slope"] = fit.slope;
    f["slope_stderr"] = fit.slope_stderr;
    f["fitted_b"] = fit.fitted_b;
    f["predicted_b"] = fit.predicted_b;
    f["design_cond"] = fit.design_cond;
    double dev = 0.0;
    for (std::size_t b = 0; b < 3 && b < fit.fitted_b.size() && b < fit.predicted_b.size(); ++b)
      dev = std::max(dev, std::abs(fit.fitted_b[b] - fit.predicted_b[b]));
    f["max_b_deviation"] = dev;
    j["fit"] = f;
    r.result.push_back(j);
    std::vector<std::pair<double, double>> vals, res;
    for (std::size_t a = 0; a < fit.k_list.size(); ++a) {
      r.csv += fmt::format("{},{},{},{}\n", i, fit.k_list[a], num(fit.values[a]), num(fit.residuals[a]));
      vals.emplace_back(fit.k_list[a], fit.values[a]);
      res.emplace_back(fit.k_list[a], std::abs(fit.residuals[a]));
    }
    if (m.output.plot_data) {
      r.side.push_back(plot_file(p, fmt::format("values_point{}", i), "k", "value", vals));
      r.side.push_back(plot_file(p, fmt::format("residual_point{}", i), "k", "abs_residual", res));
    }
  }
  return r;
}

Rendered run_heat(const RunManifest& m, const Provenance& p, std::uint64_t seed) {
  struct Spectrum {
    std::string source;
    std::vector<double> a;
  };
  std::vector<Spectrum> spectra;
  if (!m.heat.eigenvalues.empty()) spectra.push_back({"manifest", m.heat.eigenvalues});
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    const auto rep = stage("curvature_report", [&] {
      return curvature_report_partial(*m.geometry, m.points[i], m.tolerances.degeneracy);
    });
    spectra.push_back({fmt::format("point{}", i),
                       std::vector<double>(rep.eigenvalues.data(), rep.eigenvalues.data() + rep.eigenvalues.size())});
  }
  const double C = heat_constant_C();
  Rendered r;
  json rows = json::array();
  r.csv = "source,t,q,k,density,bound,iota_size,ratio\n";
  for (const auto& s : spectra) {
    std::vector<std::pair<double, double>> curve;
    for (double t : m.heat.t) {
      const double d = stage("heat_trace_density", [&] { return heat_trace_density({s.a, t, m.heat.q, m.heat.k}); });
      json row{{"source", s.source}, {"eigenvalues", s.a}, {"t", t}, {"q", m.heat.q}, {"k", m.heat.k}, {"density", d}};
      double bound = std::nan(""), ratio = std::nan("");
      int iota = -1;
      if (t > 1.0) {
        const auto b = stage("degeneracy_bound", [&] { return degeneracy_bound(s.a, t, m.heat.q); });
        bound = b.value;
        iota = static_cast<int>(b.iota.size());
        // The bound carries no factor k^n / (2 pi)^n; compare at k = 1.
        const double d1 = heat_trace_density({s.a, t, m.heat.q, 1});
        ratio = d1 / bound;
        row["bound"] = bound;
        row["iota"] = b.iota;
        row["empty_regime"] = b.empty_regime;
        row["ratio_k1"] = ratio;
      } else {
        row["bound"] = nullptr;
      }
      rows.push_back(row);
      r.csv += fmt::format("{},{},{},{},{},{},{},{}\n", s.source, num(t), m.heat.q, m.heat.k, num(d), num(bound),
                           iota, num(ratio));
      curve.emplace_back(t, d);
    }
    if (m.output.plot_data) r.side.push_back(plot_file(p, "density_" + s.source, "t", "density", curve));
  }
  r.result["C"] = C;
  r.result["rows"] = rows;

  if (m.heat.random_draws > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(1, 4);
    std::uniform_real_distribution<double> ev(-2.0, 2.0), tt(C, 40.0), scale(0.0, 1.0);
    int checked = 0, violations = 0;
    double worst = 0.0;
    for (int attempt = 0; checked < m.heat.random_draws && attempt < 100 * m.heat.random_draws; ++attempt) {
      const int n = dim(rng);
      std::vector<double> a(static_cast<std::size_t>(n));
      for (auto& v : a) v = ev(rng) * std::pow(10.0, -2.0 * scale(rng));
      const double t = tt(rng);
      const int q = std::uniform_int_distribution<int>(0, n)(rng);
      const auto b = degeneracy_bound(a, t, q);
      if (b.empty_regime) continue;
      const double ratio = heat_trace_density({a, t, q, 1}) / b.value;
      worst = std::max(worst, ratio);
      if (ratio > 1.0 + 1e-9) ++violations;
      ++checked;
    }
    r.result["random"] = {{"seed", seed},
                          {"draws", checked},
                          {"max_ratio", worst},
                          {"violations", violations},
                          {"all_hold", violations == 0}};
  }
  return r;
}

Rendered run_morse(const RunManifest& m, const Provenance& p, int threads) {
  const auto& g = *m.geometry;
  const int n = g.n();
  const auto s = stage("strata_integrals", [&] { return strata_integrals(g, morse_quad(m, threads)); });
  Rendered r;
  json rep;
  rep["family"] = to_string(g.family());
  rep["q_integrals"] = s.values;
  double alt = 0.0;
  for (std::size_t q = 0; q < s.values.size(); ++q) alt += (q % 2 == 0 ? 1.0 : -1.0) * s.values[q];
  const auto chern = chern_number(g);
  rep["rr_leading"] = chern.value_or(alt);
  rep["alternating_sum"] = alt;
  rep["quadrature_error"] = s.error;
  rep["cells"] = s.cells;
  json dims_json = json::object();
  json ineq = json::array();
  r.csv = "k,q,dim,lower_margin,weak_margin,alternating_margin,slack,all_hold\n";
  std::vector<std::vector<std::pair<double, double>>> lower(static_cast<std::size_t>(n + 1));
  for (std::size_t a = 0; a < m.k_list.size(); ++a) {
    const int k = m.k_list[a];
    std::optional<std::vector<long>> dims;
    if (m.dims) dims = (*m.dims)[a];
    else dims = exact_dims(g, k);
    if (!dims) throw CommandError("strong_morse_check", std::string("MissingDims: no section counts for ") + to_string(g.family()));
    dims_json[std::to_string(k)] = *dims;
    for (int q = 0; q <= n; ++q) {
      const auto chk = stage("strong_morse_check", [&] { return morse_inequalities(s, n, q, k, *dims); });
      json c{{"k", k}, {"q", q}, {"dims", chk.dims}, {"slack", chk.slack}, {"all_hold", chk.all_hold}};
      json margins = json::array();
      for (const auto& mg : chk.margins)
        margins.push_back(
            {{"name", mg.name}, {"lhs", mg.lhs}, {"rhs", mg.rhs}, {"margin", mg.margin}, {"holds", mg.holds}});
      c["margins"] = margins;
      ineq.push_back(c);
      r.csv += fmt::format("{},{},{},{},{},{},{},{}\n", k, q, chk.dims[static_cast<std::size_t>(q)],
                           num(chk.margins[0].margin), num(chk.margins[1].margin), num(chk.margins[2].margin),
                           num(chk.slack), chk.all_hold ? "true" : "false");
      lower[static_cast<std::size_t>(q)].emplace_back(k, chk.margins[0].margin);
    }
  }
  rep["exact_dims"] = dims_json;
  r.result["report"] = rep;
  r.result["inequalities"] = ineq;
  if (m.output.plot_data)
    for (int q = 0; q <= n; ++q)
      r.side.push_back(plot_file(p, fmt::format("lower_margin_q{}", q), "k", "margin", lower[static_cast<std::size_t>(q)]));
  return r;
}

// Negative zero prints as -0.0; normalize it so reports read cleanly.
void clear_negative_zero(json& j) {
  if (j.is_number_float()) {
    if (j.get<double>() == 0.0) j = 0.0;
  } else if (j.is_structured()) {
    for (auto& e : j) clear_negative_zero(e);
  }
}

std::string output_stem(const std::string& path) {
  std::filesystem::path pth(path);
  if (pth.has_extension()) pth.replace_extension();
  return pth.string();
}

}  // namespace

RunOutput execute(const RunManifest& m, const RunOptions& options) {
  const Provenance prov{hash_string(m.hash), m.command};
  const int threads = std::max(1, options.threads);
  Rendered r;
  switch (m.command) {
    case Command::describe: r = run_describe(m, prov); break;
    case Command::coeffs: r = run_coeffs(m, prov); break;
    case Command::exact: r = run_exact(m, prov, threads); break;
    case Command::compare: r = run_compare(m, prov, threads); break;
    case Command::heat: r = run_heat(m, prov, options.seed); break;
    case Command::morse: r = run_morse(m, prov, threads); break;
  }

  RunOutput out;
  out.format = options.format.value_or(m.output.format);
  out.path = options.out.value_or(m.output.path);
  if (out.format == Format::json) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["tool"] = "bergman";
    doc["version"] = kToolVersion;
    doc["manifest_hash"] = prov.hash;
    doc["command"] = to_string(m.command);
    if (m.geometry) doc["family"] = to_string(m.geometry->family());
    clear_negative_zero(r.result);
    doc["result"] = r.result;
    out.content = doc.dump(2) + "\n";
    // The morse margins table always accompanies the JSON report.
    if (m.command == Command::morse) out.side_files.push_back({".margins.csv", csv_preamble(prov) + r.csv});
  } else {
    out.content = csv_preamble(prov) + r.csv;
  }
  for (auto& s : r.side) out.side_files.push_back(std::move(s));
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + fmt::format(".tmp.{}", static_cast<long>(::getpid()));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename to " + path + ": " + ec.message());
  }
}

void write_outputs(const RunOutput& out) {
  if (out.path.empty()) {
    std::cout << out.content;
    if (!out.side_files.empty()) std::cerr << "note: side files need an output path and were skipped\n";
    return;
  }
  const std::string stem = output_stem(out.path);
  for (const auto& s : out.side_files) write_atomic(stem + s.suffix, s.content);
  write_atomic(out.path, out.content);
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Bergman kernel and curvature toolkit"};
  std::string manifest_path, out_path, format;
  int threads = 1;
  std::uint64_t seed = 0;
  app.add_option("--manifest", manifest_path, "YAML run manifest")->required();
  app.add_option("--out", out_path, "output path (overrides output.path)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_option("--format", format, "csv or json (overrides output.format)")->check(CLI::IsMember({"csv", "json"}));
  app.set_version_flag("--version", kToolVersion);
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunOptions opts;
  opts.threads = threads;
  opts.seed = seed;
  if (!out_path.empty()) opts.out = out_path;
  if (!format.empty()) opts.format = format == "csv" ? Format::csv : Format::json;

  RunManifest manifest;
  try {
    manifest = load_manifest(manifest_path);
  } catch (const ManifestError& e) {
    std::cerr << "manifest error: " << manifest_path << ": " << e.what() << "\n";
    return 2;
  }
  try {
    write_outputs(execute(manifest, opts));
  } catch (const CommandError& e) {
    std::cerr << "numerical error in " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace bergman::cli
