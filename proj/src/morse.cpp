#include "bergman/morse.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "bergman/error.hpp"
#include "parallel.hpp"

namespace bergman {

namespace {

constexpr double pi = std::numbers::pi;

// Unit square (u, v) onto the integration domain.
struct DomainMap {
  enum class Kind { plane, disk, box, torus } kind = Kind::plane;
  cplx origin = 0.0;
  double radius = 0.0;
  double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;
  cplx tau{0.0, 1.0};

  // Returns z and the Jacobian of (u, v) -> (x, y).
  std::pair<cplx, double> operator()(double u, double v) const {
    switch (kind) {
      case Kind::plane: {
        const double r = u / (1.0 - u);
        return {origin + std::polar(r, 2.0 * pi * v), 2.0 * pi * r / ((1.0 - u) * (1.0 - u))};
      }
      case Kind::disk: {
        const double r = u * radius;
        return {std::polar(r, 2.0 * pi * v), 2.0 * pi * radius * r};
      }
      case Kind::box:
        return {cplx(re_lo + u * (re_hi - re_lo), im_lo + v * (im_hi - im_lo)),
                (re_hi - re_lo) * (im_hi - im_lo)};
      case Kind::torus:
        return {u + v * tau, tau.imag()};
    }
    return {0.0, 0.0};
  }
};

DomainMap domain_for(const ModelGeometry& g) {
  if (g.n() != 1) throw Error(ErrorKind::UnsupportedFamily, "stratum integrals are implemented for n = 1");
  DomainMap d;
  switch (g.family()) {
    case Family::cp1_fs:
      d.kind = DomainMap::Kind::plane;
      return d;
    case Family::torus:
      d.kind = DomainMap::Kind::torus;
      d.tau = g.params().tau;
      return d;
    case Family::chart_expression: {
      const Chart& c = g.chart();
      if (!c.re_lo.empty()) {
        d.kind = DomainMap::Kind::box;
        d.re_lo = c.re_lo[0];
        d.re_hi = c.re_hi[0];
        d.im_lo = c.im_lo[0];
        d.im_hi = c.im_hi[0];
        if (std::isfinite(d.re_lo) && std::isfinite(d.re_hi) && std::isfinite(d.im_lo) && std::isfinite(d.im_hi))
          return d;
      }
      if (std::isfinite(c.radius)) {
        d.kind = DomainMap::Kind::disk;
        d.radius = c.radius;
        return d;
      }
      throw Error(ErrorKind::UnsupportedFamily, "chart expression needs a bounded chart for stratum integrals");
    }
    default:
      throw Error(ErrorKind::UnsupportedFamily,
                  std::string("stratum integrals need a compact model, got ") + to_string(g.family()));
  }
}

struct Rule5 {
  std::array<double, 5> x{}, w{};  // on [0, 1]
};

const Rule5& gauss5() {
  static const Rule5 rule = [] {
    using G = boost::math::quadrature::gauss<double, 5>;
    Rule5 r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    std::size_t i = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      r.x[i] = 0.5 * (1.0 + a[j]);
      r.w[i++] = 0.5 * w[j];
      if (a[j] != 0.0) {
        r.x[i] = 0.5 * (1.0 - a[j]);
        r.w[i++] = 0.5 * w[j];
      }
    }
    return r;
  }();
  return rule;
}

using Strata = std::array<double, 2>;

class CellIntegrator {
 public:
  CellIntegrator(const ModelGeometry& g, DomainMap map, double tol, int base, int max_depth)
      : g_(g), map_(map), tol_(tol), base_(base), max_depth_(max_depth) {}

  Strata cell(double u0, double v0, double h) const {
    const auto& r = gauss5();
    Strata s{0.0, 0.0};
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const double wt = r.w[static_cast<std::size_t>(i)] * r.w[static_cast<std::size_t>(j)] * h * h;
        add(s, u0 + h * r.x[static_cast<std::size_t>(i)], v0 + h * r.x[static_cast<std::size_t>(j)], wt);
      }
    return s;
  }

  void refine(double u0, double v0, double h, const Strata& coarse, int depth, Strata& total, double& err,
              long& cells, long& unresolved) const {
    const double hh = 0.5 * h;
    std::array<Strata, 4> kids{cell(u0, v0, hh), cell(u0 + hh, v0, hh), cell(u0, v0 + hh, hh),
                               cell(u0 + hh, v0 + hh, hh)};
    Strata fine{0.0, 0.0};
    for (const auto& c : kids)
      for (std::size_t q = 0; q < 2; ++q) fine[q] += c[q];
    const double e = std::max(std::abs(fine[0] - coarse[0]), std::abs(fine[1] - coarse[1]));
    const bool at_limit = depth >= max_depth_;
    if (e <= tol_ * h / base_ || at_limit) {
      for (std::size_t q = 0; q < 2; ++q) total[q] += fine[q];
      err += e;
      ++cells;
      if (at_limit && e > tol_ * h / base_) ++unresolved;
      return;
    }
    refine(u0, v0, hh, kids[0], depth + 1, total, err, cells, unresolved);
    refine(u0 + hh, v0, hh, kids[1], depth + 1, total, err, cells, unresolved);
    refine(u0, v0 + hh, hh, kids[2], depth + 1, total, err, cells, unresolved);
    refine(u0 + hh, v0 + hh, hh, kids[3], depth + 1, total, err, cells, unresolved);
  }

 private:
  void add(Strata& s, double u, double v, double wt) const {
    const auto [z, jac] = map_(u, v);
    const cplx zz[1] = {z};
    // With n = 1 the single eigenvalue of Rdot is 2 Phi / Theta; the test
    // below is the one classify_stratum applies.
    const double theta = std::real(g_.theta(zz)(0, 0));
    const double phi = std::real(levi_matrix(g_, zz)(0, 0));
    if (!(theta > 0.0)) throw Error(ErrorKind::SingularTheta, "Theta is not positive");
    const double a = 2.0 * phi / theta;
    if (std::abs(a) <= kDefaultDegeneracyTol * std::max(1.0, std::abs(a))) return;
    // |det Rdot| V_Theta 2^n dx dy / (2 pi)^n
    s[a < 0.0 ? 1 : 0] += wt * std::abs(a) * theta * 2.0 / (2.0 * pi) * jac;
  }

  const ModelGeometry& g_;
  DomainMap map_;
  double tol_;
  int base_;
  int max_depth_;
};

double pow_k(int k, int n) { return std::pow(static_cast<double>(k), n); }

}  // namespace

StrataIntegrals strata_integrals(const ModelGeometry& g, const MorseQuad& quad) {
  if (!(quad.tol > 0.0) || quad.base_cells < 1 || quad.max_depth < 0)
    throw Error(ErrorKind::InvalidArgument, "invalid stratum quadrature settings");
  const DomainMap map = domain_for(g);
  const int base = quad.base_cells;
  const double h = 1.0 / base;
  CellIntegrator integ(g, map, quad.tol, base, quad.max_depth);

  struct Partial {
    Strata total{0.0, 0.0};
    double err = 0.0;
    long cells = 0, unresolved = 0;
  };
  std::vector<Partial> parts(static_cast<std::size_t>(base * base));
  detail::parallel_for(base * base, quad.threads, [&](int idx) {
    const double u0 = (idx / base) * h, v0 = (idx % base) * h;
    auto& p = parts[static_cast<std::size_t>(idx)];
    integ.refine(u0, v0, h, integ.cell(u0, v0, h), 0, p.total, p.err, p.cells, p.unresolved);
  });

  StrataIntegrals out;
  out.values.assign(2, 0.0);
  for (const auto& p : parts) {
    out.values[0] += p.total[0];
    out.values[1] += p.total[1];
    out.error += p.err;
    out.cells += p.cells;
    out.unresolved_cells += p.unresolved;
  }
  if (!(out.error <= 100.0 * quad.tol) || !std::isfinite(out.values[0]) || !std::isfinite(out.values[1])) {
    throw Error(ErrorKind::QuadratureNotConverged,
                "stratum integrals reached error " + std::to_string(out.error) + " at depth " +
                    std::to_string(quad.max_depth));
  }
  return out;
}

double morse_integral(const ModelGeometry& g, int q, const MorseQuad& quad) {
  if (q < 0 || q > g.n()) throw Error(ErrorKind::InvalidArgument, "q out of range");
  return strata_integrals(g, quad).values[static_cast<std::size_t>(q)];
}

std::optional<double> chern_number(const ModelGeometry& g) {
  switch (g.family()) {
    case Family::cp1_fs:
      return static_cast<double>(g.params().degree);
    case Family::torus:
      return static_cast<double>(g.params().torus_degree);
    default:
      return std::nullopt;
  }
}

std::optional<std::vector<long>> exact_dims(const ModelGeometry& g, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  switch (g.family()) {
    case Family::cp1_fs: {
      const long d = static_cast<long>(g.params().degree) * k;
      return std::vector<long>{std::max(d + 1, 0L), std::max(-d - 1, 0L)};
    }
    case Family::torus: {
      const long d = static_cast<long>(g.params().torus_degree) * k;
      if (d == 0) return std::vector<long>{1, 1};
      return std::vector<long>{std::max(d, 0L), std::max(-d, 0L)};
    }
    default:
      return std::nullopt;
  }
}

MorseReport morse_report(const ModelGeometry& g, const std::vector<int>& k_list, const MorseQuad& quad) {
  const auto s = strata_integrals(g, quad);
  MorseReport r{g, s.values, 0.0, 0.0, {}, s.error};
  for (std::size_t q = 0; q < s.values.size(); ++q) r.alternating_sum += (q % 2 == 0 ? 1.0 : -1.0) * s.values[q];
  r.rr_leading = chern_number(g).value_or(r.alternating_sum);
  for (int k : k_list)
    if (auto d = exact_dims(g, k)) r.exact_dims[k] = *d;
  return r;
}

MorseInequalityReport morse_inequalities(const StrataIntegrals& s, int n, int q, int k, const std::vector<long>& dims) {
  if (q < 0 || q > n) throw Error(ErrorKind::InvalidArgument, "q out of range");
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (static_cast<int>(dims.size()) != n + 1) throw Error(ErrorKind::InvalidArgument, "expected dim H^0 .. dim H^n");
  if (static_cast<int>(s.values.size()) != n + 1) throw Error(ErrorKind::InvalidArgument, "expected I_0 .. I_n");
  const auto I = [&](int j) { return j < 0 || j > n ? 0.0 : s.values[static_cast<std::size_t>(j)]; };
  const auto D = [&](int j) { return static_cast<double>(dims[static_cast<std::size_t>(j)]); };
  const double kn = pow_k(k, n);

  MorseInequalityReport r;
  r.q = q;
  r.k = k;
  r.dims = dims;
  r.q_integrals = s.values;
  r.slack = (n + 1) * pow_k(k, n - 1) + kn * s.error;

  const double lower_rhs = kn * (I(q) - I(q - 1) - I(q + 1));
  r.margins.push_back({"lower", D(q), lower_rhs, D(q) - lower_rhs, false});
  r.margins.push_back({"weak", D(q), kn * I(q), kn * I(q) - D(q), false});
  double alt_lhs = 0.0, alt_rhs = 0.0;
  for (int j = 0; j <= q; ++j) {
    const double sign = (q - j) % 2 == 0 ? 1.0 : -1.0;
    alt_lhs += sign * D(j);
    alt_rhs += sign * kn * I(j);
  }
  r.margins.push_back({"alternating", alt_lhs, alt_rhs, alt_rhs - alt_lhs, false});
  r.all_hold = true;
  for (auto& m : r.margins) {
    m.holds = m.margin >= -r.slack;
    r.all_hold = r.all_hold && m.holds;
  }
  return r;
}

MorseInequalityReport strong_morse_check(const ModelGeometry& g, int q, int k, std::optional<std::vector<long>> dims,
                                         const MorseQuad& quad) {
  const int n = g.n();
  if (q < 0 || q > n) throw Error(ErrorKind::InvalidArgument, "q out of range");
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (!dims) dims = exact_dims(g, k);
  if (!dims) throw Error(ErrorKind::MissingDims, std::string("no section counts for ") + to_string(g.family()));
  return morse_inequalities(strata_integrals(g, quad), n, q, k, *dims);
}

VanishingReport vanishing_check(const ModelGeometry& g, int q, const std::vector<int>& k_list,
                                const MorseQuad& quad) {
  const int n = g.n();
  if (q < 0 || q > n) throw Error(ErrorKind::InvalidArgument, "q out of range");
  if (k_list.empty()) throw Error(ErrorKind::InvalidArgument, "empty k list");
  const auto s = strata_integrals(g, quad);
  const double floor = 10.0 * quad.tol;
  int n_minus = -1;
  for (int j = 0; j <= n; ++j) {
    if (s.values[static_cast<std::size_t>(j)] <= floor) continue;
    if (n_minus >= 0) throw Error(ErrorKind::InvalidArgument, "curvature signature is not constant");
    n_minus = j;
  }
  if (n_minus < 0) throw Error(ErrorKind::InvalidArgument, "curvature vanishes identically");

  VanishingReport r;
  r.q = q;
  r.n_minus = n_minus;
  r.consistent = true;
  for (int k : k_list) {
    const auto dims = exact_dims(g, k);
    if (!dims) throw Error(ErrorKind::MissingDims, std::string("no section counts for ") + to_string(g.family()));
    VanishingRow row;
    row.k = k;
    row.dim = (*dims)[static_cast<std::size_t>(q)];
    row.leading = pow_k(k, n) * s.values[static_cast<std::size_t>(q)];
    row.ratio = row.leading > 0.0 ? static_cast<double>(row.dim) / row.leading
                                  : std::numeric_limits<double>::quiet_NaN();
    if (q != n_minus) r.consistent = r.consistent && row.dim == 0;
    r.rows.push_back(row);
  }
  if (q == n_minus) {
    // The ratio should approach 1 at rate O(1/k).
    const auto& last = r.rows.back();
    r.consistent = std::abs(last.ratio - 1.0) <= (n + 1.0) / last.k + 1e-6;
  }
  return r;
}

}  // namespace bergman
