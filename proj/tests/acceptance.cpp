// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bergman/coeffs.hpp"
#include "bergman/exact.hpp"
#include "bergman/heat.hpp"
#include "bergman/morse.hpp"

using namespace bergman;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool ok = true;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

int failures = 0;

void criterion(const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s %-22s %s [%.2f s of %.0f s]\n", pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs, budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

}  // namespace

int main() {
  criterion("fock_oracle", 10, [] {
    auto g = ModelGeometry::fock({1.0});
    double worst = 0.0;
    for (int k : {8, 16, 32, 64}) worst = std::max(worst, rel(BergmanKernel(g, k).value(Point{0.0}), k / pi));
    const auto rep = curvature_report(g, Point{0.0});
    const double b1 = std::abs(b1_coeff(rep)), b2 = std::abs(b2_coeff(rep));
    return Outcome{worst <= 1e-8 && b1 <= 1e-10 && b2 <= 1e-10,
                   fmt("max rel err P_k(0) %.2e", worst) + fmt(", |b1| %.1e", b1) + fmt(", |b2| %.1e", b2)};
  });

  criterion("cp1_fubini_study", 30, [] {
    auto g = ModelGeometry::cp1_fs();
    const std::vector<Point> pts{Point{0.0}, Point{cplx(0.3, -0.4)}, Point{2.5}};
    double worst = 0.0;
    for (int k = 1; k <= 64; ++k) {
      BergmanKernel K(g, k);
      for (const auto& z : pts) worst = std::max(worst, rel(K.value(z), (k + 1) / (2 * pi)));
    }
    double coeff = 0.0;
    for (const auto& z : pts) {
      const auto c = coefficient_set(g, z);
      coeff = std::max({coeff, std::abs(c.b0 - 1 / (2 * pi)), std::abs(*c.b1 - 1 / (2 * pi)), std::abs(*c.b2)});
    }
    return Outcome{worst <= 1e-8 && coeff <= 1e-6,
                   fmt("max rel err P_k %.2e", worst) + fmt(", max coefficient err %.2e", coeff)};
  });

  criterion("cross_path", 10, [] {
    const std::vector<std::vector<double>> models{
        {1.0, 0.1, 0.0}, {1.0, -0.2, 0.05}, {0.5, 0.3, -0.1}, {2.0, 0.0, 0.2}, {1.5, -0.4, 0.3}, {0.8, 0.25, 0.12}};
    double d1 = 0.0, d2 = 0.0;
    for (const auto& m : models) {
      auto g = ModelGeometry::radial(m);
      const auto rep = curvature_report(g, Point{0.0});
      const auto sp = coefficient_set_stationary_phase(g, Point{0.0});
      d1 = std::max(d1, std::abs(*sp.b1 - b1_coeff(rep)));
      d2 = std::max(d2, std::abs(*sp.b2 - b2_coeff(rep)));
    }
    return Outcome{d1 <= 1e-6 && d2 <= 1e-5,
                   std::to_string(models.size()) + " models" + fmt(", max |db1| %.2e", d1) + fmt(", max |db2| %.2e", d2)};
  });

  criterion("expansion_order", 120, [] {
    auto g = ModelGeometry::cp1_fs(1, 0.05, 0.0, 1.0);
    const Point z{0.3};
    const auto c = coefficient_set(g, z);
    const auto fit = expansion_fit(g, {16, 24, 32, 40, 48, 56, 64}, z, c);
    return Outcome{fit.slope >= -2.3 && fit.slope <= -1.7,
                   fmt("log-log residual slope %.3f", fit.slope) + fmt(" +- %.3f", fit.slope_stderr)};
  });

  criterion("heat", 5, [] {
    bool ok = true;
    std::string d;
    // a = 0 convention, exactly.
    for (double t : {0.5, 1.0, 3.0}) ok = ok && heat_trace_density({{0.0}, t, 0, 1}) == 1.0 / (2 * pi * t);
    // t -> 0: t^n density / 2^n -> binom(n, q) / (2 pi)^n at k = 2.
    double small = 0.0;
    const std::vector<double> a{2.0, -0.5};
    for (int q = 0; q <= 2; ++q) {
      const double t = 1e-6, binom = q == 1 ? 2.0 : 1.0;
      const double v = t * t * heat_trace_density({a, t, q, 2}) / 4.0;
      small = std::max(small, rel(v, binom / (4 * pi * pi)));
    }
    // t -> infinity: density -> b0 on the matching stratum.
    const double large = rel(heat_trace_density({a, 200.0, 1, 1}), 1.0 / (4 * pi * pi));
    const double C = heat_constant_C(), e = std::numbers::e;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> ev(-2.0, 2.0), tt(C, 40.0), u(0.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 4);
    int draws = 0, bad = 0;
    while (draws < 1000) {
      const int n = dim(rng);
      std::vector<double> s(static_cast<std::size_t>(n));
      for (auto& v : s) v = ev(rng) * std::pow(10.0, -2.0 * u(rng));
      const double t = tt(rng);
      const int q = std::uniform_int_distribution<int>(0, n)(rng);
      const auto b = degeneracy_bound(s, t, q);
      if (b.empty_regime) continue;
      if (heat_trace_density({s, t, q, 1}) > b.value * (1 + 1e-12)) ++bad;
      ++draws;
    }
    ok = ok && small <= 1e-4 && large <= 1e-6 && std::abs(C - e / (e - 1)) <= 1e-6 && bad == 0;
    d = fmt("t->0 rel %.1e", small) + fmt(", t->inf rel %.1e", large) + fmt(", C-e/(e-1) %.1e", C - e / (e - 1)) +
        ", bound violations " + std::to_string(bad) + "/1000";
    return Outcome{ok, d};
  });

  criterion("morse", 60, [] {
    const double i0 = morse_integral(ModelGeometry::cp1_fs(), 0);
    const auto mixed = strata_integrals(ModelGeometry::cp1_fs(1, 1.0, 0.0, 1.0));
    const double chern = mixed.values[0] - mixed.values[1];
    // dim H^0(O(k)) - k I_0 on the Fubini-Study metric should equal 1.
    double margin_dev = 0.0;
    for (int k : {10, 20, 40, 80}) {
      const auto r = strong_morse_check(ModelGeometry::cp1_fs(), 0, k);
      margin_dev = std::max(margin_dev, std::abs(r.margins[0].margin - 1.0));
    }
    auto neg = ModelGeometry::cp1_fs(-1);
    const auto v0 = vanishing_check(neg, 0, {1, 5, 10, 20, 40});
    const auto v1 = vanishing_check(neg, 1, {10, 40});
    const double ratio = v1.rows.back().ratio;
    const bool ok = std::abs(i0 - 1) <= 1e-4 && std::abs(chern - 1) <= 1e-4 && mixed.values[1] > 0.0 &&
                    margin_dev <= 1e-3 && v0.consistent && std::abs(ratio - 1) <= 0.05;
    return Outcome{ok, fmt("I0 %.8f", i0) + fmt(", mixed I0-I1 %.8f", chern) + fmt(" (I1 %.4f)", mixed.values[1]) +
                           fmt(", margin dev %.1e", margin_dev) + fmt(", H1 ratio at k=40 %.4f", ratio) +
                           (v0.consistent ? ", H0(O(-k)) = 0" : ", H0(O(-k)) nonzero")};
  });

  criterion("offdiag_phase", 5, [] {
    auto g = ModelGeometry::fock({1.0});
    // The tolerance is absolute; relative error is reported where the modulus
    // is above 1e-6, below which it only measures rounding in the tail.
    double worst = 0.0, worst_rel = 0.0, eik = 0.0;
    for (int k : {8, 16}) {
      BergmanKernel K(g, k);
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
          const cplx z(-0.9 + 0.2 * i, 0.1 * i - 0.3), w(0.7 - 0.15 * j, -0.6 + 0.13 * j);
          const double ref = k / pi * std::exp(-k * std::norm(z - w));
          const double got = K.offdiag_modulus(Point{z}, Point{w});
          worst = std::max(worst, std::abs(got - ref));
          if (ref > 1e-6) worst_rel = std::max(worst_rel, rel(got, ref));
          eik = std::max(eik, std::abs(eikonal_residual(g, 2, Point{z}, Point{w})));
        }
    }
    return Outcome{worst <= 1e-10 && eik <= 1e-13, fmt("max abs err %.2e", worst) + fmt(" (rel %.1e where > 1e-6)", worst_rel) +
                                                       fmt(", max eikonal residual %.1e", eik)};
  });

  criterion("degeneracy_decay", 60, [] {
    auto g = ModelGeometry::radial({0.0, 0.25});
    const auto t = degeneracy_scan(g, {16, 32, 64}, {Point{0.0}, Point{1.0}});
    double at0 = 0.0, dev = 0.0;
    for (const auto& row : t.rows) {
      if (row.point[0] == 0.0 && row.k == 64) at0 = row.scaled_value;
      if (row.point[0] == 1.0 && row.k == 64 && row.b0) dev = rel(row.scaled_value, *row.b0);
    }
    const bool ok = t.decreasing[0] && at0 < 0.05 && dev <= 0.02;
    return Outcome{ok, std::string(t.decreasing[0] ? "P_k(0)/k decreasing" : "P_k(0)/k not decreasing") +
                           fmt(", P_64(0)/64 %.4f", at0) + fmt(", |x|=1 rel dev from b0 %.2e", dev)};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
