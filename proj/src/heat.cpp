#include "bergman/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bergman/error.hpp"

namespace bergman {

namespace {

// log of a / (1 - exp(-t a)), which is positive for every real a.
double log_factor(double a, double t) {
  const double x = t * a;
  if (std::abs(x) < kZeroEigenvalueTol) return -std::log(t);
  if (a > 0.0) return std::log(a) - std::log(-std::expm1(-x));
  const double y = -x;  // |a| / (exp(y) - 1)
  return std::log(-a) - (y + std::log(-std::expm1(-y)));
}

double sup_on_grid(double lo, double hi, int points, double (*f)(double)) {
  double best = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double x = lo + (hi - lo) * i / points;
    best = std::max(best, std::abs(f(x)));
  }
  return best;
}

double f_inner1(double x) { return x == 0.0 ? -1.0 : -x / std::expm1(x); }
double f_inner2(double x) { return x == 0.0 ? -1.0 : -x * std::exp(x) / std::expm1(x); }
double f_outer1(double x) { return -1.0 / std::expm1(x); }
double f_outer2(double x) { return -std::exp(x) / std::expm1(x); }

}  // namespace

double heat_trace_density(const HeatDensityQuery& query) {
  const int n = static_cast<int>(query.eigenvalues.size());
  if (n < 1 || n > 30) throw Error(ErrorKind::InvalidArgument, "eigenvalue count must be in 1..30");
  if (!(query.t > 0.0)) throw Error(ErrorKind::InvalidArgument, "t must be positive");
  if (query.q < 0 || query.q > n) throw Error(ErrorKind::InvalidArgument, "q out of range");
  if (query.k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  const double t = query.t;
  const auto& a = query.eigenvalues;

  double log_prod = 0.0;
  for (double v : a) log_prod += log_factor(v, t);

  // Subset sum of exp(-t sum_J a_j) over |J| = q, in log space.
  std::vector<double> logs;
  std::vector<int> idx(static_cast<std::size_t>(query.q));
  for (int i = 0; i < query.q; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    double s = 0.0;
    for (int j : idx) s += a[static_cast<std::size_t>(j)];
    logs.push_back(-t * s);
    int i = query.q - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - query.q + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < query.q; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  const double mx = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - mx);
  const double log_scale = std::log(static_cast<double>(query.k)) - std::log(2.0 * std::numbers::pi);
  const double log_total = n * log_scale + log_prod + mx + std::log(acc);

  // With every intermediate well inside double range, evaluate the product
  // directly: fewer roundings, and a = 0 gives k^n / ((2 pi)^n t^n) as written.
  bool direct = n <= 8 && n * std::abs(std::log(t)) < 600.0 && n * std::abs(log_scale) < 600.0;
  for (double v : a) direct = direct && std::abs(t * v) <= 30.0;
  if (!direct) return std::exp(log_total);
  double numer = 1.0, denom = 1.0;
  for (double v : a) {
    numer *= static_cast<double>(query.k);
    const double x = t * v;
    denom *= 2.0 * std::numbers::pi * (std::abs(x) < kZeroEigenvalueTol ? t : -std::expm1(-x) / v);
  }
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l);
  return numer * sum / denom;
}

double heat_constant_C() {
  static const double value = [] {
    constexpr int points = 1000000;
    double c = 0.0;
    c = std::max(c, sup_on_grid(-1.0, 1.0, points, f_inner1));
    c = std::max(c, sup_on_grid(-1.0, 1.0, points, f_inner2));
    // The outer suprema are one-sided limits at |x| = 1; the grids confirm the
    // functions decay away from there.
    c = std::max(c, std::max(std::abs(f_outer1(-1.0)), std::abs(f_outer1(1.0))));
    c = std::max(c, std::max(std::abs(f_outer2(-1.0)), std::abs(f_outer2(1.0))));
    c = std::max(c, sup_on_grid(1.0 + 1e-9, 60.0, points, f_outer1));
    c = std::max(c, sup_on_grid(1.0 + 1e-9, 60.0, points, f_outer2));
    c = std::max(c, sup_on_grid(-60.0, -1.0 - 1e-9, points, f_outer1));
    c = std::max(c, sup_on_grid(-60.0, -1.0 - 1e-9, points, f_outer2));
    return c;
  }();
  return value;
}

DegeneracyBound degeneracy_bound(std::span<const double> eigenvalues, double t, int q) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "no eigenvalues");
  if (!(t > 1.0)) throw Error(ErrorKind::InvalidArgument, "degeneracy bound needs t > 1");
  if (q < 0 || q > n) throw Error(ErrorKind::InvalidArgument, "q out of range");
  const double C = heat_constant_C();
  DegeneracyBound out;
  out.value = 1.0;
  for (int j = 0; j < n; ++j) {
    const double a = eigenvalues[static_cast<std::size_t>(j)];
    if (std::abs(a * t) < 1.0) {
      out.iota.push_back(j);
      out.value *= C / t;
    } else {
      out.value *= C * std::abs(a);
    }
  }
  out.empty_regime = out.iota.empty();
  return out;
}

}  // namespace bergman
