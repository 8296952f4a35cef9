#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bergman/coeffs.hpp"
#include "bergman/heat.hpp"

using namespace bergman;
constexpr double pi = std::numbers::pi;

namespace {

// Direct enumeration with naive arithmetic, valid for moderate t |a|.
double brute_density(const std::vector<double>& a, double t, int q, int k) {
  const int n = static_cast<int>(a.size());
  double subset = 0.0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) != q) continue;
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      if (mask & (1 << j)) s += a[static_cast<std::size_t>(j)];
    subset += std::exp(-t * s);
  }
  double prod = 1.0;
  for (double v : a) prod *= v == 0.0 ? 1.0 / t : v / (1.0 - std::exp(-t * v));
  return std::pow(k / (2 * pi), n) * subset * prod;
}

}  // namespace

TEST_CASE("zero eigenvalue convention") {
  CHECK(heat_trace_density({{0.0}, 2.0, 0, 1}) == doctest::Approx(1 / (2 * pi) * 0.5).epsilon(1e-15));
  CHECK(heat_trace_density({{1e-14}, 2.0, 0, 1}) == doctest::Approx(1 / (4 * pi)).epsilon(1e-15));
  for (double t : {0.1, 0.5, 1.0, 3.0, 7.3}) CHECK(heat_trace_density({{0.0}, t, 0, 1}) == 1.0 / (2 * pi * t));
}

TEST_CASE("continuous across the switch to log-space evaluation") {
  // t |a| = 30 is the largest argument evaluated directly.
  for (double a : {-2.0, 2.0}) {
    const double lo = heat_trace_density({{a, 0.5}, 15.0 * (1 - 1e-12), 1, 2});
    const double hi = heat_trace_density({{a, 0.5}, 15.0 * (1 + 1e-12), 1, 2});
    CHECK(std::abs(hi - lo) <= 1e-9 * std::abs(lo));
  }
}

TEST_CASE("large t limit") {
  CHECK(std::abs(heat_trace_density({{2.0}, 50.0, 0, 1}) - 2 / (2 * pi)) < 1e-6);
  CHECK(std::abs(heat_trace_density({{2.0, -3.0}, 100.0, 1, 1}) - 6 / (4 * pi * pi)) < 1e-10);
  CHECK(heat_trace_density({{2.0, -3.0}, 100.0, 0, 1}) < 1e-80);
  CHECK(heat_trace_density({{2.0, -3.0}, 100.0, 2, 1}) < 1e-80);
  // Very large t |a| stays finite.
  CHECK(std::isfinite(heat_trace_density({{-5.0, 4.0}, 1e4, 1, 3})));
}

TEST_CASE("matches brute-force subset enumeration") {
  CHECK(heat_trace_density({{1.0, -1.0}, 1.0, 1, 1}) ==
        doctest::Approx(brute_density({1.0, -1.0}, 1.0, 1, 1)).epsilon(1e-14));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ev(-3.0, 3.0), tt(0.05, 4.0);
  for (int s = 0; s < 200; ++s) {
    const int n = 1 + s % 4;
    std::vector<double> a(static_cast<std::size_t>(n));
    for (auto& v : a) v = ev(rng);
    const double t = tt(rng);
    const int q = s % (n + 1);
    const int k = 1 + s % 7;
    CHECK(heat_trace_density({a, t, q, k}) == doctest::Approx(brute_density(a, t, q, k)).epsilon(1e-12));
  }
}

TEST_CASE("small t limit") {
  std::vector<std::vector<double>> cases{{1.0}, {2.0, -0.5}, {-1.0, 3.0, 0.0}, {0.2, 0.3, -0.4, 5.0}};
  for (const auto& a : cases) {
    const int n = static_cast<int>(a.size());
    for (int q = 0; q <= n; ++q) {
      const double t = 1e-6;
      const double binom = std::tgamma(n + 1.0) / (std::tgamma(q + 1.0) * std::tgamma(n - q + 1.0));
      const double v = std::pow(t, n) * heat_trace_density({a, t, q, 2}) / std::pow(2.0, n);
      CHECK(v == doctest::Approx(binom / std::pow(2 * pi, n)).epsilon(1e-4));
    }
  }
}

TEST_CASE("permutation symmetry") {
  std::vector<double> a{0.7, -1.3, 2.1};
  const double ref = heat_trace_density({a, 1.7, 1, 4});
  std::sort(a.begin(), a.end());
  do {
    CHECK(heat_trace_density({a, 1.7, 1, 4}) == doctest::Approx(ref).epsilon(1e-14));
  } while (std::next_permutation(a.begin(), a.end()));
}

TEST_CASE("large t limit equals b0") {
  auto g = ModelGeometry::fock({0.8, -1.7});
  const Point z{0.0, 0.0};
  auto rep = curvature_report_partial(g, z);
  std::vector<double> eig(rep.eigenvalues.data(), rep.eigenvalues.data() + rep.eigenvalues.size());
  const double b0 = b0_coeff(rep, 1).b0;
  CHECK(heat_trace_density({eig, 100.0, 1, 1}) == doctest::Approx(b0).epsilon(1e-12));
}

TEST_CASE("heat constant") {
  const double C = heat_constant_C();
  const double e = std::numbers::e;
  CHECK(std::abs(C - e / (e - 1)) < 1e-6);
  CHECK(C > 1.0);
  for (int i = 0; i <= 1000000; ++i) {
    const double x = -30.0 + 60.0 * i / 1000000.0;
    if (x == 0.0) continue;
    const double d = 1.0 - std::exp(x);
    if (std::abs(x) <= 1.0) {
      REQUIRE(std::abs(x / d) <= C + 1e-12);
      REQUIRE(std::abs(x * std::exp(x) / d) <= C + 1e-12);
    } else {
      REQUIRE(std::abs(1.0 / d) <= C + 1e-12);
      REQUIRE(std::abs(std::exp(x) / d) <= C + 1e-12);
    }
  }
}

TEST_CASE("degeneracy bound") {
  const double C = heat_constant_C();
  const std::vector<double> a1{0.01}, a2{3.0};
  auto b1 = degeneracy_bound(a1, 10.0, 0);
  CHECK(b1.value == doctest::Approx(C / 10));
  CHECK(b1.iota == std::vector<int>{0});
  CHECK_FALSE(b1.empty_regime);
  auto b2 = degeneracy_bound(a2, 10.0, 0);
  CHECK(b2.value == doctest::Approx(3 * C));
  CHECK(b2.empty_regime);
  CHECK_THROWS(degeneracy_bound(a1, 0.5, 0));

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> ev(-2.0, 2.0), tt(C, 40.0);
  std::uniform_int_distribution<int> dim(1, 4);
  int checked = 0;
  while (checked < 1000) {
    const int n = dim(rng);
    std::vector<double> a(static_cast<std::size_t>(n));
    for (auto& v : a) v = ev(rng) * std::pow(10.0, -2.0 * std::uniform_real_distribution<double>(0, 1)(rng));
    const double t = std::max(tt(rng), 1.0 + 1e-9);
    const int q = std::uniform_int_distribution<int>(0, n)(rng);
    auto b = degeneracy_bound(a, t, q);
    if (b.empty_regime) continue;
    CHECK(heat_trace_density({a, t, q, 1}) / b.value <= 1.0 + 1e-9);
    ++checked;
  }
}
