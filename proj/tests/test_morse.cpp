#include <doctest.h>

#include <cmath>

#include "bergman/error.hpp"
#include "bergman/morse.hpp"

using namespace bergman;

namespace {

// Mixed-sign metric on O(1): the bump makes the curvature negative near 0.
ModelGeometry mixed() { return ModelGeometry::cp1_fs(1, 1.0, 0.0, 1.0); }

}  // namespace

TEST_CASE("Fubini-Study strata") {
  auto s = strata_integrals(ModelGeometry::cp1_fs());
  CHECK(std::abs(s.values[0] - 1.0) < 1e-6);
  CHECK(s.values[1] == 0.0);
  CHECK(morse_integral(ModelGeometry::cp1_fs(3), 0) == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(morse_integral(ModelGeometry::cp1_fs(-2), 1) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("torus strata") {
  auto s = strata_integrals(ModelGeometry::torus({0.3, 1.2}, 3));
  CHECK(s.values[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.values[1] == 0.0);
  auto neg = strata_integrals(ModelGeometry::torus({0.0, 1.0}, -2));
  CHECK(neg.values[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mixed-sign metric keeps the Chern number") {
  auto s = strata_integrals(mixed());
  CHECK(s.values[1] > 0.1);
  CHECK(s.values[0] > 1.1);
  CHECK(std::abs(s.values[0] - s.values[1] - 1.0) < 1e-4);
  CHECK(s.error < 1e-4);
  // Off-centre perturbations of several bundles.
  for (int m : {1, 2, 3}) {
    auto t = strata_integrals(ModelGeometry::cp1_fs(m, -1.5, {0.5, 0.3}, 0.7));
    CHECK(t.values[0] >= 0.0);
    CHECK(t.values[1] >= 0.0);
    CHECK(std::abs(t.values[0] - t.values[1] - m) < 1e-4);
  }
}

TEST_CASE("chart expression on a bounded disk") {
  // |z|^2 has Phi = 1 and Rdot = 2; over the disk of radius 2 the integral is
  // (1 / 2 pi) * 2 * 2 * area = 8.
  Chart c;
  c.radius = 2.0;
  auto g = ModelGeometry::chart_expression(1, "abs2(z)", {"identity"}, {}, c);
  CHECK(morse_integral(g, 0) == doctest::Approx(8.0).epsilon(1e-8));
  CHECK_THROWS_AS(strata_integrals(ModelGeometry::chart_expression(1, "abs2(z)", {"identity"})), Error);
}

TEST_CASE("unsupported families") {
  try {
    strata_integrals(ModelGeometry::fock({1.0}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedFamily);
  }
  CHECK_THROWS_AS(morse_integral(ModelGeometry::cp1_fs(), 2), Error);
}

TEST_CASE("report and exact dims") {
  auto r = morse_report(ModelGeometry::cp1_fs(2), {1, 5, 10});
  CHECK(r.rr_leading == 2.0);
  CHECK(r.alternating_sum == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.exact_dims.at(10) == std::vector<long>{21, 0});
  CHECK(*exact_dims(ModelGeometry::cp1_fs(-1), 10) == std::vector<long>{0, 9});
  CHECK(*exact_dims(ModelGeometry::torus({0.0, 1.0}, 2), 7) == std::vector<long>{14, 0});
  CHECK_FALSE(exact_dims(ModelGeometry::fock({1.0}), 3).has_value());
  // Riemann-Roch: dim H^0 - dim H^1 = deg + 1 on the sphere, deg on the torus.
  for (int m = -3; m <= 3; ++m)
    for (int k = 1; k <= 6; ++k) {
      auto d = *exact_dims(ModelGeometry::cp1_fs(m), k);
      CHECK(d[0] - d[1] == m * k + 1);
      CHECK(std::min(d[0], d[1]) == 0);
    }
}

TEST_CASE("strong Morse inequalities") {
  auto r0 = strong_morse_check(ModelGeometry::cp1_fs(), 0, 20);
  CHECK(r0.dims == std::vector<long>{21, 0});
  CHECK(r0.margins[0].name == "lower");
  CHECK(r0.margins[0].margin == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r0.all_hold);
  auto r1 = strong_morse_check(ModelGeometry::cp1_fs(), 1, 20);
  CHECK(r1.margins[0].lhs == 0.0);
  CHECK(r1.margins[0].rhs <= 0.0);
  CHECK(r1.all_hold);

  auto m = mixed();
  for (int k : {10, 160}) {
    auto r = strong_morse_check(m, 0, k);
    CHECK(r.margins[0].margin == doctest::Approx(1.0).epsilon(1e-3 * k));
    CHECK(r.all_hold);
    CHECK(strong_morse_check(m, 1, k).all_hold);
  }

  // A false count is reported, not hidden.
  auto bad = strong_morse_check(ModelGeometry::cp1_fs(), 0, 20, std::vector<long>{5, 0});
  CHECK_FALSE(bad.all_hold);
  try {
    strong_morse_check(ModelGeometry::chart_expression(1, "abs2(z)", {"identity"}, {}, Chart{1.0, {}, {}, {}, {}}),
                       0, 4);
    FAIL("expected MissingDims");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingDims);
  }
}

TEST_CASE("vanishing for the negative bundle") {
  auto g = ModelGeometry::cp1_fs(-1);
  auto v0 = vanishing_check(g, 0, {1, 2, 5, 10, 40});
  CHECK(v0.n_minus == 1);
  CHECK(v0.consistent);
  for (const auto& row : v0.rows) CHECK(row.dim == 0);
  auto v1 = vanishing_check(g, 1, {10, 40});
  CHECK(v1.rows[0].dim == 9);
  CHECK(v1.rows[0].leading == doctest::Approx(10.0).epsilon(1e-8));
  CHECK(std::abs(v1.rows[1].ratio - 1.0) < 0.05);
  CHECK(v1.consistent);
  auto fs = vanishing_check(ModelGeometry::cp1_fs(), 1, {3, 8});
  CHECK(fs.rows[1].dim == 0);
  CHECK(fs.consistent);
  CHECK_THROWS_AS(vanishing_check(mixed(), 0, {4}), Error);
}

TEST_CASE("weak Morse ratio approaches one at rate 1/k") {
  auto g = ModelGeometry::cp1_fs(2);
  const double I0 = morse_integral(g, 0);
  for (int k : {5, 20, 80}) {
    const double ratio = static_cast<double>((*exact_dims(g, k))[0]) / (k * I0);
    CHECK(std::abs(ratio - 1.0) <= 1.0 / k + 1e-6);
  }
}
