#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bergman/error.hpp"
#include "bergman/geometry.hpp"

using namespace bergman;
using V = std::vector<int>;
constexpr double pi = std::numbers::pi;

TEST_CASE("wirtinger derivatives of builtin weights") {
  auto fock = ModelGeometry::fock({1.0});
  Point z0{0.0};
  CHECK(std::abs(wirtinger_derivative(fock, ChartFunction::weight(), z0, V{1}, V{1}) - 1.0) < 1e-15);

  auto cp1 = ModelGeometry::cp1_fs();
  CHECK(std::abs(wirtinger_derivative(cp1, ChartFunction::weight(), z0, V{1}, V{1}) - 0.5) < 1e-15);

  for (auto mode : {DerivativeMode::exact_closed_form, DerivativeMode::finite_difference}) {
    auto g = cp1.with_derivative_mode(mode);
    Point z{cplx(0.2, -0.1)};
    CHECK(std::abs(wirtinger_derivative(g, ChartFunction::constant(3.0), z, V{1}, V{0})) < 1e-9);
    CHECK(std::abs(wirtinger_derivative(g, ChartFunction::constant(3.0), z, V{2}, V{1})) < 1e-9);
  }
  CHECK_THROWS_AS(wirtinger_derivative(cp1, ChartFunction::weight(), z0, V{5}, V{4}), Error);
}

TEST_CASE("jets of builtin weights") {
  auto fock = ModelGeometry::fock({2.0});
  auto j = jet(fock, ChartFunction::weight(), Point{0.0}, 2);
  const auto& lay = j.layout();
  for (std::size_t i = 0; i < lay.size(); ++i) {
    auto e = lay.exponent(i);
    if (e[0] == 1 && e[1] == 1) {
      CHECK(j.coefficients()[i] == cplx(2.0));
    } else {
      CHECK(j.coefficients()[i] == cplx(0.0));
    }
  }
  auto cp1 = jet(ModelGeometry::cp1_fs(), ChartFunction::weight(), Point{0.0}, 4);
  CHECK(std::abs(cp1.coeff(V{1}, V{1}) - 0.5) < 1e-15);
  CHECK(std::abs(cp1.coeff(V{2}, V{2}) + 0.25) < 1e-15);
}

TEST_CASE("weights are real valued") {
  std::vector<ModelGeometry> gs{ModelGeometry::fock({1.0, 2.0}), ModelGeometry::cp1_fs(1, 0.3, cplx(0.2, 0.1), 0.7),
                                ModelGeometry::torus(cplx(0.3, 1.2), 2), ModelGeometry::radial({1.0, 0.2, -0.01})};
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  for (const auto& g : gs) {
    for (int s = 0; s < 20; ++s) {
      Point z;
      for (int j = 0; j < g.n(); ++j) z.emplace_back(nd(rng), nd(rng));
      CHECK(std::isfinite(g.phi(z)));
      CHECK(std::imag(ChartFunction::weight().exact_jet(g, z, 0).constant()) == 0.0);
    }
  }
}

TEST_CASE("curvature endomorphism conventions") {
  auto r = curvature_endomorphism(ModelGeometry::fock({1.0, 2.5}), Point{0.3, cplx(0.0, 1.0)});
  CHECK(std::abs(r(0, 0) - 2.0) < 1e-15);
  CHECK(std::abs(r(1, 1) - 5.0) < 1e-15);
  CHECK(std::abs(r(0, 1)) == 0.0);
  auto cp1 = ModelGeometry::cp1_fs();
  for (cplx z : {cplx(0.0), cplx(0.5, -0.3), cplx(-2.0, 1.5)}) {
    CHECK(std::abs(curvature_endomorphism(cp1, Point{z})(0, 0) - 1.0) < 1e-13);
  }
  auto flat = ModelGeometry::chart_expression(1, "0", {"identity"});
  CHECK(curvature_endomorphism(flat, Point{0.4}).norm() == 0.0);
}

TEST_CASE("stratum classification") {
  auto s = classify_stratum(ModelGeometry::fock({1.0, -3.0}), Point{0.0, 0.0});
  CHECK(s.eigenvalues(0) == doctest::Approx(-6.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(2.0));
  CHECK(s.stratum == Stratum{false, 1});
  CHECK(s.stratum.label() == "M(1)");
  auto flat = classify_stratum(ModelGeometry::chart_expression(1, "0", {"identity"}), Point{0.1});
  CHECK(flat.stratum.degenerate);
  auto cp1 = ModelGeometry::cp1_fs();
  for (cplx z : {cplx(0.0), cplx(1.0, 1.0), cplx(-4.0, 0.2)}) {
    CHECK(classify_stratum(cp1, Point{z}).stratum == Stratum{false, 0});
  }
}

TEST_CASE("stratum labels survive chart rescaling") {
  const double c = 2.0;
  auto g = ModelGeometry::fock({1.0, -3.0});
  // phi(z / c) with Theta(z / c) / c^2
  auto scaled = ModelGeometry::chart_expression(2, "(abs2(z_1) - 3*abs2(z_2)) / c^2", {"1 / c^2"}, {{"c", c}});
  Point z{cplx(0.4, 0.1), cplx(-0.2, 0.3)};
  Point zc{z[0] * c, z[1] * c};
  auto a = classify_stratum(g, z);
  auto b = classify_stratum(scaled, zc);
  CHECK(a.stratum == b.stratum);
  for (int i = 0; i < 2; ++i) CHECK(a.eigenvalues(i) == doctest::Approx(b.eigenvalues(i)));
}

TEST_CASE("Fubini-Study report is homogeneous") {
  auto cp1 = ModelGeometry::cp1_fs();
  for (cplx z : {cplx(0.0), cplx(0.7, 0.2), cplx(-1.5, 2.0)}) {
    auto rep = curvature_report(cp1, Point{z});
    REQUIRE(rep.omega.has_value());
    const auto& f = *rep.omega;
    const double tol = 1e-10;
    CHECK(f.r == doctest::Approx(8 * pi).epsilon(tol));
    CHECK(f.r_hat == doctest::Approx(8 * pi).epsilon(tol));
    CHECK(f.ric_norm2 == doctest::Approx(16 * pi * pi).epsilon(tol));
    CHECK(f.rdet_norm2 == doctest::Approx(16 * pi * pi).epsilon(tol));
    CHECK(f.ric_rdet_pairing == doctest::Approx(16 * pi * pi).epsilon(tol));
    CHECK(f.rtm_norm2 == doctest::Approx(16 * pi * pi).epsilon(tol));
    CHECK(std::abs(f.laplacian_r) < 1e-8);
    CHECK(std::abs(f.laplacian_r_hat) < 1e-8);
    CHECK(rep.det_rdot == doctest::Approx(1.0));
  }
}

TEST_CASE("flat and Kahler reports") {
  auto rep = curvature_report(ModelGeometry::fock({0.7, 1.3}), Point{0.2, cplx(0.1, -0.4)});
  REQUIRE(rep.omega.has_value());
  CHECK(rep.omega->r == 0.0);
  CHECK(rep.omega->r_hat == 0.0);
  CHECK(rep.omega->ric_norm2 == 0.0);
  CHECK(rep.omega->rtm_norm2 == 0.0);

  auto k = ModelGeometry::chart_expression(1, "abs2(z) + 0.3*abs2(z)^2 - 0.05*abs2(z)^3", {"kahler"});
  auto kr = curvature_report(k, Point{cplx(0.3, 0.2)});
  CHECK(kr.omega->r_hat == doctest::Approx(kr.omega->r).epsilon(1e-12));
  CHECK(kr.omega->rdet_norm2 == doctest::Approx(kr.omega->ric_norm2).epsilon(1e-12));
}

TEST_CASE("product of two projective lines adds curvature") {
  auto g = ModelGeometry::chart_expression(2, "0.5*log(1+abs2(z_1)) + 0.5*log(1+abs2(z_2))",
                                           {"1/(1+abs2(z_1))^2", "1/(1+abs2(z_2))^2"});
  auto rep = curvature_report(g, Point{cplx(0.3, 0.1), cplx(-0.6, 0.4)});
  const auto& f = *rep.omega;
  CHECK(f.r == doctest::Approx(16 * pi));
  CHECK(f.ric_norm2 == doctest::Approx(32 * pi * pi));
  CHECK(f.rtm_norm2 == doctest::Approx(32 * pi * pi));
}

TEST_CASE("NotPositive and NotHermitian") {
  CHECK_THROWS_AS(curvature_report(ModelGeometry::fock({1.0, -1.0}), Point{0.0, 0.0}), Error);
  auto part = curvature_report_partial(ModelGeometry::fock({1.0, -1.0}), Point{0.0, 0.0});
  CHECK_FALSE(part.omega.has_value());
  auto bad = ModelGeometry::chart_expression(2, "abs2(z_1)+abs2(z_2)", {"1", "0.5", "0", "1"});
  try {
    curvature_endomorphism(bad, Point{0.0, 0.0});
    FAIL("expected NotHermitian");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotHermitian);
  }
}

TEST_CASE("chart membership") {
  Chart c;
  c.radius = 1.0;
  auto g = ModelGeometry::chart_expression(1, "abs2(z)", {"identity"}, {}, c);
  try {
    g.phi(Point{2.0});
    FAIL("expected OutOfChart");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfChart);
  }
  // Near the boundary the stencil shrinks instead of leaving the chart.
  auto d = wirtinger_derivative(g.with_derivative_mode(DerivativeMode::finite_difference), ChartFunction::weight(),
                                Point{0.99}, V{1}, V{1});
  CHECK(std::abs(d - 1.0) < 1e-6);
}

TEST_CASE("finite differences agree with exact derivatives up to order 4") {
  std::vector<std::pair<ModelGeometry, Point>> cases{
      {ModelGeometry::fock({1.5}), Point{cplx(0.3, -0.2)}},
      {ModelGeometry::fock({1.0, 0.5}), Point{cplx(0.3, -0.2), cplx(0.1, 0.4)}},
      {ModelGeometry::cp1_fs(), Point{cplx(0.4, 0.3)}},
      {ModelGeometry::cp1_fs(1, 0.05, cplx(0.2, 0.1), 1.0), Point{cplx(-0.3, 0.5)}},
      {ModelGeometry::torus(cplx(0.2, 1.1), 2), Point{cplx(0.25, 0.4)}},
      {ModelGeometry::radial({1.0, 0.3, -0.02}), Point{cplx(0.5, 0.1)}},
  };
  for (const auto& [g, z] : cases) {
    const int n = g.n();
    auto fd = g.with_derivative_mode(DerivativeMode::finite_difference);
    std::vector<ChartFunction> fns{ChartFunction::weight(), ChartFunction::theta_entry(0, 0)};
    for (const auto& f : fns) {
      auto exact = f.exact_jet(g, z, 4);
      const auto& lay = exact.layout();
      double worst = 0.0;
      for (std::size_t i = 1; i < lay.size(); ++i) {
        auto e = lay.exponent(i);
        V a(e.begin(), e.begin() + n), b(e.begin() + n, e.end());
        cplx ex = exact.derivative(a, b);
        cplx approx = wirtinger_derivative(fd, f, z, a, b);
        worst = std::max(worst, std::abs(approx - ex) / std::max(1.0, std::abs(ex)));
      }
      CHECK(worst < 1e-7);
    }
  }
}
