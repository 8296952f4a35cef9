#include <doctest.h>

#include <map>
#include <random>
#include <vector>

#include "bergman/error.hpp"
#include "bergman/jet.hpp"

using namespace bergman;

namespace {

using Mono = std::vector<int>;
using Poly = std::map<Mono, cplx>;

// Plain dictionary polynomials used as an independent oracle.
Poly random_poly(int nvars, int degree, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Poly p;
  auto rec = [&](auto&& self, Mono& e, int var, int left) -> void {
    if (var == nvars) {
      p[e] = cplx(u(rng), u(rng));
      return;
    }
    for (int v = 0; v <= left; ++v) {
      e[static_cast<std::size_t>(var)] = v;
      self(self, e, var + 1, left - v);
    }
    e[static_cast<std::size_t>(var)] = 0;
  };
  Mono e(static_cast<std::size_t>(nvars), 0);
  rec(rec, e, 0, degree);
  return p;
}

Poly mul(const Poly& a, const Poly& b, int order) {
  Poly r;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      Mono e(ea.size());
      int d = 0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = ea[i] + eb[i];
        d += e[i];
      }
      if (d <= order) r[e] += ca * cb;
    }
  }
  return r;
}

WirtingerJet to_jet(const Poly& p, int n, int order) {
  WirtingerJet j(n, order);
  for (const auto& [e, c] : p) {
    std::vector<int> a(e.begin(), e.begin() + n), b(e.begin() + n, e.end());
    j.set_coeff(a, b, c);
  }
  return j;
}

void check_equal(const WirtingerJet& j, const Poly& p, double tol) {
  const auto& lay = j.layout();
  for (std::size_t i = 0; i < lay.size(); ++i) {
    auto e = lay.exponent(i);
    Mono m(e.begin(), e.end());
    auto it = p.find(m);
    cplx expect = it == p.end() ? cplx{} : it->second;
    CHECK(std::abs(j.coefficients()[i] - expect) <= tol);
  }
}

}  // namespace

TEST_CASE("layout is graded and nested across orders") {
  auto small = JetLayout::get(4, 3);
  auto big = JetLayout::get(4, 6);
  REQUIRE(small->size() == 35);
  for (std::size_t i = 0; i < small->size(); ++i) {
    auto a = small->exponent(i);
    auto b = big->exponent(i);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }
  for (std::size_t i = 0; i < big->size(); ++i) CHECK(big->index(big->exponent(i)) == static_cast<std::ptrdiff_t>(i));
  CHECK(small->index(std::vector<int>{2, 2, 0, 0}) == -1);
}

TEST_CASE("product and sum are exact on random polynomials") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    auto p = random_poly(4, 3, rng);
    auto q = random_poly(4, 3, rng);
    auto jp = to_jet(p, 2, 6);
    auto jq = to_jet(q, 2, 6);
    check_equal(jp * jq, mul(p, q, 6), 1e-14);
    Poly s = p;
    for (const auto& [e, c] : q) s[e] += c;
    check_equal(jp + jq, s, 0.0);
  }
}

TEST_CASE("products gain order from valuation") {
  auto zzb = WirtingerJet::z(1, 4, 0, 0.0) * WirtingerJet::zbar(1, 4, 0, 0.0);
  CHECK(zzb.order() == 5);
  auto sq = zzb.truncated(4) * zzb.truncated(4);
  CHECK(sq.order() == 6);
  CHECK(sq.coeff(std::vector<int>{2}, std::vector<int>{2}) == cplx(1.0));
}

TEST_CASE("log of 1 + |z|^2 matches its series") {
  auto t = WirtingerJet::z(1, 6, 0, 0.0) * WirtingerJet::zbar(1, 6, 0, 0.0);
  auto phi = 0.5 * log(1.0 + t);
  using V = std::vector<int>;
  CHECK(std::abs(phi.coeff(V{1}, V{1}) - 0.5) < 1e-15);
  CHECK(std::abs(phi.coeff(V{2}, V{2}) + 0.25) < 1e-15);
  CHECK(std::abs(phi.coeff(V{3}, V{3}) - 1.0 / 6.0) < 1e-15);
  CHECK(std::abs(phi.coeff(V{2}, V{1})) == 0.0);
  CHECK(phi.reality_defect() == 0.0);
}

TEST_CASE("composition identities at a shifted base point") {
  const cplx z0(0.3, -0.4);
  auto z = WirtingerJet::z(1, 8, 0, z0);
  auto zb = WirtingerJet::zbar(1, 8, 0, std::conj(z0));
  auto a = 1.0 + z * zb + 0.25 * z * z;
  auto back = exp(log(a));
  auto diff = back - a;
  CHECK(diff.max_abs() < 1e-13);
  auto r = sqrt(a) * sqrt(a) - a;
  CHECK(r.max_abs() < 1e-13);
  auto one = a * reciprocal(a) - 1.0;
  CHECK(one.max_abs() < 1e-13);
  CHECK(pow(a, -2.0).max_abs() == doctest::Approx((reciprocal(a) * reciprocal(a)).max_abs()));
}

TEST_CASE("derivatives and conjugation") {
  auto z = WirtingerJet::z(1, 5, 0, 0.0);
  auto zb = WirtingerJet::zbar(1, 5, 0, 0.0);
  auto f = z * z * zb;  // d/dz -> 2 z zb
  auto g = f.truncated(5).d_z(0);
  using V = std::vector<int>;
  CHECK(g.coeff(V{1}, V{1}) == cplx(2.0));
  CHECK(f.derivative(V{2}, V{1}) == cplx(2.0));
  auto h = f.conjugate();
  CHECK(h.coeff(V{1}, V{2}) == cplx(1.0));
  CHECK(f.reality_defect() == 1.0);
  CHECK(f.holomorphic_part().max_abs() == 0.0);
  CHECK((z * z).antiholomorphic_part().max_abs() == 0.0);
  CHECK(z.valuation() == 1);
}

TEST_CASE("laplace0 with eigenvalue weights") {
  auto z = WirtingerJet::z(2, 4, 0, 0.0);
  auto zb = WirtingerJet::zbar(2, 4, 0, 0.0);
  auto w = WirtingerJet::z(2, 4, 1, 0.0);
  auto wb = WirtingerJet::zbar(2, 4, 1, 0.0);
  std::vector<double> lam{2.0, 4.0};
  auto l = laplace0(z * zb + w * wb, lam);
  CHECK(std::abs(l.constant() - 0.75) < 1e-15);
  // (z zb)^2 -> 4 z zb / 2
  auto l2 = laplace0((z * zb * z * zb).truncated(4), lam);
  using V = std::vector<int>;
  CHECK(std::abs(l2.coeff(V{1, 0}, V{1, 0}) - 2.0) < 1e-15);
}

TEST_CASE("jet determinant and inverse") {
  const int n = 2;
  auto z = WirtingerJet::z(1, 4, 0, 0.2);
  auto zb = WirtingerJet::zbar(1, 4, 0, 0.2);
  std::vector<WirtingerJet> m{2.0 + z * zb, z, zb, 3.0 + z * z};
  auto det = jet_det(m, n);
  auto expect = m[0] * m[3] - m[1] * m[2];
  CHECK((det - expect).max_abs() < 1e-13);
  auto inv = jet_inverse(m, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto s = inv[static_cast<std::size_t>(i * n)] * m[static_cast<std::size_t>(j)] +
               inv[static_cast<std::size_t>(i * n + 1)] * m[static_cast<std::size_t>(n + j)];
      if (i == j) s -= 1.0;
      CHECK(s.max_abs() < 1e-13);
    }
  }
}

TEST_CASE("errors") {
  WirtingerJet zero(1, 3);
  CHECK_THROWS_AS(reciprocal(zero), Error);
  CHECK_THROWS_AS(WirtingerJet(1, 0).d_z(0), Error);
  CHECK_THROWS_AS(JetLayout::get(2, 99), Error);
  using V = std::vector<int>;
  CHECK_THROWS_AS(WirtingerJet(1, 2).coeff(V{2}, V{1}), Error);
}
