#include <cmath>
#include <limits>
#include <map>

#include "bergman/error.hpp"
#include "bergman/geometry.hpp"

namespace bergman {

namespace {

// Fornberg weights for the d-th derivative at 0 on integer nodes -p..p.
std::vector<double> fornberg(int d, int p) {
  const int m = 2 * p + 1;
  std::vector<double> x(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) x[static_cast<std::size_t>(i)] = i - p;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(d + 1), 0.0));
  double c1 = 1.0, c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const int mn = std::min(i, d);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[ui];
    for (int j = 0; j < i; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const double c3 = x[ui] - x[uj];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          const auto uk = static_cast<std::size_t>(k);
          c[ui][uk] = c1 * (k * c[ui - 1][uk - 1] - c5 * c[ui - 1][uk]) / c2;
        }
        c[ui][0] = -c1 * c5 * c[ui - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        const auto uk = static_cast<std::size_t>(k);
        c[uj][uk] = (c4 * c[uj][uk] - k * c[uj][uk - 1]) / c3;
      }
      c[uj][0] = c4 * c[uj][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) w[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
  return w;
}

// Half-width of the 4th-order accurate central stencil for a d-th derivative.
int stencil_half_width(int d) { return d == 0 ? 0 : (d + 1) / 2 + 1; }

const std::vector<double>& stencil(int d) {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t;
    for (int k = 0; k <= kMaxJetOrder; ++k) t.push_back(k == 0 ? std::vector<double>{1.0} : fornberg(k, stencil_half_width(k)));
    return t;
  }();
  return table.at(static_cast<std::size_t>(d));
}

// Coefficients of X^p Y^(a+b-p) in (X - iY)^a (X + iY)^b / 2^(a+b).
std::vector<cplx> wirtinger_to_real(int a, int b) {
  std::vector<cplx> poly{1.0};
  auto times = [&](cplx ycoef) {
    std::vector<cplx> next(poly.size() + 1, 0.0);
    for (std::size_t p = 0; p < poly.size(); ++p) {
      next[p + 1] += 0.5 * poly[p];         // X raises the X power
      next[p] += 0.5 * ycoef * poly[p];     // Y keeps it
    }
    poly = std::move(next);
  };
  for (int i = 0; i < a; ++i) times(cplx(0.0, -1.0));
  for (int i = 0; i < b; ++i) times(cplx(0.0, 1.0));
  return poly;
}

class Evaluator {
 public:
  Evaluator(const std::function<cplx(std::span<const cplx>)>& f, std::span<const cplx> z0, double h)
      : f_(f), z0_(z0.begin(), z0.end()), h_(h) {}

  cplx at(const std::vector<int>& offset) {
    auto it = cache_.find(offset);
    if (it != cache_.end()) return it->second;
    std::vector<cplx> z = z0_;
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] += cplx(offset[2 * j] * h_, offset[2 * j + 1] * h_);
    }
    cplx v = f_(z);
    cache_.emplace(offset, v);
    return v;
  }

  // Mixed real partial with orders d[0..2n) by a tensor-product stencil.
  cplx partial(const std::vector<int>& d) {
    const std::size_t m = d.size();
    std::vector<int> idx(m, 0), offset(m, 0);
    std::vector<int> half(m);
    for (std::size_t r = 0; r < m; ++r) half[r] = stencil_half_width(d[r]);
    cplx sum = 0.0;
    for (;;) {
      double w = 1.0;
      for (std::size_t r = 0; r < m; ++r) {
        w *= stencil(d[r])[static_cast<std::size_t>(idx[r])];
        offset[r] = idx[r] - half[r];
      }
      if (w != 0.0) sum += w * at(offset);
      std::size_t r = 0;
      for (; r < m; ++r) {
        if (++idx[r] <= 2 * half[r]) break;
        idx[r] = 0;
      }
      if (r == m) break;
    }
    int total = 0;
    for (int v : d) total += v;
    return sum / std::pow(h_, total);
  }

 private:
  const std::function<cplx(std::span<const cplx>)>& f_;
  std::vector<cplx> z0_;
  double h_;
  std::map<std::vector<int>, cplx> cache_;
};

bool stencil_fits(std::span<const cplx> z0, const std::vector<int>& reach, double h, const Chart& chart) {
  const std::size_t n = z0.size();
  // Check the corners of the reachable box; the chart is convex.
  const std::size_t corners = std::size_t{1} << (2 * n);
  std::vector<cplx> z(z0.begin(), z0.end());
  for (std::size_t mask = 0; mask < corners; ++mask) {
    for (std::size_t j = 0; j < n; ++j) {
      double dx = reach[2 * j] * h * ((mask >> (2 * j)) & 1u ? 1.0 : -1.0);
      double dy = reach[2 * j + 1] * h * ((mask >> (2 * j + 1)) & 1u ? 1.0 : -1.0);
      z[j] = z0[j] + cplx(dx, dy);
    }
    if (!chart.contains(z)) return false;
  }
  return true;
}

}  // namespace

cplx fd_wirtinger_derivative(const std::function<cplx(std::span<const cplx>)>& f, std::span<const cplx> z0,
                             std::span<const int> alpha, std::span<const int> beta, const Chart& chart) {
  const std::size_t n = z0.size();
  if (alpha.size() != n || beta.size() != n) throw Error(ErrorKind::InvalidArgument, "multi-index length must equal n");
  if (!chart.contains(z0)) throw Error(ErrorKind::OutOfChart, "base point outside chart");

  int order = 0;
  std::vector<std::vector<cplx>> polys(n);
  std::vector<int> reach(2 * n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    if (alpha[j] < 0 || beta[j] < 0) throw Error(ErrorKind::InvalidArgument, "negative multi-index");
    const int mj = alpha[j] + beta[j];
    order += mj;
    polys[j] = wirtinger_to_real(alpha[j], beta[j]);
    reach[2 * j] = reach[2 * j + 1] = stencil_half_width(mj);
  }
  if (order == 0) return f(z0);

  double scale = 1.0;
  for (const auto& c : z0) scale = std::max(scale, std::abs(c));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double h = 0.7 * std::pow(eps, 1.0 / (order + 6)) * scale;
  for (int shrink = 0; !stencil_fits(z0, reach, h, chart); ++shrink) {
    if (shrink >= 30) throw Error(ErrorKind::OutOfChart, "finite-difference stencil leaves the chart");
    h *= 0.5;
  }
  if (h / 2 < 64.0 * eps * scale) throw Error(ErrorKind::StepUnderflow, "finite-difference step collapsed");

  auto estimate = [&](double step) {
    Evaluator ev(f, z0, step);
    cplx sum = 0.0;
    std::vector<std::size_t> p(n, 0);
    std::vector<int> d(2 * n, 0);
    for (;;) {
      cplx w = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        const int mj = alpha[j] + beta[j];
        w *= polys[j][p[j]];
        d[2 * j] = static_cast<int>(p[j]);
        d[2 * j + 1] = mj - static_cast<int>(p[j]);
      }
      if (w != cplx{}) sum += w * ev.partial(d);
      std::size_t j = 0;
      for (; j < n; ++j) {
        if (++p[j] < polys[j].size()) break;
        p[j] = 0;
      }
      if (j == n) break;
    }
    return sum;
  };
  const cplx coarse = estimate(h);
  const cplx fine = estimate(h / 2);
  return (16.0 * fine - coarse) / 15.0;
}

}  // namespace bergman
