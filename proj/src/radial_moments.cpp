#include "radial_moments.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "bergman/error.hpp"

namespace bergman::detail {

namespace {

constexpr double kScanLo = -60.0;
constexpr double kScanHi = 60.0;
constexpr double kDrop = 60.0;  // integrand below exp(-60) of its peak is dropped

}  // namespace

RadialMoments::RadialMoments(RadialProfile profile, int k, double tol)
    : profile_(std::move(profile)), k_(k), tol_(tol) {
  if (profile_.empty) throw Error(ErrorKind::InvalidArgument, "radial moments of an empty section space");
}

double RadialMoments::integrate(int m, double* rel_err) const {
  const double two_k = 2.0 * k_;
  auto h = [&](double s) {
    const double t = std::exp(s);
    const double v = (m + 1) * s - two_k * profile_.phi(t) + profile_.log_v(t);
    if (std::isnan(v)) throw Error(ErrorKind::QuadratureNotConverged, "radial integrand is not finite");
    return v;
  };
  const bool finite_top = std::isfinite(profile_.t_max);
  const double hi = finite_top ? std::log(profile_.t_max) - 1e-12 : kScanHi;
  const double lo = std::min(kScanLo, hi - 10.0);

  double best_s = lo, best_h = -std::numeric_limits<double>::infinity();
  const double step = 0.25;
  for (double s = lo; s <= hi; s += step) {
    const double v = h(s);
    if (v > best_h) {
      best_h = v;
      best_s = s;
    }
  }
  if (!finite_top && best_s > hi - step) {
    throw Error(ErrorKind::QuadratureNotConverged, "moment " + std::to_string(m) + " diverges at infinity");
  }
  const double a0 = std::max(lo, best_s - step), b0 = std::min(hi, best_s + step);
  auto [s_star, neg] = boost::math::tools::brent_find_minima([&](double s) { return -h(s); }, a0, b0, 52);
  double h_star = -neg;
  if (h_star < best_h) {
    s_star = best_s;
    h_star = best_h;
  }

  double a = s_star, b = s_star;
  while (a > -700.0 && h(a) > h_star - kDrop) a -= 1.0;
  while (b < hi && h(b) > h_star - kDrop) b = std::min(hi, b + 1.0);

  auto f = [&](double s) { return std::exp(h(s) - h_star); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / 2.0)));
  const double w = (b - a) / pieces;
  // Coarse pass fixes an absolute target so negligible tail pieces are not
  // refined to their own relative accuracy.
  double coarse = 0.0;
  for (int i = 0; i < pieces; ++i) coarse += GK::integrate(f, a + i * w, a + (i + 1) * w, 0, 0.0);
  const double target = tol_ * coarse / pieces;
  double total = 0.0, err = 0.0;
  std::function<void(double, double, int)> refine = [&](double x0, double x1, int depth) {
    double e = 0.0;
    const double v = GK::integrate(f, x0, x1, 0, 0.0, &e);
    if (e <= target || e <= tol_ * v || depth >= 12) {
      total += v;
      err += e;
      return;
    }
    const double mid = 0.5 * (x0 + x1);
    refine(x0, mid, depth + 1);
    refine(mid, x1, depth + 1);
  };
  for (int i = 0; i < pieces; ++i) refine(a + i * w, a + (i + 1) * w, 0);
  if (!(total > 0.0)) throw Error(ErrorKind::QuadratureNotConverged, "radial moment vanished");
  // Dropped tails are below exp(-kDrop) of the peak over a unit width.
  *rel_err = err / total + std::exp(-kDrop);
  return std::log(2.0 * std::numbers::pi) + h_star + std::log(total);
}

double RadialMoments::log_moment(int m) const {
  if (m < 0) throw Error(ErrorKind::InvalidArgument, "negative moment index");
  if (profile_.max_index >= 0 && m > profile_.max_index) {
    throw Error(ErrorKind::InvalidArgument, "monomial outside the admissible basis");
  }
  std::lock_guard lock(mutex_);
  while (static_cast<int>(log_g_.size()) <= m) {
    double e = 0.0;
    log_g_.push_back(integrate(static_cast<int>(log_g_.size()), &e));
    max_err_ = std::max(max_err_, e);
  }
  return log_g_[static_cast<std::size_t>(m)];
}

double RadialMoments::max_relative_error() const {
  std::lock_guard lock(mutex_);
  return max_err_;
}

KernelSum RadialMoments::sum(cplx z, cplx w) const {
  const double tz = std::norm(z), tw = std::norm(w);
  if (tz >= profile_.t_max || tw >= profile_.t_max) throw Error(ErrorKind::OutOfChart, "point outside the disk");
  const double wlog = -k_ * (profile_.phi(tz) + profile_.phi(tw));
  const double logx = (z == 0.0 || w == 0.0) ? -std::numeric_limits<double>::infinity()
                                             : std::log(std::abs(z)) + std::log(std::abs(w));
  const double angle = std::arg(z) - std::arg(w);

  KernelSum out;
  double mag = 0.0;
  double lg = log_moment(0);
  for (int m = 0;; ++m) {
    const double T = std::exp((m == 0 ? 0.0 : m * logx) - lg + wlog);
    out.value += T * std::polar(1.0, m * angle);
    mag += T;
    ++out.terms;
    if (!std::isfinite(logx) || m == profile_.max_index) break;
    const double lg_next = log_moment(m + 1);
    const double r = std::exp(logx + lg - lg_next);
    const double next = T * r;
    if (r < 1.0 && next / (1.0 - r) <= 1e-17 * mag) {
      out.tail = next / (1.0 - r);
      break;
    }
    if (m > 1000000) throw Error(ErrorKind::QuadratureNotConverged, "kernel series does not terminate");
    lg = lg_next;
  }
  return out;
}

}  // namespace bergman::detail
