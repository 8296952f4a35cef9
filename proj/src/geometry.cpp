#include "bergman/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bergman/error.hpp"

namespace bergman {

namespace {

using PhiC = std::function<cplx(std::span<const cplx>)>;
using PhiJ = std::function<WirtingerJet(std::span<const cplx>, int)>;
using ThetaC = std::function<CMatrix(std::span<const cplx>)>;
using ThetaJ = std::function<std::vector<WirtingerJet>(std::span<const cplx>, int)>;

template <class T>
struct Vars {
  std::vector<T> z, zb;
  T one;
};

Vars<cplx> point_vars(std::span<const cplx> z) {
  Vars<cplx> v{{z.begin(), z.end()}, {}, 1.0};
  for (const auto& c : z) v.zb.push_back(std::conj(c));
  return v;
}

Vars<WirtingerJet> jet_vars(std::span<const cplx> z0, int order) {
  const int n = static_cast<int>(z0.size());
  Vars<WirtingerJet> v;
  for (int j = 0; j < n; ++j) {
    v.z.push_back(WirtingerJet::z(n, order, j, z0[static_cast<std::size_t>(j)]));
    v.zb.push_back(WirtingerJet::zbar(n, order, j, std::conj(z0[static_cast<std::size_t>(j)])));
  }
  v.one = WirtingerJet(n, order, 1.0);
  return v;
}

// Wrap a generic scalar formula f(Vars<T>) -> T for both evaluation modes.
template <class F>
std::pair<PhiC, PhiJ> scalar_fns(F f) {
  PhiC c = [f](std::span<const cplx> z) { return f(point_vars(z)); };
  PhiJ j = [f](std::span<const cplx> z0, int order) { return f(jet_vars(z0, order)).truncated(order); };
  return {c, j};
}

// Same for matrix-valued formulas returning a row-major std::vector<T>.
template <class F>
std::pair<ThetaC, ThetaJ> matrix_fns(int n, F f) {
  ThetaC c = [n, f](std::span<const cplx> z) {
    auto e = f(point_vars(z));
    CMatrix m(n, n);
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) m(r, s) = e[static_cast<std::size_t>(r * n + s)];
    return m;
  };
  ThetaJ j = [f](std::span<const cplx> z0, int order) {
    auto e = f(jet_vars(z0, order));
    for (auto& x : e) x = x.truncated(order);
    return e;
  };
  return {c, j};
}

template <class T>
std::vector<T> identity_entries(const Vars<T>& v) {
  const std::size_t n = v.z.size();
  std::vector<T> e;
  e.reserve(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t s = 0; s < n; ++s) e.push_back(v.one * (r == s ? 1.0 : 0.0));
  return e;
}

}  // namespace

struct ModelGeometry::Impl {
  int n = 1;
  Family family = Family::fock;
  DerivativeMode mode = DerivativeMode::exact_closed_form;
  GeometryParams params;
  Chart chart;
  bool polyradial = false;
  bool theta_kahler = false;
  PhiC phi_c;
  PhiJ phi_j;
  ThetaC theta_c;
  ThetaJ theta_j;
};

const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::fock: return "fock";
    case Family::cp1_fs: return "cp1_fs";
    case Family::torus: return "torus";
    case Family::radial: return "radial";
    case Family::chart_expression: return "chart_expression";
  }
  return "unknown";
}

const char* to_string(DerivativeMode m) noexcept {
  return m == DerivativeMode::exact_closed_form ? "exact_closed_form" : "finite_difference";
}

Family family_from_string(const std::string& s) {
  for (Family f : {Family::fock, Family::cp1_fs, Family::torus, Family::radial, Family::chart_expression}) {
    if (s == to_string(f)) return f;
  }
  throw Error(ErrorKind::UnsupportedFamily, "unknown family '" + s + "'");
}

DerivativeMode derivative_mode_from_string(const std::string& s) {
  if (s == "exact_closed_form" || s == "exact") return DerivativeMode::exact_closed_form;
  if (s == "finite_difference" || s == "fd") return DerivativeMode::finite_difference;
  throw Error(ErrorKind::InvalidArgument, "unknown derivative_mode '" + s + "'");
}

bool Chart::contains(std::span<const cplx> z) const {
  double r2 = 0.0;
  for (const auto& c : z) r2 += std::norm(c);
  if (!(std::sqrt(r2) < radius)) return false;
  for (std::size_t j = 0; j < z.size(); ++j) {
    auto in = [&](const std::vector<double>& lo, const std::vector<double>& hi, double x) {
      return lo.empty() || (x > lo[j] && x < hi[j]);
    };
    if (!in(re_lo, re_hi, z[j].real()) || !in(im_lo, im_hi, z[j].imag())) return false;
  }
  return true;
}

ModelGeometry ModelGeometry::fock(std::vector<double> lambda) {
  if (lambda.empty() || static_cast<int>(lambda.size()) > kMaxJetVariables / 2) {
    throw Error(ErrorKind::InvalidArgument, "fock needs 1..4 eigenvalues");
  }
  for (double l : lambda) {
    if (!std::isfinite(l)) throw Error(ErrorKind::InvalidArgument, "fock eigenvalues must be finite");
  }
  auto impl = std::make_shared<Impl>();
  impl->n = static_cast<int>(lambda.size());
  impl->family = Family::fock;
  impl->params.lambda = lambda;
  impl->polyradial = true;
  std::tie(impl->phi_c, impl->phi_j) = scalar_fns([lambda](const auto& v) {
    auto acc = v.one * 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) acc = acc + lambda[j] * (v.z[j] * v.zb[j]);
    return acc;
  });
  std::tie(impl->theta_c, impl->theta_j) =
      matrix_fns(impl->n, [](const auto& v) { return identity_entries(v); });
  return ModelGeometry(impl);
}

ModelGeometry ModelGeometry::cp1_fs(int degree, double eps, cplx center, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::InvalidArgument, "bump width must be positive");
  auto impl = std::make_shared<Impl>();
  impl->n = 1;
  impl->family = Family::cp1_fs;
  impl->params.degree = degree;
  impl->params.eps = eps;
  impl->params.center = center;
  impl->params.width = width;
  impl->polyradial = eps == 0.0 || center == cplx{};
  const double half_m = 0.5 * degree;
  const double inv_w2 = 1.0 / (width * width);
  std::tie(impl->phi_c, impl->phi_j) = scalar_fns([=](const auto& v) {
    auto t = v.z[0] * v.zb[0];
    auto phi = half_m * log(1.0 + t);
    if (eps != 0.0) phi = phi + eps * exp(-((v.z[0] - center) * (v.zb[0] - std::conj(center))) * inv_w2);
    return phi;
  });
  std::tie(impl->theta_c, impl->theta_j) = matrix_fns(1, [](const auto& v) {
    auto s = 1.0 + v.z[0] * v.zb[0];
    using T = std::decay_t<decltype(s)>;
    return std::vector<T>{1.0 / (s * s)};
  });
  return ModelGeometry(impl);
}

ModelGeometry ModelGeometry::torus(cplx tau, int degree) {
  if (!(tau.imag() > 0.0)) throw Error(ErrorKind::InvalidArgument, "torus needs Im tau > 0");
  auto impl = std::make_shared<Impl>();
  impl->n = 1;
  impl->family = Family::torus;
  impl->params.tau = tau;
  impl->params.torus_degree = degree;
  const double c = std::numbers::pi * degree / tau.imag();
  std::tie(impl->phi_c, impl->phi_j) = scalar_fns([c](const auto& v) {
    auto y = (v.z[0] - v.zb[0]) * cplx(0.0, -0.5);
    return c * (y * y);
  });
  std::tie(impl->theta_c, impl->theta_j) = matrix_fns(1, [](const auto& v) { return identity_entries(v); });
  return ModelGeometry(impl);
}

ModelGeometry ModelGeometry::radial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw Error(ErrorKind::InvalidArgument, "radial weight needs coefficients");
  auto impl = std::make_shared<Impl>();
  impl->n = 1;
  impl->family = Family::radial;
  impl->params.radial = coeffs;
  impl->polyradial = true;
  std::tie(impl->phi_c, impl->phi_j) = scalar_fns([coeffs](const auto& v) {
    auto t = v.z[0] * v.zb[0];
    auto acc = v.one * coeffs.back();
    for (std::size_t i = coeffs.size() - 1; i-- > 0;) acc = acc * t + coeffs[i];
    return acc * t;
  });
  std::tie(impl->theta_c, impl->theta_j) = matrix_fns(1, [](const auto& v) { return identity_entries(v); });
  return ModelGeometry(impl);
}

ModelGeometry ModelGeometry::chart_expression(int n, const std::string& weight, std::vector<std::string> theta,
                                              std::map<std::string, double> constants, Chart chart,
                                              bool rotation_invariant) {
  if (n < 1 || n > kMaxJetVariables / 2) throw Error(ErrorKind::InvalidArgument, "n must be in 1..4");
  auto impl = std::make_shared<Impl>();
  impl->n = n;
  impl->family = Family::chart_expression;
  impl->chart = chart;
  impl->params.weight = weight;
  impl->params.theta = theta;
  impl->params.constants = constants;
  impl->params.rotation_invariant = rotation_invariant;
  impl->polyradial = rotation_invariant && n == 1;

  Expression phi = Expression::parse(weight, n, constants);
  impl->phi_c = [phi](std::span<const cplx> z) { return phi.eval(z); };
  impl->phi_j = [phi](std::span<const cplx> z0, int order) { return phi.eval_jet(z0, order); };

  if (theta.empty() || (theta.size() == 1 && theta[0] == "identity")) {
    std::tie(impl->theta_c, impl->theta_j) = matrix_fns(n, [](const auto& v) { return identity_entries(v); });
  } else if (theta.size() == 1 && theta[0] == "kahler") {
    impl->theta_kahler = true;
    auto phi_j = impl->phi_j;
    impl->theta_j = [n, phi_j](std::span<const cplx> z0, int order) {
      auto p = phi_j(z0, order + 2);
      std::vector<WirtingerJet> e;
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) e.push_back(2.0 * p.d_z(r).d_zbar(s));
      return e;
    };
    impl->theta_c = [n, phi_j](std::span<const cplx> z) {
      auto p = phi_j(z, 2);
      CMatrix m(n, n);
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          std::vector<int> a(static_cast<std::size_t>(n), 0), b(static_cast<std::size_t>(n), 0);
          a[static_cast<std::size_t>(r)] = 1;
          b[static_cast<std::size_t>(s)] = 1;
          m(r, s) = 2.0 * p.coeff(a, b);
        }
      return m;
    };
  } else {
    const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    if (theta.size() != 1 && theta.size() != static_cast<std::size_t>(n) && theta.size() != nn) {
      throw Error(ErrorKind::InvalidArgument, "theta needs 1, n or n*n entries");
    }
    std::vector<Expression> ex;
    for (const auto& s : theta) ex.push_back(Expression::parse(s, n, constants));
    // Entry (r, s) as an index into ex, or -1 for zero.
    std::vector<int> pick(nn, -1);
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) {
        auto idx = static_cast<std::size_t>(r * n + s);
        if (ex.size() == nn) {
          pick[idx] = static_cast<int>(idx);
        } else if (r == s) {
          pick[idx] = ex.size() == 1 ? 0 : r;
        }
      }
    impl->theta_c = [n, ex, pick](std::span<const cplx> z) {
      CMatrix m = CMatrix::Zero(n, n);
      for (std::size_t i = 0; i < pick.size(); ++i)
        if (pick[i] >= 0) m(static_cast<int>(i) / n, static_cast<int>(i) % n) = ex[static_cast<std::size_t>(pick[i])].eval(z);
      return m;
    };
    impl->theta_j = [n, ex, pick](std::span<const cplx> z0, int order) {
      std::vector<WirtingerJet> e;
      for (std::size_t i = 0; i < pick.size(); ++i) {
        e.push_back(pick[i] >= 0 ? ex[static_cast<std::size_t>(pick[i])].eval_jet(z0, order) : WirtingerJet(n, order));
      }
      return e;
    };
  }
  return ModelGeometry(impl);
}

ModelGeometry ModelGeometry::with_derivative_mode(DerivativeMode mode) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->mode = mode;
  return ModelGeometry(impl);
}

ModelGeometry ModelGeometry::with_chart(Chart chart) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->chart = std::move(chart);
  return ModelGeometry(impl);
}

int ModelGeometry::n() const noexcept { return impl_->n; }
Family ModelGeometry::family() const noexcept { return impl_->family; }
DerivativeMode ModelGeometry::derivative_mode() const noexcept { return impl_->mode; }
const GeometryParams& ModelGeometry::params() const noexcept { return impl_->params; }
const Chart& ModelGeometry::chart() const noexcept { return impl_->chart; }
bool ModelGeometry::polyradial() const noexcept { return impl_->polyradial; }

void ModelGeometry::require_in_chart(std::span<const cplx> z) const {
  if (static_cast<int>(z.size()) != impl_->n) {
    throw Error(ErrorKind::InvalidArgument, "point has dimension " + std::to_string(z.size()) + ", expected " +
                                                std::to_string(impl_->n));
  }
  if (!impl_->chart.contains(z)) throw Error(ErrorKind::OutOfChart, "point outside chart");
}

double ModelGeometry::phi(std::span<const cplx> z) const {
  require_in_chart(z);
  cplx v = impl_->phi_c(z);
  if (!(std::abs(v.imag()) <= 1e-10 * (1.0 + std::abs(v.real())))) {
    throw Error(ErrorKind::InvalidArgument, "weight evaluates to a non-real value");
  }
  return v.real();
}

CMatrix ModelGeometry::theta(std::span<const cplx> z) const {
  require_in_chart(z);
  return impl_->theta_c(z);
}

double ModelGeometry::v_theta(std::span<const cplx> z) const { return theta(z).determinant().real(); }

WirtingerJet ModelGeometry::phi_jet_exact(std::span<const cplx> z0, int order) const {
  require_in_chart(z0);
  return impl_->phi_j(z0, order);
}

std::vector<WirtingerJet> ModelGeometry::theta_jet_exact(std::span<const cplx> z0, int order) const {
  require_in_chart(z0);
  return impl_->theta_j(z0, order);
}

namespace {

WirtingerJet fd_jet(const PhiC& f, std::span<const cplx> z0, int order, const Chart& chart) {
  const int n = static_cast<int>(z0.size());
  WirtingerJet j(n, order);
  const auto& lay = j.layout();
  auto c = j.coefficients();
  c[0] = f(z0);
  for (std::size_t i = 1; i < lay.size(); ++i) {
    auto e = lay.exponent(i);
    std::span<const int> a(e.data(), static_cast<std::size_t>(n));
    std::span<const int> b(e.data() + n, static_cast<std::size_t>(n));
    double fact = 1.0;
    for (int v : e) fact *= std::tgamma(v + 1.0);
    c[i] = fd_wirtinger_derivative(f, z0, a, b, chart) / fact;
  }
  return j;
}

}  // namespace

WirtingerJet ModelGeometry::phi_jet(std::span<const cplx> z0, int order) const {
  if (impl_->mode == DerivativeMode::exact_closed_form) return phi_jet_exact(z0, order);
  require_in_chart(z0);
  return fd_jet(impl_->phi_c, z0, order, impl_->chart);
}

std::vector<WirtingerJet> ModelGeometry::theta_jet(std::span<const cplx> z0, int order) const {
  if (impl_->mode == DerivativeMode::exact_closed_form) return theta_jet_exact(z0, order);
  require_in_chart(z0);
  const int n = impl_->n;
  std::vector<WirtingerJet> out;
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s) {
      auto theta_c = impl_->theta_c;
      PhiC entry = [theta_c, r, s](std::span<const cplx> z) { return theta_c(z)(r, s); };
      out.push_back(fd_jet(entry, z0, order, impl_->chart));
    }
  return out;
}

// ---------------------------------------------------------------------------

ChartFunction ChartFunction::weight() {
  ChartFunction f;
  f.kind_ = Kind::weight;
  return f;
}

ChartFunction ChartFunction::log_v_theta() {
  ChartFunction f;
  f.kind_ = Kind::log_v_theta;
  return f;
}

ChartFunction ChartFunction::theta_entry(int j, int k) {
  ChartFunction f;
  f.kind_ = Kind::theta_entry;
  f.j_ = j;
  f.k_ = k;
  return f;
}

ChartFunction ChartFunction::expression(Expression e) {
  ChartFunction f;
  f.kind_ = Kind::expression;
  f.expr_ = std::move(e);
  return f;
}

ChartFunction ChartFunction::constant(cplx c) {
  ChartFunction f;
  f.kind_ = Kind::constant;
  f.c_ = c;
  return f;
}

cplx ChartFunction::value(const ModelGeometry& g, std::span<const cplx> z) const {
  switch (kind_) {
    case Kind::weight: return g.phi(z);
    case Kind::log_v_theta: return std::log(g.theta(z).determinant());
    case Kind::theta_entry: return g.theta(z)(j_, k_);
    case Kind::expression: return expr_.eval(z);
    case Kind::constant: return c_;
  }
  return 0.0;
}

WirtingerJet ChartFunction::exact_jet(const ModelGeometry& g, std::span<const cplx> z0, int order) const {
  switch (kind_) {
    case Kind::weight: return g.phi_jet_exact(z0, order);
    case Kind::log_v_theta: {
      auto t = g.theta_jet_exact(z0, order);
      return log(jet_det(t, g.n()));
    }
    case Kind::theta_entry: {
      if (j_ < 0 || k_ < 0 || j_ >= g.n() || k_ >= g.n()) throw Error(ErrorKind::InvalidArgument, "theta index");
      return g.theta_jet_exact(z0, order)[static_cast<std::size_t>(j_ * g.n() + k_)];
    }
    case Kind::expression: return expr_.eval_jet(z0, order);
    case Kind::constant: return WirtingerJet(static_cast<int>(z0.size()), order, c_);
  }
  return {};
}

cplx wirtinger_derivative(const ModelGeometry& g, const ChartFunction& f, std::span<const cplx> z0,
                          std::span<const int> alpha, std::span<const int> beta, int max_order) {
  g.require_in_chart(z0);
  if (static_cast<int>(alpha.size()) != g.n() || static_cast<int>(beta.size()) != g.n()) {
    throw Error(ErrorKind::InvalidArgument, "multi-index length must equal n");
  }
  int order = 0;
  for (int a : alpha) order += a;
  for (int b : beta) order += b;
  if (order > max_order) throw Error(ErrorKind::InvalidArgument, "derivative order exceeds configured maximum");
  if (g.derivative_mode() == DerivativeMode::exact_closed_form) {
    return f.exact_jet(g, z0, order).derivative(alpha, beta);
  }
  PhiC fn = [&](std::span<const cplx> z) { return f.value(g, z); };
  if (order == 0) return fn(z0);
  return fd_wirtinger_derivative(fn, z0, alpha, beta, g.chart());
}

WirtingerJet jet(const ModelGeometry& g, const ChartFunction& f, std::span<const cplx> z0, int order,
                 int max_order) {
  g.require_in_chart(z0);
  if (order < 0 || order > max_order) throw Error(ErrorKind::InvalidArgument, "jet order exceeds configured maximum");
  if (g.derivative_mode() == DerivativeMode::exact_closed_form) return f.exact_jet(g, z0, order);
  PhiC fn = [&](std::span<const cplx> z) { return f.value(g, z); };
  return fd_jet(fn, z0, order, g.chart());
}

}  // namespace bergman
