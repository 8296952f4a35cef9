#include "bergman/exact.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "bergman/error.hpp"
#include "parallel.hpp"
#include "radial_moments.hpp"

namespace bergman {

namespace {

constexpr double pi = std::numbers::pi;
using detail::RadialMoments;
using detail::RadialProfile;
using detail::parallel_for;
using CVector = Eigen::VectorXcd;

double ill_conditioned_limit() { return 1.0 / (100.0 * std::numeric_limits<double>::epsilon()); }

struct GaussRule {
  std::vector<double> x, w;  // on [-1, 1]
};

const GaussRule& gauss20() {
  static const GaussRule rule = [] {
    using G = boost::math::quadrature::gauss<double, 20>;
    GaussRule r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.x.push_back(a[i]);
      r.w.push_back(w[i]);
      if (a[i] != 0.0) {
        r.x.push_back(-a[i]);
        r.w.push_back(w[i]);
      }
    }
    return r;
  }();
  return rule;
}

// Rotation-invariant profile of an n = 1 geometry, or nullopt.
std::optional<RadialProfile> radial_profile(const ModelGeometry& g, int k, int axis) {
  const auto& p = g.params();
  RadialProfile prof;
  switch (g.family()) {
    case Family::fock: {
      const double l = p.lambda[static_cast<std::size_t>(axis)];
      prof.phi = [l](double t) { return l * t; };
      prof.log_v = [](double) { return 0.0; };
      prof.empty = !(l > 0.0);
      return prof;
    }
    case Family::cp1_fs: {
      if (!g.polyradial()) return std::nullopt;
      const double m = p.degree, eps = p.eps, w2 = p.width * p.width;
      prof.phi = [m, eps, w2](double t) { return 0.5 * m * std::log1p(t) + eps * std::exp(-t / w2); };
      prof.log_v = [](double t) { return -2.0 * std::log1p(t); };
      prof.max_index = p.degree * k;
      prof.empty = prof.max_index < 0;
      return prof;
    }
    case Family::radial: {
      const auto c = p.radial;
      prof.phi = [c](double t) {
        double acc = 0.0;
        for (std::size_t j = c.size(); j-- > 0;) acc = (acc + c[j]) * t;
        return acc;
      };
      prof.log_v = [](double) { return 0.0; };
      std::size_t last = c.size();
      while (last > 0 && c[last - 1] == 0.0) --last;
      prof.empty = last == 0 || c[last - 1] < 0.0;
      return prof;
    }
    case Family::chart_expression: {
      if (g.n() != 1 || !p.rotation_invariant) return std::nullopt;
      prof.phi = [g](double t) { return g.phi(Point{std::sqrt(t)}); };
      prof.log_v = [g](double t) { return std::log(g.v_theta(Point{std::sqrt(t)})); };
      const double r = g.chart().radius;
      prof.t_max = r * r;
      return prof;
    }
    case Family::torus:
      return std::nullopt;
  }
  return std::nullopt;
}

// Weighted torus theta sections for N = k d.
void torus_sections(cplx tau, int N, cplx z, CVector& out) {
  out.resize(N);
  const double ti = tau.imag(), tr = tau.real();
  const double x = z.real(), y = z.imag();
  const int spread = static_cast<int>(std::ceil(std::sqrt(40.0 / (pi * N * ti)))) + 2;
  for (int j = 0; j < N; ++j) {
    const double shift = static_cast<double>(j) / N;
    const int m0 = static_cast<int>(std::lround(-y / ti - shift));
    cplx acc = 0.0;
    for (int m = m0 - spread; m <= m0 + spread; ++m) {
      const double a = m + shift;
      const double u = a * ti + y;
      const double mag = -pi * N * u * u / ti;
      const double ph = pi * tr * N * a * a + 2.0 * pi * N * a * x;
      acc += std::exp(mag) * std::polar(1.0, std::fmod(ph, 2.0 * pi));
    }
    out(j) = acc;
  }
}

}  // namespace

struct BergmanKernel::Impl {
  explicit Impl(ModelGeometry geometry) : g(std::move(geometry)) {}

  ModelGeometry g;
  int k = 0;
  QuadSpec quad;
  SectionBasis basis;
  QuadratureMeta meta;
  double cond = 1.0;
  double log10_raw = 0.0;
  bool zero = false;  // empty section space

  std::vector<std::unique_ptr<RadialMoments>> axes;

  // Dense paths: equilibrated Gram D G D and the section vector.
  CMatrix gram;
  RVector dscale;
  Eigen::LDLT<CMatrix> ldlt;
  std::vector<double> ref_log;  // monomial reference normalization
  int torus_n = 0;

  void sections(cplx z, CVector& v) const {
    if (basis.kind == BasisKind::torus_theta) {
      torus_sections(g.params().tau, torus_n, z, v);
    } else {
      const int size = static_cast<int>(ref_log.size());
      v.resize(size);
      const double wlog = -k * g.phi(Point{z});
      const double lr = std::log(std::abs(z));
      const double th = std::arg(z);
      for (int a = 0; a < size; ++a) {
        if (z == 0.0) {
          v(a) = a == 0 ? std::exp(wlog - 0.5 * ref_log[0]) : 0.0;
        } else {
          v(a) = std::exp(a * lr - 0.5 * ref_log[static_cast<std::size_t>(a)] + wlog) * std::polar(1.0, a * th);
        }
      }
    }
    v *= quad.section_gauge;
  }

  cplx dense_kernel(cplx z, cplx w) const {
    CVector vz, vw;
    sections(z, vz);
    sections(w, vw);
    vz = dscale.asDiagonal() * vz;
    vw = dscale.asDiagonal() * vw;
    return vw.dot(ldlt.solve(vz));
  }

  cplx kernel(std::span<const cplx> z, std::span<const cplx> w) const {
    if (static_cast<int>(z.size()) != g.n() || static_cast<int>(w.size()) != g.n()) {
      throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
    }
    if (basis.kind != BasisKind::torus_theta) {
      g.require_in_chart(z);
      g.require_in_chart(w);
    }
    if (zero) return 0.0;
    if (basis.kind == BasisKind::polyradial) {
      cplx acc = 1.0;
      for (std::size_t j = 0; j < axes.size(); ++j) acc *= axes[j]->sum(z[j], w[j]).value;
      return acc;
    }
    return dense_kernel(z[0], w[0]);
  }

  void build_polyradial();
  void build_dense_monomial();
  void build_torus();
  CMatrix assemble_disk(int panels) const;
  CMatrix assemble_torus(int nodes) const;
  void factor(const CMatrix& g_raw);
};

void BergmanKernel::Impl::build_polyradial() {
  basis.kind = BasisKind::polyradial;
  const int n = g.n();
  for (int j = 0; j < n; ++j) {
    auto prof = radial_profile(g, k, j);
    if (prof->empty) {
      zero = true;
      axes.clear();
      break;
    }
    axes.push_back(std::make_unique<RadialMoments>(std::move(*prof), k, quad.tol));
  }
  meta.rule = "adaptive Gauss-Kronrod (radial moments)";
  meta.order = 31;
  if (zero) {
    basis.truncation_bound = -1;
    return;
  }
  const auto& p = g.params();
  const double R = quad.radius;
  if (g.family() == Family::fock) {
    double lmax = 0.0, lead = 1.0;
    for (double l : p.lambda) {
      lmax = std::max(lmax, l);
      lead *= k * l / pi;
    }
    const int N = static_cast<int>(std::ceil(6.0 * k * lmax * R * R)) + 10;
    basis.truncation_bound = N;
    basis.unbounded = true;
    double tail = 0.0;
    for (double l : p.lambda) tail += boost::math::gamma_p(N + 1.0, 2.0 * k * l * R * R);
    basis.tail_bound = lead * tail;
  } else if (axes[0]->profile().max_index >= 0) {
    basis.truncation_bound = axes[0]->profile().max_index;
  } else {
    basis.unbounded = true;
    double r = R;
    if (std::isfinite(axes[0]->profile().t_max)) r = std::min(r, 0.99 * std::sqrt(axes[0]->profile().t_max));
    auto s = axes[0]->sum(r, r);
    basis.truncation_bound = s.terms - 1;
    basis.tail_bound = s.tail;
  }
  if (n == 1) {
    for (int m = 0; m <= basis.truncation_bound; ++m) basis.exponents.push_back({m});
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int m = 0; m <= basis.truncation_bound; ++m) {
      const double v = axes[0]->log_moment(m);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    log10_raw = (hi - lo) / std::log(10.0);
  }
  double err = 0.0;
  for (const auto& a : axes) err = std::max(err, a->max_relative_error());
  meta.error_estimate = err + basis.tail_bound;
}

CMatrix BergmanKernel::Impl::assemble_disk(int panels) const {
  const auto& rule = gauss20();
  const int nb = static_cast<int>(ref_log.size());
  const double radius = g.chart().radius;
  const bool plane = !std::isfinite(radius);
  int ntheta = quad.theta_nodes;
  if (ntheta <= 0) ntheta = plane ? 2 * (nb - 1) + 32 : 2 * (nb - 1) + 64;
  const int rings = static_cast<int>(rule.x.size());

  std::vector<CMatrix> partial(static_cast<std::size_t>(panels));
  parallel_for(panels, quad.threads, [&](int p) {
    CMatrix A(static_cast<Eigen::Index>(rings) * ntheta, nb);
    CVector v;
    const double u0 = static_cast<double>(p) / panels, du = 1.0 / panels;
    for (int i = 0; i < rings; ++i) {
      const double u = u0 + 0.5 * du * (rule.x[static_cast<std::size_t>(i)] + 1.0);
      const double wu = 0.5 * du * rule.w[static_cast<std::size_t>(i)];
      double r, jac;
      if (plane) {
        r = u / (1.0 - u);
        jac = 1.0 / ((1.0 - u) * (1.0 - u));
      } else {
        r = u * radius;
        jac = radius;
      }
      for (int t = 0; t < ntheta; ++t) {
        const cplx z = std::polar(r, 2.0 * pi * t / ntheta);
        sections(z, v);
        const double w = wu * jac * r * (2.0 * pi / ntheta) * 2.0 * g.v_theta(Point{z});
        A.row(static_cast<Eigen::Index>(i) * ntheta + t) = std::sqrt(w) * v.transpose();
      }
    }
    partial[static_cast<std::size_t>(p)] = A.adjoint() * A;
  });
  CMatrix M = CMatrix::Zero(nb, nb);
  for (const auto& P : partial) M += P;
  CMatrix G = M.conjugate();
  return 0.5 * (G + G.adjoint());
}

CMatrix BergmanKernel::Impl::assemble_torus(int nodes) const {
  const cplx tau = g.params().tau;
  const int N = torus_n;
  std::vector<CMatrix> partial(static_cast<std::size_t>(nodes));
  parallel_for(nodes, quad.threads, [&](int ib) {
    CMatrix A(nodes, N);
    CVector v;
    const double b = static_cast<double>(ib) / nodes;
    for (int ia = 0; ia < nodes; ++ia) {
      const double a = static_cast<double>(ia) / nodes;
      torus_sections(tau, N, a + b * tau, v);
      const double w = 2.0 * tau.imag() / (static_cast<double>(nodes) * nodes);
      A.row(ia) = std::sqrt(w) * v.transpose();
    }
    partial[static_cast<std::size_t>(ib)] = A.adjoint() * A;
  });
  CMatrix M = CMatrix::Zero(N, N);
  for (const auto& P : partial) M += P;
  CMatrix G = M.conjugate();
  return 0.5 * (G + G.adjoint());
}

void BergmanKernel::Impl::factor(const CMatrix& g_raw) {
  gram = g_raw;
  const Eigen::Index nb = g_raw.rows();
  dscale.resize(nb);
  for (Eigen::Index i = 0; i < nb; ++i) {
    const double d = g_raw(i, i).real();
    if (!(d > 0.0)) throw Error(ErrorKind::IllConditioned, "Gram diagonal is not positive");
    dscale(i) = 1.0 / std::sqrt(d);
  }
  CMatrix scaled = dscale.asDiagonal() * g_raw * dscale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(scaled, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<CMatrix> raw(g_raw, Eigen::EigenvaluesOnly);
  const double rlo = raw.eigenvalues().minCoeff(), rhi = raw.eigenvalues().maxCoeff();
  log10_raw = rlo > 0.0 ? std::log10(rhi / rlo) : std::numeric_limits<double>::infinity();
  if (!(cond <= ill_conditioned_limit())) {
    throw Error(ErrorKind::IllConditioned, "Gram condition number " + std::to_string(cond));
  }
  ldlt.compute(scaled);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().real().minCoeff() > 0.0)) {
    throw Error(ErrorKind::IllConditioned, "Gram matrix is not positive definite");
  }
}

void BergmanKernel::Impl::build_dense_monomial() {
  basis.kind = BasisKind::dense_monomial;
  int degree;
  if (g.family() == Family::cp1_fs) {
    degree = g.params().degree * k;
    if (degree < 0) {
      zero = true;
      basis.truncation_bound = -1;
      return;
    }
    // Normalize by the unperturbed Fubini-Study moments 2 pi a! (D-a)! / (D+1)!.
    for (int a = 0; a <= degree; ++a) {
      ref_log.push_back(std::log(2.0 * pi) + std::lgamma(a + 1.0) + std::lgamma(degree - a + 1.0) -
                        std::lgamma(degree + 2.0));
    }
  } else {
    const double radius = g.chart().radius;
    if (!std::isfinite(radius)) {
      throw Error(ErrorKind::UnsupportedFamily, "generic chart weights need a finite chart radius");
    }
    degree = quad.max_degree;
    for (int a = 0; a <= degree; ++a) ref_log.push_back(2.0 * a * std::log(radius));
  }
  basis.truncation_bound = degree;
  for (int a = 0; a <= degree; ++a) basis.exponents.push_back({a});

  auto probe_values = [&](const Impl& self) {
    std::vector<double> out;
    const double r = std::min(2.0, 0.9 * g.chart().radius);
    for (cplx z : {cplx(0.0), std::polar(0.5 * r, 1.0), std::polar(r, -2.0)}) {
      if (!g.chart().contains(Point{z})) continue;
      out.push_back(self.dense_kernel(z, z).real());
    }
    return out;
  };

  int panels = std::max(1, quad.panels);
  CMatrix coarse = assemble_disk(panels);
  for (;;) {
    CMatrix fine = assemble_disk(2 * panels);
    double est = 0.0;
    for (Eigen::Index a = 0; a < fine.rows(); ++a)
      for (Eigen::Index b = 0; b < fine.cols(); ++b)
        est = std::max(est, std::abs(fine(a, b) - coarse(a, b)) / std::sqrt(fine(a, a).real() * fine(b, b).real()));
    if (est <= quad.dense_tol) {
      Impl low(g);
      low.k = k;
      low.quad = quad;
      low.basis = basis;
      low.ref_log = ref_log;
      low.factor(coarse);
      factor(fine);
      const auto pl = probe_values(low), ph = probe_values(*this);
      double pdiff = 0.0;
      for (std::size_t i = 0; i < pl.size(); ++i) pdiff = std::max(pdiff, std::abs(pl[i] - ph[i]) / std::max(1.0, ph[i]));
      meta.error_estimate = std::max(est, pdiff) + 100.0 * std::numeric_limits<double>::epsilon() * cond;
      meta.order = 20 * 2 * panels;
      meta.rule = "tensor Gauss-Legendre (radial panels) x trapezoid (angle)";
      return;
    }
    panels *= 2;
    if (panels > quad.max_panels) {
      throw Error(ErrorKind::QuadratureNotConverged, "Gram refinement estimate " + std::to_string(est));
    }
    coarse = std::move(fine);
  }
}

void BergmanKernel::Impl::build_torus() {
  basis.kind = BasisKind::torus_theta;
  torus_n = k * g.params().torus_degree;
  if (torus_n <= 0) {
    zero = true;
    basis.truncation_bound = -1;
    return;
  }
  for (int j = 0; j < torus_n; ++j) basis.exponents.push_back({j});
  basis.truncation_bound = torus_n - 1;
  int nodes = quad.theta_nodes > 0 ? quad.theta_nodes : 4 * torus_n + 32;
  CMatrix coarse = assemble_torus(nodes / 2);
  CMatrix fine = assemble_torus(nodes);
  double est = 0.0;
  for (Eigen::Index a = 0; a < fine.rows(); ++a)
    for (Eigen::Index b = 0; b < fine.cols(); ++b)
      est = std::max(est, std::abs(fine(a, b) - coarse(a, b)) / std::sqrt(fine(a, a).real() * fine(b, b).real()));
  factor(fine);
  meta.rule = "periodic trapezoid on the fundamental domain";
  meta.order = nodes;
  meta.error_estimate = est + 100.0 * std::numeric_limits<double>::epsilon() * cond;
}

BergmanKernel::BergmanKernel(const ModelGeometry& g, int k, const QuadSpec& quad) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 0");
  if (!(quad.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "quadrature radius must be positive");
  if (quad.section_gauge == 0.0) throw Error(ErrorKind::InvalidArgument, "section gauge must be nonzero");
  auto impl = std::make_shared<Impl>(g);
  impl->k = k;
  impl->quad = quad;
  impl->basis.k = k;
  if (g.family() == Family::torus) {
    impl->build_torus();
  } else if (g.family() == Family::fock || radial_profile(g, k, 0).has_value()) {
    impl->build_polyradial();
  } else if (g.n() == 1) {
    impl->build_dense_monomial();
  } else {
    throw Error(ErrorKind::UnsupportedFamily, "no section basis for this geometry");
  }
  impl_ = std::move(impl);
}

const ModelGeometry& BergmanKernel::geometry() const noexcept { return impl_->g; }
int BergmanKernel::k() const noexcept { return impl_->k; }
const SectionBasis& BergmanKernel::basis() const noexcept { return impl_->basis; }
const QuadratureMeta& BergmanKernel::quadrature() const noexcept { return impl_->meta; }
double BergmanKernel::cond() const noexcept { return impl_->cond; }
double BergmanKernel::log10_cond_raw() const noexcept { return impl_->log10_raw; }

CMatrix BergmanKernel::gram() const {
  const auto& im = *impl_;
  if (im.zero) return CMatrix(0, 0);
  if (im.basis.kind == BasisKind::torus_theta) return im.gram;
  if (im.basis.kind == BasisKind::dense_monomial) {
    // Undo the reference normalization of the monomials.
    const Eigen::Index nb = im.gram.rows();
    CMatrix G(nb, nb);
    for (Eigen::Index a = 0; a < nb; ++a)
      for (Eigen::Index b = 0; b < nb; ++b) {
        const double s = std::exp(0.5 * im.ref_log[static_cast<std::size_t>(a)]) *
                         std::exp(0.5 * im.ref_log[static_cast<std::size_t>(b)]);
        G(a, b) = im.gram(a, b) * s;
      }
    return G;
  }
  if (im.g.n() != 1) throw Error(ErrorKind::InvalidArgument, "dense Gram export is only available for n = 1");
  const int N = im.basis.truncation_bound;
  CMatrix G = CMatrix::Zero(N + 1, N + 1);
  for (int m = 0; m <= N; ++m) G(m, m) = std::exp(im.axes[0]->log_moment(m));
  return G;
}

double BergmanKernel::value(std::span<const cplx> z) const { return impl_->kernel(z, z).real(); }

double BergmanKernel::offdiag_modulus(std::span<const cplx> z, std::span<const cplx> w) const {
  return std::abs(impl_->kernel(z, w));
}

std::vector<double> BergmanKernel::values(const std::vector<Point>& points, int threads) const {
  std::vector<double> out(points.size());
  parallel_for(static_cast<int>(points.size()), threads,
               [&](int i) { out[static_cast<std::size_t>(i)] = value(points[static_cast<std::size_t>(i)]); });
  return out;
}

SectionBasis section_basis(const ModelGeometry& g, int k, const QuadSpec& quad) {
  return BergmanKernel(g, k, quad).basis();
}

GramMatrix gram_matrix(const ModelGeometry& g, int k, const QuadSpec& quad) {
  BergmanKernel K(g, k, quad);
  GramMatrix out;
  out.gram = K.gram();
  out.cond = K.cond();
  out.log10_cond_raw = K.log10_cond_raw();
  out.meta = K.quadrature();
  return out;
}

double bergman_kernel_function(const BergmanKernel& kernel, std::span<const cplx> z) { return kernel.value(z); }

double offdiag_modulus(const BergmanKernel& kernel, std::span<const cplx> z, std::span<const cplx> w) {
  return kernel.offdiag_modulus(z, w);
}

double closed_form_kernel(const ModelGeometry& g, int k, std::span<const cplx> z) {
  if (static_cast<int>(z.size()) != g.n()) throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 0");
  g.require_in_chart(z);
  const auto& p = g.params();
  switch (g.family()) {
    case Family::fock: {
      double v = 1.0;
      for (double l : p.lambda) v *= l > 0.0 ? k * l / pi : 0.0;
      return v;
    }
    case Family::cp1_fs:
      if (p.eps != 0.0) throw Error(ErrorKind::UnsupportedFamily, "no closed form with a bump perturbation");
      return std::max(p.degree * k + 1, 0) / (2.0 * pi);
    default:
      throw Error(ErrorKind::UnsupportedFamily, std::string("no closed-form kernel for ") + to_string(g.family()));
  }
}

double eikonal_residual(const ModelGeometry& g, int psi_jet_order, std::span<const cplx> z, std::span<const cplx> w,
                        double delta) {
  if (g.family() != Family::fock) throw Error(ErrorKind::UnsupportedFamily, "phase function is only built for fock");
  if (psi_jet_order < 2) throw Error(ErrorKind::JetOrderTooLow, "phase jet needs order >= 2");
  const int n = g.n();
  if (static_cast<int>(z.size()) != n || static_cast<int>(w.size()) != n) {
    throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
  }
  const auto& lam = g.params().lambda;
  double rho = 0.0;
  for (int j = 0; j < n; ++j) rho += std::norm(z[j] - w[j]);
  const double pert = 1.5 * delta * std::sqrt(rho);
  const cplx I(0.0, 1.0);
  cplx total = 0.0;
  for (int j = 0; j < n; ++j) {
    const double l = lam[static_cast<std::size_t>(j)];
    const cplx d = z[j] - w[j];
    const cplx psi_zb = I * std::abs(l) * d + I * l * w[j] + pert * d;
    const cplx psi_z = I * std::abs(l) * std::conj(d) - I * l * std::conj(w[j]) + pert * std::conj(d);
    const cplx phi_zb = l * z[j], phi_z = l * std::conj(z[j]);
    total += (I * psi_zb + phi_zb) * (-I * psi_z + phi_z);
  }
  return std::abs(total);
}

KernelEvaluation evaluate_kernel(const ModelGeometry& g, int k, const std::vector<Point>& points,
                                 const QuadSpec& quad, const std::vector<std::pair<Point, Point>>& pairs) {
  BergmanKernel K(g, k, quad);
  KernelEvaluation out;
  out.k = k;
  out.points = points;
  out.values = K.values(points, quad.threads);
  out.offdiag_values.resize(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), quad.threads, [&](int i) {
    const auto& [z, w] = pairs[static_cast<std::size_t>(i)];
    out.offdiag_values[static_cast<std::size_t>(i)] = K.offdiag_modulus(z, w);
  });
  if (g.n() == 1) out.gram = K.gram();
  out.cond = K.cond();
  out.quadrature_meta = K.quadrature();
  out.basis = K.basis();
  return out;
}

}  // namespace bergman
