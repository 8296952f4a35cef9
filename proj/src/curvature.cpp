#include <algorithm>
#include <cmath>
#include <numbers>

#include "bergman/error.hpp"
#include "bergman/geometry.hpp"

namespace bergman {

namespace {

constexpr double kHermitianTol = 1e-12;

void require_hermitian(const CMatrix& m, const char* what) {
  const double scale = std::max(1.0, m.norm());
  if ((m - m.adjoint()).norm() > kHermitianTol * scale) {
    throw Error(ErrorKind::NotHermitian, std::string(what) + " is not Hermitian");
  }
}

CMatrix constant_matrix(const std::vector<WirtingerJet>& m, int n) {
  CMatrix out(n, n);
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s) out(r, s) = m[static_cast<std::size_t>(r * n + s)].constant();
  return out;
}

CMatrix levi_from_jet(const WirtingerJet& phi, int n) {
  CMatrix out(n, n);
  std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s) {
      std::fill(a.begin(), a.end(), 0);
      std::fill(b.begin(), b.end(), 0);
      a[static_cast<std::size_t>(r)] = 1;
      b[static_cast<std::size_t>(s)] = 1;
      out(r, s) = phi.coeff(a, b);
    }
  return out;
}

Eigen::LLT<CMatrix> theta_factor(const CMatrix& theta) {
  Eigen::LLT<CMatrix> llt(theta);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularTheta, "Theta is not positive definite");
  const RVector d = llt.matrixL().toDenseMatrix().diagonal().real();
  if (d.minCoeff() <= 1e-14 * std::max(1.0, d.maxCoeff())) {
    throw Error(ErrorKind::SingularTheta, "Theta is numerically singular");
  }
  return llt;
}

// All jets the omega-geometry needs, derived from phi and Theta jets.
struct OmegaJets {
  int n = 0;
  std::vector<WirtingerJet> w;     // omega = Phi / pi
  std::vector<WirtingerJet> winv;  // inverse of omega
  WirtingerJet log_v_omega, log_v_theta;
};

OmegaJets omega_jets(const WirtingerJet& phi, const std::vector<WirtingerJet>& theta, int n) {
  OmegaJets o;
  o.n = n;
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s) o.w.push_back(phi.d_z(r).d_zbar(s) / std::numbers::pi);
  o.winv = jet_inverse(o.w, n);
  o.log_v_omega = log(jet_det(o.w, n));
  o.log_v_theta = log(jet_det(theta, n));
  return o;
}

// -2 sum_jk (W^-1)_kj d_j dbar_k f as a jet.
WirtingerJet laplacian(const std::vector<WirtingerJet>& winv, const WirtingerJet& f, int n) {
  WirtingerJet acc(n, f.order() - 2);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) acc += winv[static_cast<std::size_t>(k * n + j)] * f.d_z(j).d_zbar(k);
  return -2.0 * acc;
}

CMatrix ddbar_at(const WirtingerJet& f, int n) {
  CMatrix out(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out(j, k) = f.d_z(j).d_zbar(k).constant();
  return out;
}

}  // namespace

std::string Stratum::label() const { return degenerate ? "degenerate" : "M(" + std::to_string(q) + ")"; }

CMatrix levi_matrix(const ModelGeometry& g, std::span<const cplx> z) {
  CMatrix l = levi_from_jet(g.phi_jet(z, 2), g.n());
  require_hermitian(l, "Levi form");
  return l;
}

CMatrix curvature_endomorphism(const ModelGeometry& g, std::span<const cplx> z) {
  CMatrix theta = g.theta(z);
  require_hermitian(theta, "Theta");
  auto llt = theta_factor(theta);
  return 2.0 * llt.solve(levi_matrix(g, z));
}

StratumInfo classify_stratum(const CMatrix& levi, const CMatrix& theta, double tau) {
  auto llt = theta_factor(theta);
  CMatrix lower = llt.matrixL();
  // C^-1 (2 Phi) C^-H is Hermitian with the generalized eigenvalues.
  CMatrix m = lower.triangularView<Eigen::Lower>().solve(2.0 * levi);
  m = lower.triangularView<Eigen::Lower>().solve(m.adjoint().eval()).adjoint();
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  StratumInfo info;
  info.eigenvalues = es.eigenvalues();
  const double scale = std::max(1.0, info.eigenvalues.cwiseAbs().maxCoeff());
  const double thr = tau * scale;
  info.stratum.degenerate = info.eigenvalues.cwiseAbs().minCoeff() <= thr;
  info.stratum.q = static_cast<int>((info.eigenvalues.array() < -thr).count());
  return info;
}

StratumInfo classify_stratum(const ModelGeometry& g, std::span<const cplx> z, double tau) {
  CMatrix theta = g.theta(z);
  require_hermitian(theta, "Theta");
  return classify_stratum(levi_matrix(g, z), theta, tau);
}

namespace {

CurvatureReport build_report(const ModelGeometry& g, std::span<const cplx> z, double tau, bool strict) {
  const int n = g.n();
  g.require_in_chart(z);
  const WirtingerJet phi = g.phi_jet(z, 6);
  const std::vector<WirtingerJet> theta = g.theta_jet(z, 4);

  CurvatureReport rep;
  rep.point.assign(z.begin(), z.end());
  rep.levi = levi_from_jet(phi, n);
  rep.theta = constant_matrix(theta, n);
  require_hermitian(rep.levi, "Levi form");
  require_hermitian(rep.theta, "Theta");
  auto llt = theta_factor(rep.theta);
  rep.rdot = 2.0 * llt.solve(rep.levi);
  auto info = classify_stratum(rep.levi, rep.theta, tau);
  rep.eigenvalues = info.eigenvalues;
  rep.stratum = info.stratum;
  rep.v_theta = rep.theta.determinant().real();
  rep.det_rdot = rep.eigenvalues.prod();

  const CMatrix omega = rep.levi / std::numbers::pi;
  Eigen::LLT<CMatrix> wl(omega);
  const bool positive = wl.info() == Eigen::Success && !rep.stratum.degenerate && rep.stratum.q == 0;
  if (!positive) {
    if (strict) throw Error(ErrorKind::NotPositive, "omega is not positive definite at this point");
    return rep;
  }

  OmegaJets oj = omega_jets(phi, theta, n);
  OmegaFields f;
  f.omega = omega;
  f.v_omega = omega.determinant().real();

  const WirtingerJet r = laplacian(oj.winv, oj.log_v_omega, n);
  const WirtingerJet r_hat = laplacian(oj.winv, oj.log_v_theta, n);
  f.r = r.constant().real();
  f.r_hat = r_hat.constant().real();
  f.laplacian_r = laplacian(oj.winv, r, n).constant().real();
  f.laplacian_r_hat = laplacian(oj.winv, r_hat, n).constant().real();

  f.ric = ddbar_at(oj.log_v_omega, n);
  f.rdet = ddbar_at(oj.log_v_theta, n);

  // Norms of (1,1)-forms in an omega-orthonormal frame: W0 = L L^H.
  const CMatrix lw = wl.matrixL();
  auto normalize = [&](const CMatrix& a) {
    CMatrix t = lw.triangularView<Eigen::Lower>().solve(a);
    return lw.triangularView<Eigen::Lower>().solve(t.adjoint().eval()).adjoint().eval();
  };
  const CMatrix ric_t = normalize(f.ric);
  const CMatrix rdet_t = normalize(f.rdet);
  f.ric_norm2 = ric_t.squaredNorm();
  f.rdet_norm2 = rdet_t.squaredNorm();
  f.ric_rdet_pairing = (ric_t.array() * rdet_t.conjugate().array()).sum().real();

  // Chern curvature of h = W^T: Gamma_{jk,m} = sum_l hinv_jl d_m h_lk, K = dbar_p Gamma.
  const auto idx = [n](int a, int b) { return static_cast<std::size_t>(a * n + b); };
  std::vector<cplx> kt(static_cast<std::size_t>(n * n * n * n));
  auto kidx = [n](int j, int k, int m, int p) { return static_cast<std::size_t>(((j * n + k) * n + m) * n + p); };
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int m = 0; m < n; ++m) {
        WirtingerJet gamma(n, oj.w.front().order() - 1);
        for (int l = 0; l < n; ++l) {
          // hinv_jl = winv_lj, h_lk = w_kl
          gamma += oj.winv[idx(l, j)] * oj.w[idx(k, l)].d_z(m);
        }
        for (int p = 0; p < n; ++p) kt[kidx(j, k, m, p)] = gamma.d_zbar(p).constant();
      }
  const CMatrix e = lw.transpose().inverse();  // E = L^{-T}
  double rtm = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
          cplx acc = 0.0;
          for (int j = 0; j < n; ++j) {
            cplx wj = 0.0;
            for (int l = 0; l < n; ++l) wj += omega(j, l) * std::conj(e(l, t));
            if (wj == cplx{}) continue;
            for (int k = 0; k < n; ++k)
              for (int m = 0; m < n; ++m)
                for (int p = 0; p < n; ++p)
                  acc += kt[kidx(j, k, m, p)] * std::conj(e(p, a)) * e(m, b) * e(k, s) * wj;
          }
          rtm += std::norm(acc);
        }
  f.rtm_norm2 = rtm;
  rep.omega = std::move(f);
  return rep;
}

}  // namespace

CurvatureReport curvature_report(const ModelGeometry& g, std::span<const cplx> z, double tau) {
  return build_report(g, z, tau, true);
}

CurvatureReport curvature_report_partial(const ModelGeometry& g, std::span<const cplx> z, double tau) {
  return build_report(g, z, tau, false);
}

ScalarCurvatureJets scalar_curvature_jets(const ModelGeometry& g, std::span<const cplx> z, int order) {
  const int n = g.n();
  const WirtingerJet phi = g.phi_jet(z, order + 4);
  const std::vector<WirtingerJet> theta = g.theta_jet(z, order + 2);
  OmegaJets oj = omega_jets(phi, theta, n);
  ScalarCurvatureJets out;
  out.r = laplacian(oj.winv, oj.log_v_omega, n).truncated(order);
  out.r_hat = laplacian(oj.winv, oj.log_v_theta, n).truncated(order);
  // det Rdot = 2^n det Phi / det Theta = (2 pi)^n V_omega / V_Theta
  out.det_rdot = (std::pow(2.0 * std::numbers::pi, n) * exp(oj.log_v_omega - oj.log_v_theta)).truncated(order);
  return out;
}

}  // namespace bergman
