#include "bergman/coeffs.hpp"

#include <cmath>
#include <numbers>

#include "bergman/error.hpp"

namespace bergman {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kNormalFormTol = 1e-10;

const OmegaFields& require_m0(const CurvatureReport& rep) {
  if (rep.stratum != Stratum{false, 0}) {
    throw Error(ErrorKind::StratumMismatch, "coefficient needs M(0), point is in " + rep.stratum.label());
  }
  if (!rep.omega) throw Error(ErrorKind::NotPositive, "report lacks omega fields");
  return *rep.omega;
}

double prefactor(const CurvatureReport& rep) {
  return rep.det_rdot / std::pow(2.0 * pi, static_cast<double>(rep.rdot.rows()));
}

}  // namespace

B0Result b0_coeff(const CurvatureReport& rep, int q) {
  const int n = static_cast<int>(rep.rdot.rows());
  if (q < 0 || q > n) throw Error(ErrorKind::InvalidArgument, "q out of range");
  if (rep.stratum != Stratum{false, q}) {
    throw Error(ErrorKind::StratumMismatch, "requested M(" + std::to_string(q) + "), point is in " + rep.stratum.label());
  }
  B0Result out;
  out.b0 = std::abs(prefactor(rep));
  const CMatrix off = rep.rdot - CMatrix(rep.rdot.diagonal().asDiagonal());
  if (off.norm() == 0.0) {
    for (int j = 0; j < n; ++j)
      if (rep.rdot(j, j).real() < 0.0) out.negative_directions.push_back(j);
  } else {
    for (int j = 0; j < q; ++j) out.negative_directions.push_back(j);
  }
  return out;
}

double b1_coeff(const CurvatureReport& rep) {
  const auto& f = require_m0(rep);
  return prefactor(rep) * (f.r_hat / (4 * pi) - f.r / (8 * pi));
}

double b2_coeff(const CurvatureReport& rep) {
  const auto& f = require_m0(rep);
  const double p2 = pi * pi;
  const double bracket = f.r * f.r / (128 * p2) - f.r * f.r_hat / (32 * p2) + f.r_hat * f.r_hat / (32 * p2) -
                         f.laplacian_r_hat / (32 * p2) - f.rdet_norm2 / (8 * p2) + f.ric_rdet_pairing / (8 * p2) +
                         f.laplacian_r / (96 * p2) - f.ric_norm2 / (24 * p2) + f.rtm_norm2 / (96 * p2);
  return prefactor(rep) * bracket;
}

KmCoefficients b_km_coeffs(const CurvatureReport& rep) {
  const auto& f = require_m0(rep);
  const double p = prefactor(rep);
  const double p2 = pi * pi;
  KmCoefficients k;
  k.b0_km = p;
  k.b1_km = p * (-f.r / (8 * pi));
  k.b2_km = p * (f.r * f.r / (128 * p2) + f.laplacian_r / (96 * p2) - f.ric_norm2 / (24 * p2) + f.rtm_norm2 / (96 * p2));
  return k;
}

MorseRhs local_morse_rhs(const CurvatureReport& rep, int k, int q) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  const int n = static_cast<int>(rep.rdot.rows());
  MorseRhs out;
  if (rep.stratum != Stratum{false, q}) return out;
  const double kn = std::pow(static_cast<double>(k), n);
  const double b0 = std::abs(prefactor(rep));
  out.leading = b0 * kn;
  if (q == 0 && rep.omega) out.refined = b0 * kn + b1_coeff(rep) * kn / k + b2_coeff(rep) * kn / (double(k) * k);
  return out;
}

CoefficientSet coefficient_set(const ModelGeometry& g, std::span<const cplx> z, int q, double tau) {
  auto rep = curvature_report_partial(g, z, tau);
  CoefficientSet c;
  c.point.assign(z.begin(), z.end());
  c.q = q;
  auto b0 = b0_coeff(rep, q);
  c.b0 = b0.b0;
  c.negative_directions = b0.negative_directions;
  if (q == 0 && rep.omega) {
    c.b1 = b1_coeff(rep);
    c.b2 = b2_coeff(rep);
    auto km = b_km_coeffs(rep);
    c.b0_km = km.b0_km;
    c.b1_km = km.b1_km;
    c.b2_km = km.b2_km;
  }
  return c;
}

// ---------------------------------------------------------------------------

namespace {

struct RecursionData {
  int n = 0;
  double f = 0.0;             // (2 pi)^n / det Rdot(0)
  WirtingerJet phi1;          // phi minus its diagonal quadratic part
  WirtingerJet vtheta;
  WirtingerJet b0_hol, b0_anti;
  std::vector<double> lambda;
};

RecursionData prepare(const WirtingerJet& phi, const WirtingerJet& vtheta, std::span<const double> lambda,
                      int phi_order, int vtheta_order) {
  const int n = phi.n();
  if (phi.order() < phi_order) {
    throw Error(ErrorKind::JetOrderTooLow, "weight jet needs order >= " + std::to_string(phi_order));
  }
  if (vtheta.order() < vtheta_order) {
    throw Error(ErrorKind::JetOrderTooLow, "V_Theta jet needs order >= " + std::to_string(vtheta_order));
  }
  if (static_cast<int>(lambda.size()) != n || vtheta.n() != n) {
    throw Error(ErrorKind::InvalidArgument, "dimension mismatch between jets and lambda");
  }
  double lmax = 1.0;
  for (double l : lambda) {
    if (!(l > 0.0)) throw Error(ErrorKind::NotNormalForm, "stationary phase needs positive lambda");
    lmax = std::max(lmax, l);
  }
  const double tol = kNormalFormTol * lmax;
  if (std::abs(vtheta.constant() - 1.0) > tol) throw Error(ErrorKind::NotNormalForm, "V_Theta(0) must be 1");

  RecursionData d;
  d.n = n;
  d.lambda.assign(lambda.begin(), lambda.end());
  d.phi1 = phi;
  const auto& lay = phi.layout();
  auto c = d.phi1.coefficients();
  c[0] = 0.0;  // an additive constant in the weight is a gauge choice
  for (std::size_t i = 1; i < lay.size(); ++i) {
    auto e = lay.exponent(i);
    int a = 0, b = 0, diag = -1;
    for (int j = 0; j < n; ++j) {
      a += e[static_cast<std::size_t>(j)];
      b += e[static_cast<std::size_t>(n + j)];
    }
    if (a == 1 && b == 1) {
      for (int j = 0; j < n; ++j)
        if (e[static_cast<std::size_t>(j)] == 1 && e[static_cast<std::size_t>(n + j)] == 1) diag = j;
    }
    cplx expect = diag >= 0 ? cplx(lambda[static_cast<std::size_t>(diag)]) : cplx(0.0);
    const bool low = a <= 1 || b <= 1;
    if (low) {
      if (std::abs(c[i] - expect) > tol) {
        throw Error(ErrorKind::NotNormalForm, "weight jet has a forbidden low-order coefficient");
      }
      c[i] = 0.0;
    }
  }
  d.vtheta = vtheta;

  // b0 on the diagonal: (2 pi)^-n 2^n det Phi / V_Theta.
  std::vector<WirtingerJet> levi;
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s) levi.push_back(phi.d_z(r).d_zbar(s));
  WirtingerJet b0 = jet_det(levi, n) / vtheta * std::pow(1.0 / pi, n);
  d.b0_hol = b0.holomorphic_part();
  d.b0_anti = b0.antiholomorphic_part();

  double det_rdot = 1.0;
  for (double l : lambda) det_rdot *= 2.0 * l;
  d.f = std::pow(2.0 * pi, n) / det_rdot;
  return d;
}

cplx lap_pow_at0(const WirtingerJet& a, std::span<const double> lambda, int power) {
  WirtingerJet x = a.truncated(2 * power);
  for (int i = 0; i < power; ++i) x = laplace0(x, lambda);
  return x.constant();
}

}  // namespace

double b1_via_stationary_phase(const WirtingerJet& phi_jet, const WirtingerJet& vtheta_jet,
                               std::span<const double> lambda) {
  auto d = prepare(phi_jet, vtheta_jet, lambda, 4, 2);
  const WirtingerJet x = d.vtheta * d.b0_anti * d.b0_hol;
  cplx bracket = 0.5 * lap_pow_at0(x, d.lambda, 1) - 0.25 * lap_pow_at0(d.phi1 * x, d.lambda, 2);
  return (-d.f * bracket).real();
}

double b2_via_stationary_phase(const WirtingerJet& phi_jet, const WirtingerJet& vtheta_jet,
                               std::span<const double> lambda, const WirtingerJet& b1_diag_jet) {
  auto d = prepare(phi_jet, vtheta_jet, lambda, 8, 6);
  if (b1_diag_jet.order() < 4) throw Error(ErrorKind::JetOrderTooLow, "b1 diagonal jet needs order >= 4");
  const WirtingerJet b1_hol = b1_diag_jet.holomorphic_part();
  const WirtingerJet b1_anti = b1_diag_jet.antiholomorphic_part();
  const double b1 = b1_diag_jet.constant().real();

  const WirtingerJet x = d.vtheta * d.b0_anti * d.b0_hol;
  const WirtingerJet y = d.vtheta * (d.b0_anti * b1_hol + b1_anti * d.b0_hol);
  const auto& lam = d.lambda;
  cplx bracket = b1 * b1;
  bracket += 0.5 * lap_pow_at0(y, lam, 1);
  bracket -= 0.25 * lap_pow_at0(d.phi1 * y, lam, 2);
  bracket += 0.125 * lap_pow_at0(x, lam, 2);
  bracket -= lap_pow_at0(d.phi1 * x, lam, 3) / 24.0;
  bracket += lap_pow_at0(d.phi1 * d.phi1 * x, lam, 4) / 192.0;
  return (-d.f * bracket).real();
}

NormalFormJets normal_form_jets(const ModelGeometry& g, std::span<const cplx> z) {
  const int n = g.n();
  NormalFormJets out;
  WirtingerJet phi = g.phi_jet(z, 8);
  // Pluriharmonic terms only change the trivializing frame.
  phi = phi - phi.holomorphic_part() - phi.antiholomorphic_part();
  const auto th = g.theta_jet(z, 6);
  out.vtheta = jet_det(th, n);
  out.phi = phi;
  std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    std::fill(a.begin(), a.end(), 0);
    std::fill(b.begin(), b.end(), 0);
    a[static_cast<std::size_t>(j)] = 1;
    b[static_cast<std::size_t>(j)] = 1;
    out.lambda.push_back(phi.coeff(a, b).real());
  }
  auto sj = scalar_curvature_jets(g, z, 4);
  out.b1_diag = sj.det_rdot * (sj.r_hat / (4 * pi) - sj.r / (8 * pi)) / std::pow(2.0 * pi, n);
  return out;
}

CoefficientSet coefficient_set_stationary_phase(const ModelGeometry& g, std::span<const cplx> z) {
  auto nf = normal_form_jets(g, z);
  CoefficientSet c;
  c.point.assign(z.begin(), z.end());
  c.method = "stationary_phase";
  double det_rdot = 1.0;
  for (double l : nf.lambda) det_rdot *= 2.0 * l;
  c.b0 = det_rdot / std::pow(2.0 * pi, g.n());
  c.b1 = b1_via_stationary_phase(nf.phi, nf.vtheta, nf.lambda);
  c.b2 = b2_via_stationary_phase(nf.phi, nf.vtheta, nf.lambda, nf.b1_diag);
  return c;
}

}  // namespace bergman
