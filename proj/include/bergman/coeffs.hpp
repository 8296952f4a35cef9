#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bergman/geometry.hpp"
#include "bergman/jet.hpp"

namespace bergman {

struct CoefficientSet {
  Point point;
  int q = 0;
  double b0 = 0.0;
  std::vector<int> negative_directions;
  // q = 0 on M(0) only.
  std::optional<double> b1, b2, b0_km, b1_km, b2_km;
  std::string method = "closed_form";
};

struct B0Result {
  double b0 = 0.0;
  // Coordinate indices when Rdot is diagonal, otherwise positions in the
  // ascending eigenvalue list.
  std::vector<int> negative_directions;
};

B0Result b0_coeff(const CurvatureReport& rep, int q);
double b1_coeff(const CurvatureReport& rep);
double b2_coeff(const CurvatureReport& rep);

struct KmCoefficients {
  double b0_km = 0.0, b1_km = 0.0, b2_km = 0.0;
};
KmCoefficients b_km_coeffs(const CurvatureReport& rep);

struct MorseRhs {
  double leading = 0.0;
  std::optional<double> refined;  // b0 k^n + b1 k^(n-1) + b2 k^(n-2), q = 0 on M(0)
};
MorseRhs local_morse_rhs(const CurvatureReport& rep, int k, int q);

// Closed-form coefficient set at z for form degree q.
CoefficientSet coefficient_set(const ModelGeometry& g, std::span<const cplx> z, int q = 0,
                               double tau = kDefaultDegeneracyTol);

// Stationary-phase recursion. phi_jet is the full weight jet at 0 in normal
// coordinates: sum lambda_j |z_j|^2 + phi_1 with phi_1 = O(|z|^4) and no
// coefficient with |alpha| <= 1 or |beta| <= 1 besides the diagonal quadratic.
double b1_via_stationary_phase(const WirtingerJet& phi_jet, const WirtingerJet& vtheta_jet,
                               std::span<const double> lambda);
double b2_via_stationary_phase(const WirtingerJet& phi_jet, const WirtingerJet& vtheta_jet,
                               std::span<const double> lambda, const WirtingerJet& b1_diag_jet);

struct NormalFormJets {
  WirtingerJet phi;      // order 8, pluriharmonic part removed
  WirtingerJet vtheta;   // order 6
  WirtingerJet b1_diag;  // order 4, closed-form b1(z, z)
  std::vector<double> lambda;
};

// Jets at z of a geometry that is already in normal form there up to a
// pluriharmonic gauge term. Throws NotNormalForm otherwise.
NormalFormJets normal_form_jets(const ModelGeometry& g, std::span<const cplx> z);

CoefficientSet coefficient_set_stationary_phase(const ModelGeometry& g, std::span<const cplx> z);

}  // namespace bergman
