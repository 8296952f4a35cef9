#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bergman/geometry.hpp"

namespace bergman {

struct MorseQuad {
  double tol = 1e-6;  // absolute target on each stratum integral
  int base_cells = 16;  // initial grid is base_cells x base_cells
  int max_depth = 12;
  int threads = 1;
};

// I_q = (2 pi)^-n int_{M(q)} |det Rdot| dv for q = 0..n, computed in one pass.
struct StrataIntegrals {
  std::vector<double> values;
  double error = 0.0;  // summed |coarse - refined| over accepted cells
  long cells = 0;
  long unresolved_cells = 0;  // cells accepted only because max_depth was reached
};

// Compact families (cp1_fs, torus) and n = 1 chart expressions on a bounded
// disk or box. The degenerate locus is assigned to no stratum.
StrataIntegrals strata_integrals(const ModelGeometry& g, const MorseQuad& quad = {});
double morse_integral(const ModelGeometry& g, int q, const MorseQuad& quad = {});

// Closed-form data per family; nullopt when the family has none.
std::optional<double> chern_number(const ModelGeometry& g);
// dim H^0 .. dim H^n of L^k.
std::optional<std::vector<long>> exact_dims(const ModelGeometry& g, int k);

struct MorseReport {
  ModelGeometry model;
  std::vector<double> q_integrals;
  double rr_leading = 0.0;       // k^n coefficient of the Euler characteristic
  double alternating_sum = 0.0;  // sum_q (-1)^q I_q from the quadrature
  std::map<int, std::vector<long>> exact_dims;
  double quadrature_error = 0.0;
};

MorseReport morse_report(const ModelGeometry& g, const std::vector<int>& k_list, const MorseQuad& quad = {});

struct MorseMargin {
  std::string name;  // "lower", "weak" or "alternating"
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // oriented so that the inequality reads margin >= 0
  bool holds = false;   // margin >= -slack
};

struct MorseInequalityReport {
  int q = 0;
  int k = 0;
  std::vector<long> dims;
  std::vector<double> q_integrals;
  std::vector<MorseMargin> margins;
  double slack = 0.0;  // allowance for the o(k^n) terms plus quadrature error
  bool all_hold = false;
};

// Both sides of the inequalities from integrals already in hand.
MorseInequalityReport morse_inequalities(const StrataIntegrals& s, int n, int q, int k, const std::vector<long>& dims);

// dims, when given, are dim H^0 .. dim H^n at this k; otherwise the family's
// closed-form counts are used (MissingDims if there are none).
MorseInequalityReport strong_morse_check(const ModelGeometry& g, int q, int k,
                                         std::optional<std::vector<long>> dims = std::nullopt,
                                         const MorseQuad& quad = {});

struct VanishingRow {
  int k = 0;
  long dim = 0;
  double leading = 0.0;  // k^n I_q
  double ratio = 0.0;    // dim / leading, NaN when leading is zero
};

struct VanishingReport {
  int q = 0;
  int n_minus = 0;  // negative-eigenvalue count of the constant signature
  std::vector<VanishingRow> rows;
  bool consistent = false;
};

// Requires a curvature signature that is constant over the manifold.
VanishingReport vanishing_check(const ModelGeometry& g, int q, const std::vector<int>& k_list,
                                const MorseQuad& quad = {});

}  // namespace bergman
