#pragma once

#include <span>
#include <vector>

namespace bergman {

struct HeatDensityQuery {
  std::vector<double> eigenvalues;  // eigenvalues of Rdot at x
  double t = 1.0;
  int q = 0;
  int k = 1;
};

// Products a_j t with |a_j t| below this use the 1/t branch.
inline constexpr double kZeroEigenvalueTol = 1e-12;

double heat_trace_density(const HeatDensityQuery& query);

// Smallest C bounding |x/(1-e^x)|, |x e^x/(1-e^x)| on |x| <= 1 and
// |1/(1-e^x)|, |e^x/(1-e^x)| on |x| > 1.
double heat_constant_C();

struct DegeneracyBound {
  double value = 0.0;
  std::vector<int> iota;      // indices with |a_j t| < 1
  bool empty_regime = false;  // iota is empty; the bound carries no 1/t factor
};

DegeneracyBound degeneracy_bound(std::span<const double> eigenvalues, double t, int q);

}  // namespace bergman
