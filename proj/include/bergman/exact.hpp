#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bergman/coeffs.hpp"
#include "bergman/geometry.hpp"

namespace bergman {

struct QuadSpec {
  double tol = 1e-12;       // relative tolerance of 1-D radial moment integrals
  double radius = 3.0;      // evaluation radius used for truncation bounds
  int panels = 16;          // initial radial panels (20-point Gauss-Legendre each) for dense Gram matrices
  int max_panels = 1024;
  double dense_tol = 1e-11; // two-level refinement target for dense Gram matrices
  int theta_nodes = 0;      // angular trapezoid nodes; 0 picks from the basis degree
  int max_degree = 40;      // monomial basis size for chart_expression on a disk
  int threads = 1;
  cplx section_gauge{1.0};  // common factor applied to every dense basis section
};

enum class BasisKind { polyradial, dense_monomial, torus_theta };

struct SectionBasis {
  BasisKind kind = BasisKind::polyradial;
  int k = 0;
  // Monomial exponents for n = 1 bases, theta labels 0..N-1 for the torus.
  // Empty with unbounded = true means all monomials are admissible.
  std::vector<std::vector<int>> exponents;
  bool unbounded = false;
  int truncation_bound = 0;
  double tail_bound = 0.0;
};

struct QuadratureMeta {
  std::string rule;
  int order = 0;
  double error_estimate = 0.0;
};

class BergmanKernel {
 public:
  BergmanKernel(const ModelGeometry& g, int k, const QuadSpec& quad = {});

  const ModelGeometry& geometry() const noexcept;
  int k() const noexcept;
  const SectionBasis& basis() const noexcept;
  const QuadratureMeta& quadrature() const noexcept;
  // 2-norm condition number of the diagonally equilibrated Gram matrix.
  double cond() const noexcept;
  double log10_cond_raw() const noexcept;
  // Dense Gram matrix in the monomial / theta basis. For polyradial bases this
  // is the diagonal up to truncation_bound (n = 1 only).
  CMatrix gram() const;

  double value(std::span<const cplx> z) const;
  // |P_k(z, w)| with the symmetric gauge exp(-k phi(z) - k phi(w)).
  double offdiag_modulus(std::span<const cplx> z, std::span<const cplx> w) const;
  std::vector<double> values(const std::vector<Point>& points, int threads = 1) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

SectionBasis section_basis(const ModelGeometry& g, int k, const QuadSpec& quad = {});

struct GramMatrix {
  CMatrix gram;
  double cond = 1.0;
  double log10_cond_raw = 0.0;
  QuadratureMeta meta;
};
GramMatrix gram_matrix(const ModelGeometry& g, int k, const QuadSpec& quad = {});

double bergman_kernel_function(const BergmanKernel& kernel, std::span<const cplx> z);
double offdiag_modulus(const BergmanKernel& kernel, std::span<const cplx> z, std::span<const cplx> w);

// Oracle channel: fock and cp1_fs without bump.
double closed_form_kernel(const ModelGeometry& g, int k, std::span<const cplx> z);

// Residual of the eikonal identity for the exact quadratic Fock phase, with an
// optional delta |z - w|^3 perturbation of the phase.
double eikonal_residual(const ModelGeometry& g, int psi_jet_order, std::span<const cplx> z, std::span<const cplx> w,
                        double delta = 0.0);

struct KernelEvaluation {
  CMatrix gram;
  double cond = 1.0;
  std::vector<Point> points;
  std::vector<double> values;
  std::vector<double> offdiag_values;
  QuadratureMeta quadrature_meta;
  SectionBasis basis;
  int k = 0;
};
KernelEvaluation evaluate_kernel(const ModelGeometry& g, int k, const std::vector<Point>& points,
                                 const QuadSpec& quad = {},
                                 const std::vector<std::pair<Point, Point>>& pairs = {});

struct FitOptions {
  int nuisance_terms = 0;  // extra columns k^(n-3), k^(n-4), ...
  double cond_limit = 1e10;
};

struct FitReport {
  std::vector<int> k_list;
  std::vector<double> values;
  std::vector<double> residuals;  // P_k - b0 k^n - b1 k^(n-1) - b2 k^(n-2)
  double slope = 0.0;
  double slope_stderr = 0.0;
  std::vector<double> fitted_b;   // b0, b1, b2 (+ nuisance)
  std::vector<double> predicted_b;
  double design_cond = 0.0;
};

FitReport expansion_fit(const ModelGeometry& g, const std::vector<int>& k_list, std::span<const cplx> z,
                        const CoefficientSet& coeffs, const FitOptions& options = {}, const QuadSpec& quad = {});
// Same fit from precomputed kernel values.
FitReport expansion_fit_values(int n, const std::vector<int>& k_list, const std::vector<double>& values,
                               const CoefficientSet& coeffs, const FitOptions& options = {});

struct DegeneracyRow {
  int k = 0;
  Point point;
  double scaled_value = 0.0;  // P_k(x) / k^n
  std::optional<double> b0;   // when x is not degenerate
};
struct DegeneracyTable {
  std::vector<DegeneracyRow> rows;
  // Per point: P_k/k^n strictly decreasing along k_list.
  std::vector<bool> decreasing;
};
DegeneracyTable degeneracy_scan(const ModelGeometry& g, const std::vector<int>& k_list,
                                const std::vector<Point>& points, const QuadSpec& quad = {});

}  // namespace bergman
