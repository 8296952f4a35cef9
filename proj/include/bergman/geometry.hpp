#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bergman/expression.hpp"
#include "bergman/jet.hpp"

namespace bergman {

using Point = std::vector<cplx>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

enum class Family { fock, cp1_fs, torus, radial, chart_expression };
enum class DerivativeMode { exact_closed_form, finite_difference };

const char* to_string(Family f) noexcept;
const char* to_string(DerivativeMode m) noexcept;
Family family_from_string(const std::string& s);
DerivativeMode derivative_mode_from_string(const std::string& s);

// Coordinate domain. An empty box means no box constraint.
struct Chart {
  double radius = std::numeric_limits<double>::infinity();
  std::vector<double> re_lo, re_hi, im_lo, im_hi;

  bool contains(std::span<const cplx> z) const;
};

struct GeometryParams {
  std::vector<double> lambda;  // fock

  int degree = 1;  // cp1_fs: L = O(degree)
  double eps = 0.0;
  cplx center = 0.0;
  double width = 1.0;

  cplx tau{0.0, 1.0};  // torus lattice Z + tau Z
  int torus_degree = 1;

  std::vector<double> radial;  // phi = sum_j radial[j-1] |z|^{2j}

  std::string weight;               // chart_expression
  std::vector<std::string> theta;   // "identity", "kahler", 1 scalar, n diagonal or n*n entries
  std::map<std::string, double> constants;
  bool rotation_invariant = false;  // user certifies phi, Theta depend on |z|^2 only (n = 1)
};

class ModelGeometry {
 public:
  static ModelGeometry fock(std::vector<double> lambda);
  // phi = (m/2) log(1+|z|^2) + eps exp(-|z-c|^2 / w^2), Theta = (1+|z|^2)^-2
  static ModelGeometry cp1_fs(int degree = 1, double eps = 0.0, cplx center = 0.0, double width = 1.0);
  // phi = (pi d / Im tau) (Im z)^2, Theta = 1
  static ModelGeometry torus(cplx tau, int degree);
  static ModelGeometry radial(std::vector<double> coeffs);
  static ModelGeometry chart_expression(int n, const std::string& weight, std::vector<std::string> theta,
                                        std::map<std::string, double> constants = {}, Chart chart = {},
                                        bool rotation_invariant = false);

  ModelGeometry with_derivative_mode(DerivativeMode mode) const;
  ModelGeometry with_chart(Chart chart) const;

  int n() const noexcept;
  Family family() const noexcept;
  DerivativeMode derivative_mode() const noexcept;
  const GeometryParams& params() const noexcept;
  const Chart& chart() const noexcept;
  // phi and Theta depend on |z_j|^2 only, coordinatewise.
  bool polyradial() const noexcept;

  double phi(std::span<const cplx> z) const;
  CMatrix theta(std::span<const cplx> z) const;
  double v_theta(std::span<const cplx> z) const;

  // Taylor data at z0 in the configured derivative mode.
  WirtingerJet phi_jet(std::span<const cplx> z0, int order) const;
  std::vector<WirtingerJet> theta_jet(std::span<const cplx> z0, int order) const;

  // Same, always by exact jet arithmetic.
  WirtingerJet phi_jet_exact(std::span<const cplx> z0, int order) const;
  std::vector<WirtingerJet> theta_jet_exact(std::span<const cplx> z0, int order) const;

  void require_in_chart(std::span<const cplx> z) const;

  struct Impl;

 private:
  explicit ModelGeometry(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// A real or complex function on the chart that derivatives can be taken of.
class ChartFunction {
 public:
  enum class Kind { weight, log_v_theta, theta_entry, expression, constant };

  static ChartFunction weight();
  static ChartFunction log_v_theta();
  static ChartFunction theta_entry(int j, int k);
  static ChartFunction expression(Expression e);
  static ChartFunction constant(cplx c);

  Kind kind() const noexcept { return kind_; }
  cplx value(const ModelGeometry& g, std::span<const cplx> z) const;
  WirtingerJet exact_jet(const ModelGeometry& g, std::span<const cplx> z0, int order) const;

 private:
  Kind kind_ = Kind::constant;
  int j_ = 0, k_ = 0;
  cplx c_ = 0.0;
  Expression expr_;
};

inline constexpr int kDefaultMaxDerivativeOrder = 8;

cplx wirtinger_derivative(const ModelGeometry& g, const ChartFunction& f, std::span<const cplx> z0,
                          std::span<const int> alpha, std::span<const int> beta,
                          int max_order = kDefaultMaxDerivativeOrder);

WirtingerJet jet(const ModelGeometry& g, const ChartFunction& f, std::span<const cplx> z0, int order,
                 int max_order = kDefaultMaxDerivativeOrder);

// Finite-difference Wirtinger derivative of a function given by values.
// 4th-order central stencils in real coordinates plus one Richardson step.
cplx fd_wirtinger_derivative(const std::function<cplx(std::span<const cplx>)>& f, std::span<const cplx> z0,
                             std::span<const int> alpha, std::span<const int> beta, const Chart& chart);

// ---------------------------------------------------------------------------

struct Stratum {
  bool degenerate = false;
  int q = 0;  // number of negative eigenvalues when not degenerate

  bool operator==(const Stratum&) const = default;
  std::string label() const;
};

inline constexpr double kDefaultDegeneracyTol = 1e-8;

// Phi_jk = d^2 phi / dz_j dzbar_k at z.
CMatrix levi_matrix(const ModelGeometry& g, std::span<const cplx> z);
CMatrix curvature_endomorphism(const ModelGeometry& g, std::span<const cplx> z);

struct StratumInfo {
  RVector eigenvalues;  // ascending
  Stratum stratum;
};
StratumInfo classify_stratum(const ModelGeometry& g, std::span<const cplx> z, double tau = kDefaultDegeneracyTol);
// Same classification from Phi and Theta already in hand.
StratumInfo classify_stratum(const CMatrix& levi, const CMatrix& theta, double tau = kDefaultDegeneracyTol);

struct OmegaFields {
  CMatrix omega;
  double v_omega = 0.0;
  double r = 0.0;
  double r_hat = 0.0;
  CMatrix ric;   // d dbar log V_omega
  CMatrix rdet;  // d dbar log V_Theta
  double ric_norm2 = 0.0;
  double rdet_norm2 = 0.0;
  double ric_rdet_pairing = 0.0;
  double rtm_norm2 = 0.0;
  double laplacian_r = 0.0;
  double laplacian_r_hat = 0.0;
};

struct CurvatureReport {
  Point point;
  CMatrix rdot;
  CMatrix levi;
  CMatrix theta;
  RVector eigenvalues;
  Stratum stratum;
  double v_theta = 0.0;
  double det_rdot = 0.0;
  // Present only when omega is positive definite.
  std::optional<OmegaFields> omega;
};

// Throws NotPositive when omega is not positive definite.
CurvatureReport curvature_report(const ModelGeometry& g, std::span<const cplx> z,
                                 double tau = kDefaultDegeneracyTol);
// Leaves omega empty instead of throwing.
CurvatureReport curvature_report_partial(const ModelGeometry& g, std::span<const cplx> z,
                                         double tau = kDefaultDegeneracyTol);

// r and r_hat as jets of the given order around z (needs phi to order + 4,
// Theta to order + 2).
struct ScalarCurvatureJets {
  WirtingerJet r, r_hat, det_rdot;
};
ScalarCurvatureJets scalar_curvature_jets(const ModelGeometry& g, std::span<const cplx> z, int order);

}  // namespace bergman
