#pragma once

// Truncated multivariate Taylor polynomials in (z, zbar).
//
// A WirtingerJet over n complex variables treats z_1..z_n and zbar_1..zbar_n
// as 2n independent variables. Coefficients are stored densely in a graded
// monomial order, so the layout of order N is a prefix of every layout of
// order N' > N over the same variables; truncation is a resize.
//
// Coefficient convention: c_{alpha,beta} = d^alpha_z d^beta_zbar f(z0) / (alpha! beta!).

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

namespace bergman {

using cplx = std::complex<double>;

inline constexpr int kMaxJetVariables = 8;
inline constexpr int kMaxJetOrder = 32;

class JetLayout {
 public:
  struct Product {
    std::uint32_t lhs, rhs, out;
  };

  static std::shared_ptr<const JetLayout> get(int nvars, int order);

  int nvars() const noexcept { return nvars_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return degree_.size(); }
  int degree(std::size_t i) const noexcept { return degree_[i]; }
  std::span<const int> exponent(std::size_t i) const noexcept {
    return {exps_.data() + i * static_cast<std::size_t>(nvars_), static_cast<std::size_t>(nvars_)};
  }
  // -1 if the total degree exceeds the layout order.
  std::ptrdiff_t index(std::span<const int> e) const;
  // Index of e_i - 1_var, or -1 when exponent var of e_i is zero.
  std::ptrdiff_t lowered(std::size_t i, int var) const noexcept {
    return lowered_[i * static_cast<std::size_t>(nvars_) + static_cast<std::size_t>(var)];
  }
  // All (lhs, rhs, out) with deg(lhs) + deg(rhs) <= order.
  std::span<const Product> products() const noexcept { return products_; }

  JetLayout(int nvars, int order);

 private:
  int nvars_;
  int order_;
  std::vector<int> exps_;
  std::vector<int> degree_;
  std::vector<std::ptrdiff_t> lowered_;
  std::vector<Product> products_;
  std::unordered_map<std::uint64_t, std::size_t> index_map_;
};

class WirtingerJet {
 public:
  WirtingerJet() = default;
  WirtingerJet(int n, int order, cplx constant = 0.0);

  // The coordinate function z_j (resp. zbar_j) expanded at a point whose
  // coordinate value is `at`.
  static WirtingerJet z(int n, int order, int j, cplx at);
  static WirtingerJet zbar(int n, int order, int j, cplx at);

  int n() const noexcept { return n_; }
  int order() const noexcept { return order_; }
  bool empty() const noexcept { return !layout_; }
  const JetLayout& layout() const noexcept { return *layout_; }
  std::span<const cplx> coefficients() const noexcept { return c_; }
  std::span<cplx> coefficients() noexcept { return c_; }

  cplx constant() const noexcept { return c_.empty() ? cplx{} : c_[0]; }
  cplx coeff(std::span<const int> alpha, std::span<const int> beta) const;
  void set_coeff(std::span<const int> alpha, std::span<const int> beta, cplx value);
  // d^alpha d^beta f(z0) = coeff * alpha! * beta!
  cplx derivative(std::span<const int> alpha, std::span<const int> beta) const;

  // Lowest total degree carrying a nonzero coefficient, capped at order()+1.
  int valuation() const noexcept;
  double max_abs() const noexcept;

  WirtingerJet truncated(int order) const;
  WirtingerJet d_z(int j) const;
  WirtingerJet d_zbar(int j) const;
  // Keep only coefficients with beta = 0 (resp. alpha = 0).
  WirtingerJet holomorphic_part() const;
  WirtingerJet antiholomorphic_part() const;
  // Jet of conj(f): c'_{alpha,beta} = conj(c_{beta,alpha}).
  WirtingerJet conjugate() const;
  // Largest |c_{beta,alpha} - conj(c_{alpha,beta})|; zero for jets of real functions.
  double reality_defect() const noexcept;

  WirtingerJet& operator+=(const WirtingerJet& o);
  WirtingerJet& operator-=(const WirtingerJet& o);
  WirtingerJet& operator*=(const WirtingerJet& o);
  WirtingerJet& operator+=(cplx s);
  WirtingerJet& operator-=(cplx s);
  WirtingerJet& operator*=(cplx s);
  WirtingerJet& operator/=(cplx s);

  friend WirtingerJet operator-(const WirtingerJet& a);
  friend WirtingerJet operator+(WirtingerJet a, const WirtingerJet& b) { return a += b; }
  friend WirtingerJet operator-(WirtingerJet a, const WirtingerJet& b) { return a -= b; }
  friend WirtingerJet operator*(const WirtingerJet& a, const WirtingerJet& b);
  friend WirtingerJet operator/(const WirtingerJet& a, const WirtingerJet& b);

  friend WirtingerJet operator+(WirtingerJet a, cplx s) { return a += s; }
  friend WirtingerJet operator+(cplx s, WirtingerJet a) { return a += s; }
  friend WirtingerJet operator-(WirtingerJet a, cplx s) { return a -= s; }
  friend WirtingerJet operator-(cplx s, const WirtingerJet& a) { return -a + s; }
  friend WirtingerJet operator*(WirtingerJet a, cplx s) { return a *= s; }
  friend WirtingerJet operator*(cplx s, WirtingerJet a) { return a *= s; }
  friend WirtingerJet operator/(WirtingerJet a, cplx s) { return a /= s; }
  friend WirtingerJet operator/(cplx s, const WirtingerJet& a);

  friend WirtingerJet operator+(WirtingerJet a, double s) { return a += cplx(s); }
  friend WirtingerJet operator+(double s, WirtingerJet a) { return a += cplx(s); }
  friend WirtingerJet operator-(WirtingerJet a, double s) { return a -= cplx(s); }
  friend WirtingerJet operator-(double s, const WirtingerJet& a) { return -a + cplx(s); }
  friend WirtingerJet operator*(WirtingerJet a, double s) { return a *= cplx(s); }
  friend WirtingerJet operator*(double s, WirtingerJet a) { return a *= cplx(s); }
  friend WirtingerJet operator/(WirtingerJet a, double s) { return a /= cplx(s); }
  friend WirtingerJet operator/(double s, const WirtingerJet& a) { return cplx(s) / a; }

 private:
  WirtingerJet(int n, std::shared_ptr<const JetLayout> layout);

  int n_ = 0;
  int order_ = -1;
  std::shared_ptr<const JetLayout> layout_;
  std::vector<cplx> c_;
};

// f(a) for a univariate f given its Taylor coefficients at a.constant():
// series[m] = f^{(m)}(a0) / m!. Uses series up to a.order().
WirtingerJet compose(const WirtingerJet& a, std::span<const cplx> series);

WirtingerJet reciprocal(const WirtingerJet& a);
WirtingerJet log(const WirtingerJet& a);
WirtingerJet exp(const WirtingerJet& a);
WirtingerJet sqrt(const WirtingerJet& a);
// Real exponent; integer exponents use repeated multiplication so a zero
// constant term is allowed for them.
WirtingerJet pow(const WirtingerJet& a, double p);
WirtingerJet ipow(const WirtingerJet& a, int p);

// sum_j (1/lambda_j) d^2/(dz_j dzbar_j)
WirtingerJet laplace0(const WirtingerJet& a, std::span<const double> lambda);

// Determinant / inverse of a row-major n x n matrix of jets by Gaussian
// elimination without pivoting; leading principal minors must have a nonzero
// constant term.
WirtingerJet jet_det(std::span<const WirtingerJet> m, int n);
std::vector<WirtingerJet> jet_inverse(std::span<const WirtingerJet> m, int n);

}  // namespace bergman
