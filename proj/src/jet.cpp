#include "bergman/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "bergman/error.hpp"

namespace bergman {

namespace {

std::uint64_t pack(std::span<const int> e) {
  std::uint64_t key = 0;
  for (int v : e) key = (key << 8) | static_cast<std::uint64_t>(v);
  return key;
}

// All exponent vectors of total degree d, first variable varying slowest
// (largest first). Independent of the layout order, which keeps layouts nested.
void enumerate_degree(int nvars, int d, std::vector<int>& out) {
  std::vector<int> e(static_cast<std::size_t>(nvars), 0);
  auto rec = [&](auto&& self, int var, int remaining) -> void {
    if (var == nvars - 1) {
      e[static_cast<std::size_t>(var)] = remaining;
      out.insert(out.end(), e.begin(), e.end());
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      e[static_cast<std::size_t>(var)] = v;
      self(self, var + 1, remaining - v);
    }
  };
  rec(rec, 0, d);
}

struct LayoutCache {
  std::mutex mu;
  std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> entries;
};

LayoutCache& cache() {
  static LayoutCache c;
  return c;
}

double factorial(int m) { return std::tgamma(static_cast<double>(m) + 1.0); }

}  // namespace

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order) {
  if (nvars < 1 || nvars > kMaxJetVariables) {
    throw Error(ErrorKind::InvalidArgument, "jet variable count out of range");
  }
  if (order < 0 || order > kMaxJetOrder) {
    throw Error(ErrorKind::InvalidArgument, "jet order out of range");
  }
  for (int d = 0; d <= order; ++d) {
    const std::size_t before = exps_.size();
    enumerate_degree(nvars, d, exps_);
    const std::size_t added = (exps_.size() - before) / static_cast<std::size_t>(nvars);
    degree_.insert(degree_.end(), added, d);
  }
  auto& idx = index_map_;
  idx.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) idx.emplace(pack(exponent(i)), i);

  lowered_.assign(size() * static_cast<std::size_t>(nvars), -1);
  std::vector<int> e(static_cast<std::size_t>(nvars));
  for (std::size_t i = 0; i < size(); ++i) {
    auto ei = exponent(i);
    for (int v = 0; v < nvars; ++v) {
      if (ei[static_cast<std::size_t>(v)] == 0) continue;
      std::copy(ei.begin(), ei.end(), e.begin());
      --e[static_cast<std::size_t>(v)];
      lowered_[i * static_cast<std::size_t>(nvars) + static_cast<std::size_t>(v)] =
          static_cast<std::ptrdiff_t>(idx.at(pack(e)));
    }
  }
  for (std::size_t i = 0; i < size(); ++i) {
    auto ei = exponent(i);
    for (std::size_t j = 0; j < size(); ++j) {
      if (degree_[i] + degree_[j] > order) break;  // graded: later j only larger
      auto ej = exponent(j);
      for (int v = 0; v < nvars; ++v) {
        e[static_cast<std::size_t>(v)] = ei[static_cast<std::size_t>(v)] + ej[static_cast<std::size_t>(v)];
      }
      products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                           static_cast<std::uint32_t>(idx.at(pack(e)))});
    }
  }
}

std::shared_ptr<const JetLayout> JetLayout::get(int nvars, int order) {
  auto& c = cache();
  std::lock_guard<std::mutex> lock(c.mu);
  auto key = std::make_pair(nvars, order);
  auto it = c.entries.find(key);
  if (it != c.entries.end()) return it->second;
  auto layout = std::make_shared<const JetLayout>(nvars, order);
  c.entries.emplace(key, layout);
  return layout;
}

std::ptrdiff_t JetLayout::index(std::span<const int> e) const {
  if (static_cast<int>(e.size()) != nvars_) {
    throw Error(ErrorKind::InvalidArgument, "exponent length mismatch");
  }
  int d = 0;
  for (int v : e) {
    if (v < 0) throw Error(ErrorKind::InvalidArgument, "negative exponent");
    d += v;
  }
  if (d > order_) return -1;
  return static_cast<std::ptrdiff_t>(index_map_.at(pack(e)));
}

// ---------------------------------------------------------------------------

WirtingerJet::WirtingerJet(int n, std::shared_ptr<const JetLayout> layout)
    : n_(n), order_(layout->order()), layout_(std::move(layout)), c_(layout_->size()) {}

WirtingerJet::WirtingerJet(int n, int order, cplx constant)
    : WirtingerJet(n, JetLayout::get(2 * n, order)) {
  c_[0] = constant;
}

WirtingerJet WirtingerJet::z(int n, int order, int j, cplx at) {
  WirtingerJet r(n, order, at);
  if (order >= 1) r.c_[static_cast<std::size_t>(1 + j)] = 1.0;
  return r;
}

WirtingerJet WirtingerJet::zbar(int n, int order, int j, cplx at) {
  WirtingerJet r(n, order, at);
  if (order >= 1) r.c_[static_cast<std::size_t>(1 + n + j)] = 1.0;
  return r;
}

namespace {

std::vector<int> join(std::span<const int> alpha, std::span<const int> beta, int n) {
  if (static_cast<int>(alpha.size()) != n || static_cast<int>(beta.size()) != n) {
    throw Error(ErrorKind::InvalidArgument, "multi-index length must equal n");
  }
  std::vector<int> e(alpha.begin(), alpha.end());
  e.insert(e.end(), beta.begin(), beta.end());
  return e;
}

}  // namespace

cplx WirtingerJet::coeff(std::span<const int> alpha, std::span<const int> beta) const {
  auto idx = layout_->index(join(alpha, beta, n_));
  if (idx < 0) throw Error(ErrorKind::JetOrderTooLow, "requested coefficient beyond jet order");
  return c_[static_cast<std::size_t>(idx)];
}

void WirtingerJet::set_coeff(std::span<const int> alpha, std::span<const int> beta, cplx value) {
  auto idx = layout_->index(join(alpha, beta, n_));
  if (idx < 0) throw Error(ErrorKind::JetOrderTooLow, "coefficient beyond jet order");
  c_[static_cast<std::size_t>(idx)] = value;
}

cplx WirtingerJet::derivative(std::span<const int> alpha, std::span<const int> beta) const {
  double f = 1.0;
  for (int a : alpha) f *= factorial(a);
  for (int b : beta) f *= factorial(b);
  return coeff(alpha, beta) * f;
}

int WirtingerJet::valuation() const noexcept {
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] != cplx{}) return layout_->degree(i);
  }
  return order_ + 1;
}

double WirtingerJet::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& v : c_) m = std::max(m, std::abs(v));
  return m;
}

WirtingerJet WirtingerJet::truncated(int order) const {
  if (order >= order_) return *this;
  WirtingerJet r(n_, JetLayout::get(2 * n_, order));
  std::copy_n(c_.begin(), r.c_.size(), r.c_.begin());
  return r;
}

WirtingerJet WirtingerJet::d_z(int j) const {
  if (order_ < 1) throw Error(ErrorKind::JetOrderTooLow, "cannot differentiate an order-0 jet");
  WirtingerJet r(n_, JetLayout::get(2 * n_, order_ - 1));
  for (std::size_t i = 0; i < c_.size(); ++i) {
    auto l = layout_->lowered(i, j);
    if (l < 0) continue;
    r.c_[static_cast<std::size_t>(l)] += c_[i] * static_cast<double>(layout_->exponent(i)[static_cast<std::size_t>(j)]);
  }
  return r;
}

WirtingerJet WirtingerJet::d_zbar(int j) const { return d_z(n_ + j); }

WirtingerJet WirtingerJet::holomorphic_part() const {
  WirtingerJet r = *this;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    auto e = layout_->exponent(i);
    if (std::any_of(e.begin() + n_, e.end(), [](int v) { return v != 0; })) r.c_[i] = 0.0;
  }
  return r;
}

WirtingerJet WirtingerJet::antiholomorphic_part() const {
  WirtingerJet r = *this;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    auto e = layout_->exponent(i);
    if (std::any_of(e.begin(), e.begin() + n_, [](int v) { return v != 0; })) r.c_[i] = 0.0;
  }
  return r;
}

namespace {

std::size_t swapped_index(const JetLayout& layout, std::size_t i, int n) {
  auto e = layout.exponent(i);
  std::vector<int> s(e.begin() + n, e.end());
  s.insert(s.end(), e.begin(), e.begin() + n);
  return static_cast<std::size_t>(layout.index(s));
}

}  // namespace

WirtingerJet WirtingerJet::conjugate() const {
  WirtingerJet r(n_, layout_);
  for (std::size_t i = 0; i < c_.size(); ++i) {
    r.c_[swapped_index(*layout_, i, n_)] = std::conj(c_[i]);
  }
  return r;
}

double WirtingerJet::reality_defect() const noexcept {
  double d = 0.0;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    d = std::max(d, std::abs(c_[swapped_index(*layout_, i, n_)] - std::conj(c_[i])));
  }
  return d;
}

WirtingerJet& WirtingerJet::operator+=(const WirtingerJet& o) {
  if (o.n_ != n_) throw Error(ErrorKind::InvalidArgument, "jet dimension mismatch");
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

WirtingerJet& WirtingerJet::operator-=(const WirtingerJet& o) {
  if (o.n_ != n_) throw Error(ErrorKind::InvalidArgument, "jet dimension mismatch");
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

WirtingerJet& WirtingerJet::operator*=(const WirtingerJet& o) { return *this = *this * o; }

WirtingerJet& WirtingerJet::operator+=(cplx s) {
  c_[0] += s;
  return *this;
}
WirtingerJet& WirtingerJet::operator-=(cplx s) {
  c_[0] -= s;
  return *this;
}
WirtingerJet& WirtingerJet::operator*=(cplx s) {
  for (auto& v : c_) v *= s;
  return *this;
}
WirtingerJet& WirtingerJet::operator/=(cplx s) {
  for (auto& v : c_) v /= s;
  return *this;
}

WirtingerJet operator-(const WirtingerJet& a) {
  WirtingerJet r = a;
  for (auto& v : r.c_) v = -v;
  return r;
}

WirtingerJet operator*(const WirtingerJet& a, const WirtingerJet& b) {
  if (a.n_ != b.n_) throw Error(ErrorKind::InvalidArgument, "jet dimension mismatch");
  // The product is exact up to min(Na + vb, Nb + va).
  const int out = std::min({a.order_ + b.valuation(), b.order_ + a.valuation(), kMaxJetOrder});
  WirtingerJet r(a.n_, JetLayout::get(2 * a.n_, out));
  const auto na = a.c_.size();
  const auto nb = b.c_.size();
  for (const auto& p : r.layout_->products()) {
    if (p.lhs >= na || p.rhs >= nb) continue;
    r.c_[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
  }
  return r;
}

WirtingerJet operator/(const WirtingerJet& a, const WirtingerJet& b) { return a * reciprocal(b); }

WirtingerJet operator/(cplx s, const WirtingerJet& a) { return reciprocal(a) * s; }

// ---------------------------------------------------------------------------

WirtingerJet compose(const WirtingerJet& a, std::span<const cplx> series) {
  const int order = a.order();
  if (static_cast<int>(series.size()) < order + 1) {
    throw Error(ErrorKind::InvalidArgument, "series shorter than jet order");
  }
  WirtingerJet t = a;
  t.coefficients()[0] = 0.0;
  WirtingerJet acc(a.n(), order, series[static_cast<std::size_t>(order)]);
  for (int m = order - 1; m >= 0; --m) {
    acc = acc * t;
    acc += series[static_cast<std::size_t>(m)];
  }
  return acc.truncated(order);
}

WirtingerJet reciprocal(const WirtingerJet& a) {
  const cplx a0 = a.constant();
  if (a0 == cplx{}) throw Error(ErrorKind::InvalidArgument, "reciprocal of a jet with zero constant term");
  std::vector<cplx> s(static_cast<std::size_t>(a.order()) + 1);
  cplx p = 1.0 / a0;
  for (std::size_t m = 0; m < s.size(); ++m) {
    s[m] = p;
    p *= -1.0 / a0;
  }
  return compose(a, s);
}

WirtingerJet log(const WirtingerJet& a) {
  const cplx a0 = a.constant();
  if (a0 == cplx{}) throw Error(ErrorKind::InvalidArgument, "log of a jet with zero constant term");
  std::vector<cplx> s(static_cast<std::size_t>(a.order()) + 1);
  s[0] = std::log(a0);
  cplx p = 1.0;
  for (std::size_t m = 1; m < s.size(); ++m) {
    p /= a0;
    s[m] = ((m % 2 == 1) ? 1.0 : -1.0) * p / static_cast<double>(m);
  }
  return compose(a, s);
}

WirtingerJet exp(const WirtingerJet& a) {
  std::vector<cplx> s(static_cast<std::size_t>(a.order()) + 1);
  cplx p = std::exp(a.constant());
  for (std::size_t m = 0; m < s.size(); ++m) {
    s[m] = p;
    p /= static_cast<double>(m + 1);
  }
  return compose(a, s);
}

WirtingerJet ipow(const WirtingerJet& a, int p) {
  if (p < 0) return reciprocal(ipow(a, -p));
  WirtingerJet result(a.n(), a.order(), 1.0);
  WirtingerJet base = a;
  bool first = true;
  while (p > 0) {
    if (p & 1) {
      result = first ? base : result * base;
      first = false;
    }
    p >>= 1;
    if (p > 0) base = base * base;
  }
  return result;
}

WirtingerJet pow(const WirtingerJet& a, double p) {
  if (p == std::round(p) && std::abs(p) <= 64.0) return ipow(a, static_cast<int>(p));
  const cplx a0 = a.constant();
  if (a0 == cplx{}) throw Error(ErrorKind::InvalidArgument, "non-integer power of a jet with zero constant term");
  std::vector<cplx> s(static_cast<std::size_t>(a.order()) + 1);
  cplx binom = 1.0;
  for (std::size_t m = 0; m < s.size(); ++m) {
    s[m] = binom * std::pow(a0, p - static_cast<double>(m));
    binom *= (p - static_cast<double>(m)) / static_cast<double>(m + 1);
  }
  return compose(a, s);
}

WirtingerJet sqrt(const WirtingerJet& a) { return pow(a, 0.5); }

WirtingerJet laplace0(const WirtingerJet& a, std::span<const double> lambda) {
  if (static_cast<int>(lambda.size()) != a.n()) {
    throw Error(ErrorKind::InvalidArgument, "lambda length must equal n");
  }
  if (a.order() < 2) throw Error(ErrorKind::JetOrderTooLow, "laplace0 needs order >= 2");
  WirtingerJet r(a.n(), a.order() - 2, 0.0);
  for (int j = 0; j < a.n(); ++j) {
    r += a.d_z(j).d_zbar(j) * (1.0 / lambda[static_cast<std::size_t>(j)]);
  }
  return r;
}

WirtingerJet jet_det(std::span<const WirtingerJet> m, int n) {
  if (static_cast<int>(m.size()) != n * n) throw Error(ErrorKind::InvalidArgument, "matrix size mismatch");
  std::vector<WirtingerJet> a(m.begin(), m.end());
  auto at = [&](int r, int c) -> WirtingerJet& { return a[static_cast<std::size_t>(r * n + c)]; };
  WirtingerJet det = at(0, 0);
  for (int i = 0; i < n; ++i) {
    const WirtingerJet& piv = at(i, i);
    if (piv.constant() == cplx{}) throw Error(ErrorKind::InvalidArgument, "zero pivot in jet determinant");
    if (i > 0) det = det * piv;
    const WirtingerJet inv = reciprocal(piv);
    for (int r = i + 1; r < n; ++r) {
      const WirtingerJet f = at(r, i) * inv;
      for (int c = i + 1; c < n; ++c) at(r, c) -= f * at(i, c);
    }
  }
  return det;
}

std::vector<WirtingerJet> jet_inverse(std::span<const WirtingerJet> m, int n) {
  if (static_cast<int>(m.size()) != n * n) throw Error(ErrorKind::InvalidArgument, "matrix size mismatch");
  std::vector<WirtingerJet> a(m.begin(), m.end());
  const int order = a.front().order();
  const int dim = a.front().n();
  std::vector<WirtingerJet> inv;
  inv.reserve(a.size());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) inv.emplace_back(dim, order, r == c ? 1.0 : 0.0);
  }
  auto A = [&](int r, int c) -> WirtingerJet& { return a[static_cast<std::size_t>(r * n + c)]; };
  auto I = [&](int r, int c) -> WirtingerJet& { return inv[static_cast<std::size_t>(r * n + c)]; };
  for (int i = 0; i < n; ++i) {
    if (A(i, i).constant() == cplx{}) throw Error(ErrorKind::InvalidArgument, "zero pivot in jet inverse");
    const WirtingerJet p = reciprocal(A(i, i));
    for (int c = 0; c < n; ++c) {
      A(i, c) = A(i, c) * p;
      I(i, c) = I(i, c) * p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == i) continue;
      const WirtingerJet f = A(r, i);
      for (int c = 0; c < n; ++c) {
        A(r, c) -= f * A(i, c);
        I(r, c) -= f * I(i, c);
      }
    }
  }
  return inv;
}

}  // namespace bergman
