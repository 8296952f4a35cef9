#pragma once

#include <functional>
#include <mutex>
#include <vector>

#include "bergman/geometry.hpp"

namespace bergman::detail {

// Profile of a rotation-invariant weight on one complex axis as a function of
// t = |z|^2.
struct RadialProfile {
  std::function<double(double)> phi;
  std::function<double(double)> log_v;  // log V_Theta
  double t_max = std::numeric_limits<double>::infinity();
  int max_index = -1;                   // -1: all monomials admissible
  bool empty = false;                   // no L^2 holomorphic sections at all
};

struct KernelSum {
  cplx value = 0.0;
  double tail = 0.0;
  int terms = 0;
};

// Moments G_m = int |z|^(2m) e^(-2k phi) dv of one axis, computed lazily and
// cached. Thread-safe.
class RadialMoments {
 public:
  RadialMoments(RadialProfile profile, int k, double tol);

  double log_moment(int m) const;
  double max_relative_error() const;
  const RadialProfile& profile() const noexcept { return profile_; }
  int k() const noexcept { return k_; }

  // sum_m (z conj(w))^m / G_m * exp(-k phi(|z|^2) - k phi(|w|^2)) with a
  // geometric tail bound from log-convexity of the moments.
  KernelSum sum(cplx z, cplx w) const;

 private:
  double integrate(int m, double* rel_err) const;

  RadialProfile profile_;
  int k_;
  double tol_;
  mutable std::mutex mutex_;
  mutable std::vector<double> log_g_;
  mutable double max_err_ = 0.0;
};

}  // namespace bergman::detail
