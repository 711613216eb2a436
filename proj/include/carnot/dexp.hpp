#pragma once

#include <cmath>
#include <vector>

#include "carnot/flag.hpp"
#include "carnot/lie_algebra.hpp"

namespace carnot {

/// Bernoulli numbers B_0..B_{count-1} with B_1 = -1/2.
inline std::vector<double> bernoulli_numbers(int count) {
  std::vector<double> b(static_cast<std::size_t>(std::max(count, 0)), 0.0);
  if (count == 0) return b;
  b[0] = 1.0;
  for (int m = 1; m < count; ++m) {
    double s = 0.0, binom = 1.0;  // binom = C(m+1, j)
    for (int j = 0; j < m; ++j) {
      s += binom * b[j];
      binom = binom * (m + 1 - j) / (j + 1);
    }
    b[m] = -s / (m + 1);
  }
  return b;
}

/// Taylor coefficients c_k of z / (1 - e^{-z}) = sum_k c_k z^k, i.e.
/// c_k = (-1)^k B_k / k!  (1, 1/2, 1/12, 0, -1/720, ...).
inline std::vector<double> dexpinv_coefficients(int count) {
  auto b = bernoulli_numbers(count);
  double fact = 1.0;
  for (int k = 0; k < count; ++k) {
    if (k > 0) fact *= k;
    b[k] = ((k % 2) ? -b[k] : b[k]) / fact;
  }
  return b;
}

/// Exponential coordinates of the first kind on a simply connected nilpotent
/// group. For g(t) = exp(x(t)) with left-trivialized velocity v (g' = g v):
///
///     x' = sum_{k < s} c_k ad_x^k v
///
/// where s is the nilpotency class, so the series is a finite sum.
class ExponentialChart {
 public:
  explicit ExponentialChart(LieAlgebra a, int step_cap = 16) : a_(std::move(a)) {
    const auto lcs = lower_central_series(a_, FlagOptions{1e-10, step_cap});
    if (!lcs.nilpotent)
      throw PreconditionError("algebra '" + a_.name() + "' is not nilpotent within step cap " +
                              std::to_string(step_cap));
    order_ = lcs.nilpotency_class;
    coeff_ = dexpinv_coefficients(order_);
  }

  const LieAlgebra& algebra() const noexcept { return a_; }
  /// Number of series terms (the nilpotency class).
  int order() const noexcept { return order_; }

  Vector dexpinv(const Vector& x, const Vector& v) const {
    if (x.size() != a_.dim() || v.size() != a_.dim())
      throw InputError("dexpinv: vectors must have dimension " + std::to_string(a_.dim()));
    Vector w = v;
    Vector term = v;
    for (int k = 1; k < order_; ++k) {
      term = a_.bracket(x, term);
      if (coeff_[k] != 0.0) w += coeff_[k] * term;
    }
    return w;
  }

 private:
  LieAlgebra a_;
  int order_ = 1;
  std::vector<double> coeff_;
};

inline Vector dexpinv(const LieAlgebra& a, const Vector& x, const Vector& v) {
  return ExponentialChart(a).dexpinv(x, v);
}

}  // namespace carnot
