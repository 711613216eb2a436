#pragma once

#include <cmath>

#include "carnot/lie_algebra.hpp"

namespace carnot {

/// Uniform time grid t_k = t0 + k * dt, k = 0..count-1.
struct UniformGrid {
  double t0 = 0.0;
  double dt = 0.0;
  int count = 0;

  double time(int k) const { return t0 + k * dt; }
  double end() const { return time(count - 1); }

  /// `count` points spanning [a, b] inclusive.
  static UniformGrid spanning(double a, double b, int count) {
    if (count < 2) throw InputError("grid needs at least 2 points");
    return {a, (b - a) / (count - 1), count};
  }
};

/// Second-order derivative of uniformly sampled columns (rows are samples):
/// central differences inside, one-sided three-point stencils at both ends.
inline Matrix finite_diff(const Matrix& samples, double dt) {
  const auto m = samples.rows();
  if (m < 5) throw InputError("finite_diff needs at least 5 samples, got " + std::to_string(m));
  if (!(dt > 0.0)) throw InputError("finite_diff needs dt > 0");
  Matrix d(m, samples.cols());
  const double inv2 = 1.0 / (2.0 * dt);
  d.row(0) = (-3.0 * samples.row(0) + 4.0 * samples.row(1) - samples.row(2)) * inv2;
  for (Eigen::Index k = 1; k + 1 < m; ++k) d.row(k) = (samples.row(k + 1) - samples.row(k - 1)) * inv2;
  d.row(m - 1) = (3.0 * samples.row(m - 1) - 4.0 * samples.row(m - 2) + samples.row(m - 3)) * inv2;
  return d;
}

/// Per-column bound on the truncation error of finite_diff, estimated as
/// dt^2 * max|f'''| with f''' taken from third differences of the samples.
inline Vector finite_diff_error_bound(const Matrix& samples, double dt) {
  const auto m = samples.rows();
  Vector bound = Vector::Zero(samples.cols());
  if (m < 4) return bound;
  for (Eigen::Index k = 0; k + 3 < m; ++k) {
    const Vector d3 = (samples.row(k + 3) - 3.0 * samples.row(k + 2) + 3.0 * samples.row(k + 1) -
                       samples.row(k))
                          .transpose()
                          .cwiseAbs();
    bound = bound.cwiseMax(d3);
  }
  return bound / dt;  // dt^2 * (d3 / dt^3)
}

}  // namespace carnot
