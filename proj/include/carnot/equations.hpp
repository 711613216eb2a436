#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carnot/finite_diff.hpp"
#include "carnot/flag.hpp"
#include "carnot/lie_algebra.hpp"

namespace carnot {

/// Point of T*G in exponential coordinates x and dual-frame coefficients h.
struct NormalState {
  Vector x;
  Vector h;
};

/// Right-hand side of the normal equations at a single instant.
struct NormalDerivative {
  Vector gamma;  ///< n components, zero past the rank
  Vector h_dot;
};

/// gamma_i = h_i (i <= r), gamma_j = 0 (j > r),
/// h_i' = -sum_{j<=r} sum_k alpha_ijk h_j h_k.
inline NormalDerivative normal_rhs(const LieAlgebra& a, const Vector& h) {
  if (h.size() != a.dim()) throw InputError("normal_rhs: h must have " + std::to_string(a.dim()) + " components");
  const int r = a.rank();
  NormalDerivative d{Vector::Zero(a.dim()), Vector::Zero(a.dim())};
  d.gamma.head(r) = h.head(r);
  for (const auto& s : a.entries()) {
    const int i = s.i - 1, j = s.j - 1, k = s.k - 1;
    if (j < r) d.h_dot[i] -= s.c * h[j] * h[k];
    if (i < r) d.h_dot[j] += s.c * h[i] * h[k];
  }
  return d;
}

inline NormalDerivative normal_rhs(const LieAlgebra& a, const NormalState& s) { return normal_rhs(a, s.h); }

/// H = 1/2 sum_{i<=r} h_i^2.
inline double hamiltonian(const LieAlgebra& a, const Vector& h) {
  if (h.size() != a.dim()) throw InputError("hamiltonian: h must have " + std::to_string(a.dim()) + " components");
  return 0.5 * h.head(a.rank()).squaredNorm();
}

/// c_i = sum_{j<=r} sum_{k>r} alpha_ijk gamma_j lambda_k for every i.
inline Vector abnormal_contraction(const LieAlgebra& a, const Vector& gamma_r, const Vector& lambda) {
  const int r = a.rank();
  Vector c = Vector::Zero(a.dim());
  for (const auto& s : a.entries()) {
    const int i = s.i - 1, j = s.j - 1, k = s.k - 1;
    if (k < r) continue;
    if (j < r) c[i] += s.c * gamma_r[j] * lambda[k];
    if (i < r) c[j] -= s.c * gamma_r[i] * lambda[k];
  }
  return c;
}

/// Time-sampled lift (x is not needed by either equation system).
/// Rows are samples. gamma has r columns, or n when vertical components are
/// supplied explicitly; coeffs holds lambda (abnormal) or h (normal).
struct LiftSamples {
  UniformGrid grid;
  Matrix gamma;
  Matrix coeffs;
  std::optional<Matrix> coeff_rates;  ///< exact time derivatives when known
};

/// Closed-form lift; every callable maps t to a coefficient vector.
struct AnalyticLift {
  std::function<Vector(double)> gamma;
  std::function<Vector(double)> coeffs;
  std::function<Vector(double)> coeff_rates;
};

inline LiftSamples sample(const AnalyticLift& lift, const UniformGrid& grid) {
  if (grid.count < 1) throw InputError("sampling grid is empty");
  const Vector g0 = lift.gamma(grid.t0);
  const Vector c0 = lift.coeffs(grid.t0);
  LiftSamples s{grid, Matrix(grid.count, g0.size()), Matrix(grid.count, c0.size()), Matrix(grid.count, c0.size())};
  for (int k = 0; k < grid.count; ++k) {
    const double t = grid.time(k);
    s.gamma.row(k) = lift.gamma(t).transpose();
    s.coeffs.row(k) = lift.coeffs(t).transpose();
    s.coeff_rates->row(k) = lift.coeff_rates(t).transpose();
  }
  return s;
}

struct ResidualNorms {
  double sup = 0.0;
  double l2 = 0.0;
  double allowance = 0.0;  ///< finite-difference error bound added to the tolerance
  bool resolved = true;    ///< false when that bound exceeds both the tolerance and the derivative itself
};

/// Residual magnitudes per equation of one system along a sampled lift.
struct ResidualReport {
  std::string system;  ///< "normal" or "abnormal"
  std::vector<std::pair<std::string, ResidualNorms>> equations;
  UniformGrid grid;
  double tolerance = 0.0;
  bool analytic_derivatives = false;
  bool pass = false;

  const ResidualNorms& at(const std::string& label) const {
    for (const auto& [l, r] : equations)
      if (l == label) return r;
    throw InputError("no residual labelled '" + label + "'");
  }

  double max_sup() const {
    double m = 0.0;
    for (const auto& e : equations) m = std::max(m, e.second.sup);
    return m;
  }
};

namespace detail {

class ResidualAccumulator {
 public:
  ResidualAccumulator(std::string system, const UniformGrid& grid, double tol, bool analytic) {
    rep_.system = std::move(system);
    rep_.grid = grid;
    rep_.tolerance = tol;
    rep_.analytic_derivatives = analytic;
  }

  std::size_t add(std::string label, double allowance = 0.0, bool resolved = true) {
    rep_.equations.push_back({std::move(label), ResidualNorms{0.0, 0.0, allowance, resolved}});
    return rep_.equations.size() - 1;
  }

  void record(std::size_t eq, double value) {
    auto& n = rep_.equations[eq].second;
    n.sup = std::max(n.sup, std::abs(value));
    n.l2 += value * value;
  }

  ResidualReport finish() {
    const double w = rep_.grid.count > 1 ? rep_.grid.dt : 1.0;
    rep_.pass = true;
    for (auto& [label, n] : rep_.equations) {
      n.l2 = std::sqrt(n.l2 * w);
      if (!n.resolved || !(n.sup <= rep_.tolerance + n.allowance)) rep_.pass = false;
    }
    return std::move(rep_);
  }

 private:
  ResidualReport rep_;
};

inline void check_lift_shape(const LieAlgebra& a, const LiftSamples& lift, const char* what) {
  const auto m = lift.grid.count;
  if (m < 1 || lift.gamma.rows() != m || lift.coeffs.rows() != m)
    throw InputError(std::string(what) + ": sample arrays must all have grid.count rows");
  if (lift.gamma.cols() != a.rank() && lift.gamma.cols() != a.dim())
    throw InputError(std::string(what) + ": gamma must have r or n columns");
  if (lift.coeffs.cols() != a.dim()) throw InputError(std::string(what) + ": lift must have n columns");
  if (lift.coeff_rates && (lift.coeff_rates->rows() != m || lift.coeff_rates->cols() != a.dim()))
    throw InputError(std::string(what) + ": derivative samples have the wrong shape");
  if (!lift.coeff_rates) {
    if (m < 5) throw InputError(std::string(what) + ": at least 5 samples are needed for finite differences");
    if (!(lift.grid.dt > 0.0)) throw InputError(std::string(what) + ": grid spacing must be positive");
  }
}

struct Rates {
  Matrix values;
  Vector allowance;
  std::vector<bool> resolved;
};

/// Exact rates if provided, else finite differences plus their error bound.
/// A column whose bound exceeds both `tol` and its largest finite-difference
/// rate is too coarsely sampled for the residual to mean anything.
inline Rates rates_of(const LiftSamples& lift, double tol) {
  const auto n = lift.coeffs.cols();
  if (lift.coeff_rates) return {*lift.coeff_rates, Vector::Zero(n), std::vector<bool>(static_cast<std::size_t>(n), true)};
  Rates r{finite_diff(lift.coeffs, lift.grid.dt), finite_diff_error_bound(lift.coeffs, lift.grid.dt), {}};
  for (Eigen::Index i = 0; i < n; ++i)
    r.resolved.push_back(!(r.allowance[i] > std::max(tol, r.values.col(i).cwiseAbs().maxCoeff())));
  return r;
}

}  // namespace detail

/// Residuals of the normal equations:
///   control_i  = gamma_i - h_i                                   (i <= r)
///   vertical_j = gamma_j                                         (j > r, when supplied)
///   costate_i  = h_i' + sum_{j<=r} sum_k alpha_ijk h_j h_k       (all i)
inline ResidualReport normal_residual(const LieAlgebra& a, const LiftSamples& lift, double tol) {
  detail::check_lift_shape(a, lift, "normal_residual");
  const int n = a.dim(), r = a.rank();
  const auto [rates, allowance, resolved] = detail::rates_of(lift, tol);
  detail::ResidualAccumulator acc("normal", lift.grid, tol, lift.coeff_rates.has_value());
  std::vector<std::size_t> control, vertical, costate;
  for (int i = 1; i <= r; ++i) control.push_back(acc.add("control_" + std::to_string(i)));
  if (lift.gamma.cols() == n)
    for (int j = r + 1; j <= n; ++j) vertical.push_back(acc.add("vertical_" + std::to_string(j)));
  for (int i = 1; i <= n; ++i)
    costate.push_back(acc.add("costate_" + std::to_string(i), allowance[i - 1], resolved[i - 1]));

  for (int s = 0; s < lift.grid.count; ++s) {
    const Vector h = lift.coeffs.row(s).transpose();
    for (int i = 0; i < r; ++i) acc.record(control[i], lift.gamma(s, i) - h[i]);
    for (std::size_t j = 0; j < vertical.size(); ++j) acc.record(vertical[j], lift.gamma(s, r + static_cast<int>(j)));
    const Vector f = normal_rhs(a, h).h_dot;
    for (int i = 0; i < n; ++i) acc.record(costate[i], rates(s, i) - f[i]);
  }
  return acc.finish();
}

/// Residuals of the abnormal equations:
///   annihilator_i = lambda_i                                     (i <= r)
///   vertical_j    = gamma_j                                      (j > r, when supplied)
///   algebraic_i   = sum_{j<=r} sum_{k>r} alpha_ijk gamma_j lambda_k           (i <= r)
///   costate_i     = lambda_i' + sum_{j<=r} sum_{k>r} alpha_ijk gamma_j lambda_k (i > r)
///
/// Throws InvalidLift when lambda comes within `zero_tol` (sup norm) of the
/// zero covector at some sample.
inline ResidualReport abnormal_residual(const LieAlgebra& a, const LiftSamples& lift, double tol,
                                        double zero_tol = 1e-10) {
  detail::check_lift_shape(a, lift, "abnormal_residual");
  const int n = a.dim(), r = a.rank();
  for (int s = 0; s < lift.grid.count; ++s) {
    if (lift.coeffs.row(s).cwiseAbs().maxCoeff() <= zero_tol)
      throw InvalidLift("abnormal lift meets the zero section at t = " + format_shortest(lift.grid.time(s)));
  }
  const auto [rates, allowance, resolved] = detail::rates_of(lift, tol);
  detail::ResidualAccumulator acc("abnormal", lift.grid, tol, lift.coeff_rates.has_value());
  std::vector<std::size_t> annihilator, vertical, algebraic, costate;
  for (int i = 1; i <= r; ++i) annihilator.push_back(acc.add("annihilator_" + std::to_string(i)));
  if (lift.gamma.cols() == n)
    for (int j = r + 1; j <= n; ++j) vertical.push_back(acc.add("vertical_" + std::to_string(j)));
  for (int i = 1; i <= r; ++i) algebraic.push_back(acc.add("algebraic_" + std::to_string(i)));
  for (int i = r + 1; i <= n; ++i)
    costate.push_back(acc.add("costate_" + std::to_string(i), allowance[i - 1], resolved[i - 1]));

  for (int s = 0; s < lift.grid.count; ++s) {
    const Vector lambda = lift.coeffs.row(s).transpose();
    const Vector g = lift.gamma.row(s).head(r).transpose();
    for (int i = 0; i < r; ++i) acc.record(annihilator[i], lambda[i]);
    for (std::size_t j = 0; j < vertical.size(); ++j) acc.record(vertical[j], lift.gamma(s, r + static_cast<int>(j)));
    const Vector c = abnormal_contraction(a, g, lambda);
    for (int i = 0; i < r; ++i) acc.record(algebraic[i], c[i]);
    for (int i = r; i < n; ++i) acc.record(costate[i - r], rates(s, i) + c[i]);
  }
  return acc.finish();
}

/// Outcome of testing lambda(t) in (D^2)^perp - (D^3)^perp at every sample.
struct RegularityClassification {
  bool regular = false;
  int samples = 0;
  int first_failure = -1;  ///< sample index, -1 when regular
  std::string reason;
  double max_d2_pairing = 0.0;  ///< sup_t max_{v in D^2 basis} |lambda(v)|
  double min_d3_pairing = 0.0;  ///< inf_t max_{v in D^3 basis} |lambda(v)|
};

/// `lambda_samples` has one covector per row.
inline RegularityClassification classify_regular(const Flag& flag, const Matrix& lambda_samples, double tol) {
  RegularityClassification out;
  out.samples = static_cast<int>(lambda_samples.rows());
  if (out.samples == 0) throw InputError("classify_regular: no samples");
  const Matrix& d2 = flag.level(2);
  const Matrix& d3 = flag.level(3);
  if (lambda_samples.cols() != d2.rows()) throw InputError("classify_regular: covector dimension mismatch");
  out.min_d3_pairing = std::numeric_limits<double>::infinity();
  for (int s = 0; s < out.samples; ++s) {
    const Eigen::RowVectorXd lam = lambda_samples.row(s);
    const double p2 = d2.cols() ? (lam * d2).cwiseAbs().maxCoeff() : 0.0;
    const double p3 = d3.cols() ? (lam * d3).cwiseAbs().maxCoeff() : 0.0;
    out.max_d2_pairing = std::max(out.max_d2_pairing, p2);
    out.min_d3_pairing = std::min(out.min_d3_pairing, p3);
    if (out.first_failure < 0 && p2 > tol) {
      out.first_failure = s;
      out.reason = "lambda does not annihilate D^2";
    } else if (out.first_failure < 0 && p3 <= tol) {
      out.first_failure = s;
      out.reason = "lambda annihilates D^3";
    }
  }
  out.regular = out.first_failure < 0;
  return out;
}

inline RegularityClassification classify_regular(const LieAlgebra& a, const Matrix& lambda_samples, double tol) {
  return classify_regular(compute_flag(a), lambda_samples, tol);
}

}  // namespace carnot
