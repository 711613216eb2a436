#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "carnot/lie_algebra.hpp"

namespace carnot {

/// Incrementally built orthonormal basis of a subspace of R^n.
///
/// New vectors enter by column-pivoted Gram-Schmidt: among the candidates the
/// one with the largest residual against the current basis is taken first,
/// and a residual norm at or below the absolute tolerance counts as dependent.
class OrthonormalSpan {
 public:
  explicit OrthonormalSpan(int ambient_dim, double tol = 1e-10)
      : n_(ambient_dim), tol_(tol), basis_(ambient_dim, 0) {}

  int ambient_dim() const noexcept { return n_; }
  int dim() const noexcept { return static_cast<int>(basis_.cols()); }
  double tolerance() const noexcept { return tol_; }
  const Matrix& basis() const noexcept { return basis_; }

  Vector residual(const Vector& v) const {
    Vector r = v;
    // two passes keep the basis orthonormal to working precision
    for (int pass = 0; pass < 2; ++pass)
      for (int c = 0; c < basis_.cols(); ++c) r -= basis_.col(c).dot(r) * basis_.col(c);
    return r;
  }

  bool contains(const Vector& v) const { return residual(v).norm() <= tol_; }

  /// Adds the span of the candidates; returns how many dimensions were gained.
  int add(std::vector<Vector> candidates) {
    const int before = dim();
    while (!candidates.empty()) {
      std::size_t best = 0;
      double best_norm = -1.0;
      Vector best_res;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        Vector r = residual(candidates[c]);
        const double nr = r.norm();
        if (nr > best_norm) {
          best_norm = nr;
          best = c;
          best_res = std::move(r);
        }
      }
      if (best_norm <= tol_ || dim() == n_) break;
      append(best_res / best_norm);
      candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return dim() - before;
  }

  int add(const Vector& v) { return add(std::vector<Vector>{v}); }

 private:
  void append(const Vector& unit) {
    basis_.conservativeResize(Eigen::NoChange, basis_.cols() + 1);
    basis_.col(basis_.cols() - 1) = unit;
  }

  int n_;
  double tol_;
  Matrix basis_;
};

inline std::vector<Vector> columns(const Matrix& m) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (int c = 0; c < m.cols(); ++c) out.emplace_back(m.col(c));
  return out;
}

/// Brackets of every `left` vector with every `right` vector.
inline std::vector<Vector> all_brackets(const LieAlgebra& a, const std::vector<Vector>& left,
                                        const std::vector<Vector>& right) {
  std::vector<Vector> out;
  out.reserve(left.size() * right.size());
  for (const auto& x : left)
    for (const auto& y : right) out.push_back(a.bracket(x, y));
  return out;
}

inline std::vector<Vector> horizontal_basis(const LieAlgebra& a) {
  std::vector<Vector> d;
  for (int i = 1; i <= a.rank(); ++i) d.push_back(a.basis_vector(i));
  return d;
}

struct FlagOptions {
  double rank_tol = 1e-10;
  int step_cap = 16;
};

/// The filtration D^1 = D, D^{k+1} = D^k + [D, D^k].
struct Flag {
  std::vector<Matrix> subspace_bases;  ///< orthonormal columns, one matrix per level
  std::vector<int> growth_vector;
  int step = 0;
  bool bracket_generating = false;
  bool graded = false;
  bool nilpotent = false;
  int nilpotency_class = 0;  ///< length of the lower central series; 0 if not nilpotent
  bool step_cap_reached = false;

  /// Basis of D^k (1-based); levels past the step return the stabilized space.
  const Matrix& level(int k) const {
    if (k < 1) throw InputError("flag level must be >= 1");
    return subspace_bases[static_cast<std::size_t>(std::min<int>(k, static_cast<int>(subspace_bases.size())) - 1)];
  }

  /// [g,[g,g]] = 0.
  bool two_step() const { return nilpotent && nilpotency_class <= 2; }
};

struct LowerCentralSeries {
  std::vector<int> dims;  ///< dim g^1 = n, dim g^2 = dim [g,g], ...
  bool nilpotent = false;
  int nilpotency_class = 0;
};

/// g^1 = g, g^{k+1} = [g, g^k], until it vanishes or stabilizes.
inline LowerCentralSeries lower_central_series(const LieAlgebra& a, const FlagOptions& opt = {}) {
  LowerCentralSeries out;
  std::vector<Vector> all;
  for (int i = 1; i <= a.dim(); ++i) all.push_back(a.basis_vector(i));
  std::vector<Vector> current = all;
  out.dims.push_back(a.dim());
  for (int k = 1; k <= opt.step_cap; ++k) {
    OrthonormalSpan next(a.dim(), opt.rank_tol);
    next.add(all_brackets(a, all, current));
    if (next.dim() == 0) {
      out.nilpotent = true;
      out.nilpotency_class = k;
      return out;
    }
    if (next.dim() == out.dims.back()) return out;  // stabilized at a nonzero ideal
    out.dims.push_back(next.dim());
    current = columns(next.basis());
  }
  return out;
}

inline Flag compute_flag(const LieAlgebra& a, const FlagOptions& opt = {}) {
  Flag f;
  const auto horizontal = horizontal_basis(a);

  OrthonormalSpan level(a.dim(), opt.rank_tol);
  level.add(horizontal);
  f.subspace_bases.push_back(level.basis());
  f.growth_vector.push_back(level.dim());
  for (int k = 1;; ++k) {
    OrthonormalSpan next = level;
    if (next.add(all_brackets(a, horizontal, columns(level.basis()))) == 0) break;
    if (k >= opt.step_cap) {
      f.step_cap_reached = true;
      break;
    }
    level = std::move(next);
    f.subspace_bases.push_back(level.basis());
    f.growth_vector.push_back(level.dim());
  }
  f.step = static_cast<int>(f.growth_vector.size());
  f.bracket_generating = f.growth_vector.back() == a.dim();

  // Grading: V^1 = D, V^{k+1} = [D, V^k]; graded when the V^k form a direct sum.
  OrthonormalSpan sum(a.dim(), opt.rank_tol);
  sum.add(horizontal);
  std::vector<Vector> layer = horizontal;
  f.graded = true;
  for (int k = 1;; ++k) {
    OrthonormalSpan next(a.dim(), opt.rank_tol);
    next.add(all_brackets(a, horizontal, layer));
    if (next.dim() == 0) break;
    if (k >= opt.step_cap || sum.add(columns(next.basis())) != next.dim()) {
      f.graded = false;
      break;
    }
    layer = columns(next.basis());
  }

  const auto lcs = lower_central_series(a, opt);
  f.nilpotent = lcs.nilpotent;
  f.nilpotency_class = lcs.nilpotency_class;
  return f;
}

/// dim [g,g] = n - r and D intersects [g,g] trivially.
inline bool horizontal_complements_derived(const LieAlgebra& a, double tol = 1e-10) {
  std::vector<Vector> all;
  for (int i = 1; i <= a.dim(); ++i) all.push_back(a.basis_vector(i));
  OrthonormalSpan derived(a.dim(), tol);
  derived.add(all_brackets(a, all, all));
  if (derived.dim() != a.dim() - a.rank()) return false;
  OrthonormalSpan total(a.dim(), tol);
  total.add(horizontal_basis(a));
  return total.add(columns(derived.basis())) == derived.dim();
}

struct JacobiViolation {
  int i, j, l, k;  ///< 1-based; i < j < l, k the output component
  double value;
};

struct ValidationReport {
  bool valid = true;
  std::vector<JacobiViolation> jacobi_violations;
  bool nilpotent = false;
  int nilpotency_class = 0;
  std::vector<int> lower_central_dims;
};

/// Checks the Jacobi identity componentwise over all i<j<l and reports
/// nilpotency. Antisymmetry holds by construction of LieAlgebra.
inline ValidationReport validate(const LieAlgebra& a, double jacobi_tol = 1e-12) {
  ValidationReport rep;
  const int n = a.dim();
  const double scale = std::max(1.0, a.max_abs_constant() * a.max_abs_constant());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int l = j + 1; l < n; ++l)
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int m = 0; m < n; ++m)
            s += a.alpha(i, j, m) * a.alpha(m, l, k) + a.alpha(j, l, m) * a.alpha(m, i, k) +
                 a.alpha(l, i, m) * a.alpha(m, j, k);
          if (std::abs(s) > jacobi_tol * scale) rep.jacobi_violations.push_back({i + 1, j + 1, l + 1, k + 1, s});
        }
  rep.valid = rep.jacobi_violations.empty();
  const auto lcs = lower_central_series(a);
  rep.nilpotent = lcs.nilpotent;
  rep.nilpotency_class = lcs.nilpotency_class;
  rep.lower_central_dims = lcs.dims;
  return rep;
}

}  // namespace carnot
