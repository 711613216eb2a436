#pragma once

#include <cmath>

#include <Eigen/SVD>

#include "carnot/equations.hpp"
#include "carnot/flag.hpp"

namespace carnot {

/// Orthonormal basis (as columns) of the numerical nullspace of `m`:
/// singular values at or below tol * sigma_max count as zero.
inline Matrix nullspace(const Matrix& m, double tol = 1e-10) {
  if (m.cols() == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  int rank = 0;
  if (smax > 0.0)
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > tol * smax) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

/// m_ij = sum_{k>r} alpha_ijk lambda_k for i, j <= r.
struct TwoStepMatrix {
  Matrix m;
  Vector lambda_tail;
};

inline void require_two_step(const LieAlgebra& a, const char* what) {
  const auto lcs = lower_central_series(a);
  if (!lcs.nilpotent || lcs.nilpotency_class > 2)
    throw PreconditionError(std::string(what) + ": algebra '" + a.name() + "' is not 2-step nilpotent");
}

inline TwoStepMatrix two_step_matrix(const LieAlgebra& a, const Vector& lambda) {
  if (lambda.size() != a.dim()) throw InputError("two_step_matrix: covector must have n components");
  require_two_step(a, "two_step_matrix");
  const int r = a.rank();
  TwoStepMatrix out{Matrix::Zero(r, r), lambda.tail(a.dim() - r)};
  for (const auto& s : a.entries()) {
    const int i = s.i - 1, j = s.j - 1, k = s.k - 1;
    if (i < r && j < r && k >= r) {
      out.m(i, j) += s.c * lambda[k];
      out.m(j, i) -= s.c * lambda[k];
    }
  }
  return out;
}

/// Ker M; admissible directions for an abnormal curve in the 2-step case.
inline Matrix kernel(const TwoStepMatrix& m, double tol = 1e-10) { return nullspace(m.m, tol); }

/// Coefficients beta_ijl with e_l = sum_{i,j<=r} beta_ijl [e_i, e_j] for l > r.
struct BetaLeftInverse {
  int rank = 0;
  Matrix a_flat;  ///< r^2 x (n-r): row i*r+j (0-based), column k-r holds alpha_ijk
  Matrix b_flat;  ///< same layout for beta
  Matrix product;  ///< A^T B
  double defect = 0.0;  ///< max |A^T B - I|
  bool verified = false;

  /// 1-based indices, l > r.
  double beta(int i, int j, int l) const { return b_flat((i - 1) * rank + (j - 1), l - rank - 1); }
};

/// Minimum-norm solution of A^T B = I, then verification of the identity.
inline BetaLeftInverse beta_left_inverse(const LieAlgebra& a, double tol = 1e-10) {
  require_two_step(a, "beta_left_inverse");
  const int n = a.dim(), r = a.rank(), q = n - r;
  BetaLeftInverse out;
  out.rank = r;
  out.a_flat = Matrix::Zero(r * r, q);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = r; k < n; ++k) out.a_flat(i * r + j, k - r) = a.alpha(i, j, k);
  if (q == 0) {
    out.b_flat = Matrix::Zero(r * r, 0);
    out.product = Matrix::Zero(0, 0);
    out.verified = true;
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(tol);
  cod.compute(out.a_flat.transpose());
  if (cod.rank() < q)
    throw InfeasibleSystem("beta_left_inverse: brackets of D span only " + std::to_string(cod.rank()) +
                           " of the " + std::to_string(q) + " complementary directions");
  out.b_flat = cod.solve(Matrix::Identity(q, q));
  out.product = out.a_flat.transpose() * out.b_flat;
  out.defect = (out.product - Matrix::Identity(q, q)).cwiseAbs().maxCoeff();
  out.verified = out.defect <= tol;
  return out;
}

/// For a constant covector lambda (with lambda_1..r = 0) the abnormal
/// equations reduce to C gamma = 0 with C_ij = sum_{k>r} alpha_ijk lambda_k,
/// i = 1..n, j = 1..r. Returns a basis of the admissible constant controls.
inline Matrix constant_abnormal_controls(const LieAlgebra& a, const Vector& lambda, double tol = 1e-10) {
  if (lambda.size() != a.dim()) throw InputError("covector must have n components");
  const int r = a.rank();
  Matrix c(a.dim(), r);
  for (int j = 0; j < r; ++j) c.col(j) = abnormal_contraction(a, Vector::Unit(r, j), lambda);
  return nullspace(c, tol);
}

}  // namespace carnot
