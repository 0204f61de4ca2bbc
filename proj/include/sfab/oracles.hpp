#pragma once

#include "sfab/matfun.hpp"
#include "sfab/sketch.hpp"
#include "sfab/sparse.hpp"
#include "sfab/types.hpp"

namespace sfab {

// Dense reference computations. All of these form N x N or N x m dense
// matrices and are meant for N up to a few thousand.

/// Arnoldi with full (twice-repeated classical) Gram-Schmidt. v has m+1
/// columns, h is (m+1) x m; on breakdown both are cut to the reached dimension.
struct FullArnoldi {
  DenseMatrix v;
  DenseMatrix h;
  double b_norm = 0.0;
  Index m = 0;
  bool breakdown = false;
};

FullArnoldi full_arnoldi(const DenseMatrix& a, const Vector& b, Index m);
FullArnoldi full_arnoldi(const LinearOperator& a, const Vector& b, Index m);
/// The leading dimension-m part of a longer full Arnoldi run (m < arn.m keeps
/// v_{m+1} and h_{m+1,m}).
FullArnoldi truncate(const FullArnoldi& arn, Index m);

/// f(A) b by dense evaluation of f(A).
Vector exact_fab(const DenseMatrix& a, const Vector& b, const FunctionSpec& f);

/// f(A) b for a Stieltjes f (or sign/sqrt built on one) from sparse LU
/// solves of (t_i I + A) x = b. The Gauss rule order is doubled from 32
/// until two consecutive results agree to rel_tol; Solver error past 4096.
/// Meant for sizes where dense evaluation of f(A) is too slow.
Vector exact_fab_sparse(const SparseMatrix& a, const Vector& b, const FunctionSpec& f, double rel_tol = 1e-13);

/// ||b|| V_m f(H_m) e_1 from a fully orthogonal basis.
Vector full_fom(const DenseMatrix& a, const Vector& b, const FunctionSpec& f, Index m);
Vector full_fom(const FullArnoldi& arn, const FunctionSpec& f);

/// |‖b‖ h_{m+1,m} e_m^T (tI + H_m)^{-1} e_1|: norm of the FOM residual for the shifted system.
double fom_shift_residual(const FullArnoldi& arn, cplx t);

struct GmresShiftResult {
  Vector x;
  double residual_norm = 0.0;
};

/// GMRES iterate for (tI + A) x = b over K_m(A, b).
GmresShiftResult full_gmres_shift(const DenseMatrix& a, const Vector& b, cplx t, Index m);
GmresShiftResult full_gmres_shift(const FullArnoldi& arn, cplx t);

/// ‖(I − W W^H) f(A) b‖ for an orthonormal basis W of K_m(A, b).
double best_approximation_error(const DenseMatrix& a, const Vector& b, const FunctionSpec& f, Index m);
double best_approximation_error(const DenseMatrix& orthonormal_basis, const Vector& fab);

/// Exact distortion of S on range(basis): max |σ² − 1| over the singular
/// values of S W with W an orthonormal basis of the same space.
double embedding_distortion(const SketchOperator& s, const DenseMatrix& basis);

/// V^+ A V
DenseMatrix rayleigh_quotient(const DenseMatrix& a, const DenseMatrix& v);

/// Whether z lies in the numerical range of A enlarged by `inflate`, tested
/// through the support function at `angles` directions.
bool numerical_range_contains(const DenseMatrix& a, cplx z, double inflate, Index angles = 360);

}  // namespace sfab
