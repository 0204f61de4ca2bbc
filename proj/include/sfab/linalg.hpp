#pragma once

#include "sfab/types.hpp"

namespace sfab {

/// Default size limit for dense eigen-decompositions and dense oracles.
inline constexpr Index kDefaultDenseLimit = 4000;

/// Thin QR factorization A = Q R with Q (rows x cols) having orthonormal
/// columns and R upper triangular with real nonnegative diagonal.
struct ThinQR {
  DenseMatrix q;
  DenseMatrix r;
  /// Set when some |r_kk| < 1e-14 * ||A||_F. The factors are still returned.
  bool rank_deficient = false;
};

ThinQR thin_qr(const DenseMatrix& a);

struct LeastSquaresResult {
  Vector x;
  double residual_norm = 0.0;
  Index rank = 0;
  /// True when the column-pivoted minimal-norm fallback was used.
  bool rank_deficient = false;
};

/// argmin ||A x - b|| via Householder QR. Rank-deficient systems fall back to
/// a complete orthogonal decomposition with threshold 1e-12 * ||A||, which
/// returns the minimal-norm solution.
LeastSquaresResult least_squares(const DenseMatrix& a, const Vector& b);

enum class EigenBackend {
  Eigen,         // Eigen::ComplexEigenSolver
  HessenbergQR,  // in-house Hessenberg reduction + shifted QR iteration
};

struct EigenDecomposition {
  Vector values;
  /// Unit-norm eigenvectors as columns (empty if not requested).
  DenseMatrix vectors;
};

struct EigOptions {
  EigenBackend backend = EigenBackend::Eigen;
  bool compute_vectors = true;
  Index dense_limit = kDefaultDenseLimit;
};

EigenDecomposition dense_eig(const DenseMatrix& a, const EigOptions& options = {});

/// Eigenvalues only; shorthand for dense_eig without vectors.
Vector dense_eigenvalues(const DenseMatrix& a,
                         EigenBackend backend = EigenBackend::Eigen);

/// Complex Schur form A = Z T Z^H computed by the in-house QR iteration.
/// Throws Solver error on non-convergence.
void schur_hessenberg_qr(const DenseMatrix& a, DenseMatrix& t, DenseMatrix& z);

/// (A + A^H) / 2
DenseMatrix hermitian_part(const DenseMatrix& a);

/// Smallest eigenvalue of a Hermitian matrix. Throws if A is not Hermitian to
/// 1e-12 * ||A||_F.
double hermitian_min_eig(const DenseMatrix& a);

/// Largest singular value.
double spectral_norm(const DenseMatrix& a);

/// sigma_max / sigma_min estimate from the R factor of a QR factorization,
/// using power and inverse power iterations on R. Returns +infinity for
/// zero or exactly singular input.
double condition_estimate(const DenseMatrix& a);

/// Condition estimate of an upper-triangular square factor.
double triangular_condition_estimate(const DenseMatrix& r);

}  // namespace sfab
