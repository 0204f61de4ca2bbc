#pragma once

#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "sfab/sketch.hpp"
#include "sfab/sparse.hpp"

namespace sfab {

enum class BasisPolicy {
  Full,     // keep every basis vector
  Window,   // keep the last k+1 vectors only
  TwoPass,  // window in the first pass, regenerate in a second pass
};

BasisPolicy parse_policy(const std::string& name);
std::string to_string(BasisPolicy policy);

struct KrylovOptions {
  Index k = 4;  // truncation length of the Gram-Schmidt recurrence
  Index m_max = 100;
  BasisPolicy policy = BasisPolicy::Full;
  double breakdown_tol = 1e-14;
};

/// k-truncated Arnoldi with incremental sketching.
///
/// After construction the process holds v_1, A v_1 and their sketches. Each
/// step() orthogonalizes w = A v_j against v_{max(1,j-k+1)}..v_j by modified
/// Gram-Schmidt, normalizes to v_{j+1}, and immediately forms A v_{j+1} and
/// both sketches, so at dimension m the process has used m+1 matvecs and
/// holds m+1 sketched columns. No reorthogonalization.
class ArnoldiProcess {
 public:
  /// `sketch` may be null (pass two of the two-pass method needs no sketches).
  ArnoldiProcess(LinearOperator a, const Vector& b, std::shared_ptr<const SketchOperator> sketch,
                 const KrylovOptions& options);

  /// Extends the basis by one vector. Returns false (without work) once
  /// m == m_max or after a breakdown. A step that detects breakdown still
  /// completes column m of H (with h_{m+1,m} = 0), sets breakdown() and
  /// returns false; the sketched blocks then have m columns instead of m+1.
  bool step();
  /// Steps until dimension m (or breakdown); returns the dimension reached.
  Index run_to(Index m);

  Index m() const noexcept { return m_; }
  Index k() const noexcept { return opt_.k; }
  const KrylovOptions& options() const noexcept { return opt_; }
  bool breakdown() const noexcept { return breakdown_; }
  double b_norm() const noexcept { return b_norm_; }
  Index size() const noexcept { return a_.size(); }
  const LinearOperator& op() const noexcept { return a_; }
  const std::shared_ptr<const SketchOperator>& sketch() const noexcept { return sketch_; }

  /// Leading (m+1) x m block of the band Hessenberg matrix (zeros outside the band).
  DenseMatrix hessenberg_ext(Index m) const;
  /// Leading m x m block.
  DenseMatrix hessenberg(Index m) const;
  /// h_{j+1,j} in 0-based column numbering (j = 0 is the first column).
  double h_sub(Index j) const { return h_(j + 1, j).real(); }
  const std::vector<double>& subdiagonals() const noexcept { return subdiag_; }

  /// Sketched basis S v_1..S v_cols; columns available: m+1 (or m after breakdown).
  DenseMatrix sv(Index cols) const { return sv_.leftCols(cols); }
  DenseMatrix sav(Index cols) const { return sav_.leftCols(cols); }
  Index sketched_columns() const noexcept { return sketched_cols_; }
  /// S b = ||b|| S v_1.
  Vector sb() const { return b_norm_ * sv_.col(0); }

  /// Largest |‖S v_j‖² − 1| over the basis vectors sketched so far.
  const EmbeddingEstimate& eps() const noexcept { return eps_; }

  /// Number of basis vectors currently held and the high-water mark.
  Index held_vectors() const noexcept { return static_cast<Index>(window_.size()); }
  Index peak_basis_vectors() const noexcept { return peak_held_; }

  /// Full policy only: V_cols (N x cols), cols <= m+1.
  DenseMatrix basis(Index cols) const;
  /// Most recent basis vector v_{index+1} if still held (0-based index).
  const Vector* held_vector(Index index) const;
  /// Index of the most recent basis vector (0-based); m after a normal step.
  Index last_index() const noexcept { return first_held_ + held_vectors() - 1; }

  long long matvecs() const noexcept { return a_.matvec_count(); }

 private:
  void push_vector(Vector v);
  void sketch_current();

  LinearOperator a_;
  std::shared_ptr<const SketchOperator> sketch_;
  KrylovOptions opt_;
  double b_norm_ = 0.0;
  Index m_ = 0;
  bool breakdown_ = false;

  std::deque<Vector> window_;  // v_{first_held_+1} ..; never trimmed under Full
  Index first_held_ = 0;
  Index peak_held_ = 0;

  Vector w_;  // A v_last
  DenseMatrix h_;
  std::vector<double> subdiag_;
  DenseMatrix sv_, sav_;
  Index sketched_cols_ = 0;
  EmbeddingEstimate eps_;
};

/// x += c * v with a fixed scalar loop, so every assembly path performs the
/// same floating-point operations in the same order.
void axpy(Vector& x, cplx c, const Vector& v);

/// sum_j coeffs[j] v_{j+1} in ascending order from an explicit basis.
Vector assemble(const DenseMatrix& basis, const Vector& coeffs);

/// Whitened sketch of a Krylov basis: S V_m = Q R.
///
/// When R is numerically singular its pseudoinverse is used instead, and the
/// whitened coordinates shrink to the numerical rank r: q becomes s x r, the
/// map back to raw coordinates is r_pinv (m x r) and M is r x r.
struct WhitenedBasis {
  DenseMatrix q;             // s x m
  DenseMatrix r;             // m x m
  DenseMatrix sav_whitened;  // S A V_m R^{-1}
  DenseMatrix m_matrix;      // Q^H S A V_m R^{-1}
  Vector sb;                 // S b
  Vector qsb;                // Q^H S b
  bool rank_deficient = false;
  bool pinv_used = false;
  DenseMatrix r_pinv;  // only when pinv_used
  double eps_hat = 0.0;  // running distortion estimate of the process, if any

  /// Whitened dimension (the numerical rank when pinv_used).
  Index dim() const noexcept { return q.cols(); }
  /// Number of raw basis vectors.
  Index raw_dim() const noexcept { return r.cols(); }
  /// R^{-1} y (or R^+ y): coefficients in raw-basis coordinates.
  Vector to_raw(const Vector& y) const;
};

/// Whitening from explicit sketched blocks.
WhitenedBasis whiten(const DenseMatrix& sv, const DenseMatrix& sav, const Vector& sb);
/// Whitening of the first m sketched columns of a process.
WhitenedBasis whiten(const ArnoldiProcess& proc, Index m);

/// Eigenvalues of Q^H S A V_m R^{-1}.
Vector sketched_ritz(const WhitenedBasis& wb);

struct TwoPassStats {
  Index peak_basis_vectors = 0;
  long long matvecs = 0;
};

/// Second pass: regenerates v_1..v_m with the same truncated recurrence and
/// returns sum_j coeffs[j] v_{j+1} for every coefficient vector given (each
/// of length <= the largest m). Only k+1 basis vectors are held at a time.
/// If `expected_subdiag` is supplied the regenerated h_{j+1,j} must match it
/// bitwise; a mismatch is an Internal error.
std::vector<Vector> two_pass_assemble(const LinearOperator& a, const Vector& b,
                                      const std::vector<Vector>& coeffs, Index k,
                                      const std::vector<double>* expected_subdiag = nullptr,
                                      TwoPassStats* stats = nullptr);

Vector two_pass_assemble(const LinearOperator& a, const Vector& b, const Vector& coeffs, Index k,
                         const std::vector<double>* expected_subdiag = nullptr,
                         TwoPassStats* stats = nullptr);

}  // namespace sfab
