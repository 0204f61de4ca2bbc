#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "sfab/types.hpp"

namespace sfab {

struct Triplet {
  Index row = 0;
  Index col = 0;
  cplx value{0.0, 0.0};
};

/// Compressed-row sparse matrix with complex values. Real matrices are stored
/// with zero imaginary parts.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Builds from coordinate triplets; duplicate (row, col) entries are summed.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);
  static SparseMatrix from_dense(const DenseMatrix& a, double drop_tol = 0.0);
  static SparseMatrix identity(Index n);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return static_cast<Index>(values_.size()); }

  const std::vector<Index>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<Index>& col_idx() const noexcept { return col_idx_; }
  const std::vector<cplx>& values() const noexcept { return values_; }

  /// True if all imaginary parts are exactly zero.
  bool is_real() const;

  DenseMatrix to_dense() const;
  std::vector<Triplet> to_triplets() const;

  /// Entry lookup, O(log row length); zero if not stored.
  cplx coeff(Index row, Index col) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<cplx> values_;
};

/// y = A x. Throws a Dimension error on mismatch.
Vector spmv(const SparseMatrix& a, const Vector& x);
void spmv(const SparseMatrix& a, const Vector& x, Vector& y);

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// Matrix-free square operator with an application counter. Copies share the
/// counter, so a counted operator handed to a solver reports its matvecs back.
class LinearOperator {
 public:
  using ApplyFn = std::function<void(const Vector&, Vector&)>;

  LinearOperator() = default;
  LinearOperator(Index n, ApplyFn apply);

  static LinearOperator from_sparse(std::shared_ptr<const SparseMatrix> a);
  static LinearOperator from_sparse(SparseMatrix a);
  static LinearOperator from_dense(DenseMatrix a);
  /// x -> Q(Q x). One application counts as one matvec with the squared operator.
  static LinearOperator squared(LinearOperator q);

  Index size() const noexcept { return n_; }

  void apply(const Vector& x, Vector& y) const;
  Vector apply(const Vector& x) const;
  Vector operator*(const Vector& x) const { return apply(x); }

  long long matvec_count() const noexcept { return *count_; }
  void reset_count() const noexcept { *count_ = 0; }

  /// Dense representation, built column by column without touching the counter.
  DenseMatrix to_dense() const;

 private:
  Index n_ = 0;
  ApplyFn apply_;
  std::shared_ptr<long long> count_ = std::make_shared<long long>(0);
};

}  // namespace sfab
