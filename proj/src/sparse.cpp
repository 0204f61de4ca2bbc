#include "sfab/sparse.hpp"

#include <algorithm>
#include <string>

namespace sfab {

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
  if (rows < 0 || cols < 0) fail(ErrorKind::Dimension, "sparse: negative dimension");
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      fail(ErrorKind::Dimension, "sparse: entry (" + std::to_string(t.row) + ", " +
                                     std::to_string(t.col) + ") out of range");
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size();) {
    const Index r = triplets[i].row;
    const Index c = triplets[i].col;
    cplx sum = 0.0;
    for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c; ++i) {
      sum += triplets[i].value;
    }
    m.col_idx_.push_back(c);
    m.values_.push_back(sum);
    ++m.row_ptr_[r + 1];
  }
  for (Index r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a, double drop_tol) {
  std::vector<Triplet> t;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (std::abs(a(i, j)) > drop_tol) t.push_back({i, j, a(i, j)});
  return from_triplets(a.rows(), a.cols(), std::move(t));
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

bool SparseMatrix::is_real() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](const cplx& v) { return v.imag() == 0.0; });
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
  for (Index r = 0; r < rows_; ++r)
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d(r, col_idx_[p]) += values_[p];
  return d;
}

std::vector<Triplet> SparseMatrix::to_triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r)
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) t.push_back({r, col_idx_[p], values_[p]});
  return t;
}

cplx SparseMatrix::coeff(Index row, Index col) const {
  const auto begin = col_idx_.begin() + row_ptr_[row];
  const auto end = col_idx_.begin() + row_ptr_[row + 1];
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void spmv(const SparseMatrix& a, const Vector& x, Vector& y) {
  require_dims(a.cols() == x.size(), "spmv: matrix has " + std::to_string(a.cols()) +
                                         " columns, vector has length " +
                                         std::to_string(x.size()));
  y.resize(a.rows());
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& v = a.values();
  for (Index r = 0; r < a.rows(); ++r) {
    cplx acc = 0.0;
    for (Index p = rp[r]; p < rp[r + 1]; ++p) acc += v[p] * x(ci[p]);
    y(r) = acc;
  }
}

Vector spmv(const SparseMatrix& a, const Vector& x) {
  Vector y;
  spmv(a, x, y);
  return y;
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  require_dims(a.cols() == b.rows(), "sparse multiply: inner dimensions differ");
  std::vector<Triplet> t;
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      const Index k = a.col_idx()[p];
      for (Index q = b.row_ptr()[k]; q < b.row_ptr()[k + 1]; ++q) {
        t.push_back({r, b.col_idx()[q], a.values()[p] * b.values()[q]});
      }
    }
  }
  return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(t));
}

LinearOperator::LinearOperator(Index n, ApplyFn apply) : n_(n), apply_(std::move(apply)) {}

LinearOperator LinearOperator::from_sparse(std::shared_ptr<const SparseMatrix> a) {
  require_dims(a->rows() == a->cols(), "operator: sparse matrix must be square");
  const Index n = a->rows();
  return LinearOperator(n, [a = std::move(a)](const Vector& x, Vector& y) { spmv(*a, x, y); });
}

LinearOperator LinearOperator::from_sparse(SparseMatrix a) {
  return from_sparse(std::make_shared<const SparseMatrix>(std::move(a)));
}

LinearOperator LinearOperator::from_dense(DenseMatrix a) {
  require_dims(a.rows() == a.cols(), "operator: dense matrix must be square");
  const Index n = a.rows();
  return LinearOperator(n, [a = std::move(a)](const Vector& x, Vector& y) { y.noalias() = a * x; });
}

LinearOperator LinearOperator::squared(LinearOperator q) {
  const Index n = q.size();
  return LinearOperator(n, [q = std::move(q)](const Vector& x, Vector& y) {
    Vector tmp;
    q.apply_(x, tmp);
    q.apply_(tmp, y);
  });
}

void LinearOperator::apply(const Vector& x, Vector& y) const {
  require_dims(x.size() == n_, "operator: vector length " + std::to_string(x.size()) +
                                   " does not match size " + std::to_string(n_));
  ++*count_;
  apply_(x, y);
}

Vector LinearOperator::apply(const Vector& x) const {
  Vector y;
  apply(x, y);
  return y;
}

DenseMatrix LinearOperator::to_dense() const {
  DenseMatrix d(n_, n_);
  Vector e = Vector::Zero(n_);
  Vector col;
  for (Index j = 0; j < n_; ++j) {
    e(j) = 1.0;
    apply_(e, col);
    d.col(j) = col;
    e(j) = 0.0;
  }
  return d;
}

}  // namespace sfab
