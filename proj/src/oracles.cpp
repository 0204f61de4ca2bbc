#include "sfab/oracles.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "sfab/linalg.hpp"

namespace sfab {

namespace {

template <class Op>
FullArnoldi full_arnoldi_impl(const Op& a, Index n, const Vector& b, Index m) {
  require_dims(n == b.size(), "full_arnoldi: shape mismatch");
  if (m < 1 || m > n) fail(ErrorKind::Config, "full_arnoldi: need 1 <= m <= N");
  FullArnoldi out;
  out.b_norm = b.norm();
  if (!(out.b_norm > 0.0)) fail(ErrorKind::Config, "full_arnoldi: zero right-hand side");
  out.v = DenseMatrix::Zero(n, m + 1);
  out.h = DenseMatrix::Zero(m + 1, m);
  out.v.col(0) = b / out.b_norm;
  Index j = 0;
  for (; j < m; ++j) {
    Vector w = a * Vector(out.v.col(j));
    const double wn = w.norm();
    for (int pass = 0; pass < 2; ++pass) {
      const Vector c = out.v.leftCols(j + 1).adjoint() * w;
      w -= out.v.leftCols(j + 1) * c;
      out.h.col(j).head(j + 1) += c;
    }
    const double hn = w.norm();
    if (!(hn > 1e-14 * wn) || j + 1 == n) {
      // invariant subspace (always the case at j+1 = N)
      if (!(hn > 1e-14 * wn)) {
        out.breakdown = true;
        ++j;
        break;
      }
    }
    out.h(j + 1, j) = hn;
    out.v.col(j + 1) = w / hn;
  }
  out.m = j;
  if (out.breakdown) {
    out.v.conservativeResize(n, out.m);
    out.h.conservativeResize(out.m + 1, out.m);
  }
  return out;
}

}  // namespace

FullArnoldi full_arnoldi(const DenseMatrix& a, const Vector& b, Index m) {
  require_dims(a.rows() == a.cols(), "full_arnoldi: shape mismatch");
  return full_arnoldi_impl(a, a.rows(), b, m);
}

FullArnoldi full_arnoldi(const LinearOperator& a, const Vector& b, Index m) {
  return full_arnoldi_impl(a, a.size(), b, m);
}

FullArnoldi truncate(const FullArnoldi& arn, Index m) {
  require_dims(m >= 1 && m <= arn.m, "truncate: dimension not reached");
  if (m == arn.m) return arn;
  FullArnoldi out;
  out.b_norm = arn.b_norm;
  out.m = m;
  out.v = arn.v.leftCols(m + 1);
  out.h = arn.h.topLeftCorner(m + 1, m);
  return out;
}

Vector exact_fab(const DenseMatrix& a, const Vector& b, const FunctionSpec& f) {
  require_dims(a.rows() == b.size(), "exact_fab: shape mismatch");
  return dense_matfun(f, a) * b;
}

namespace {

using EigenSparse = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

EigenSparse to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<cplx, int>> t;
  t.reserve(static_cast<std::size_t>(a.nnz()) + static_cast<std::size_t>(a.rows()));
  for (const Triplet& e : a.to_triplets())
    t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
  EigenSparse out(a.rows(), a.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

Vector stieltjes_resolvent_sum(const EigenSparse& a, const Vector& b, const QuadratureRule& rule) {
  EigenSparse id(a.rows(), a.cols());
  id.setIdentity();
  Vector acc = Vector::Zero(b.size());
  Eigen::SparseLU<EigenSparse> lu;
  for (Index i = 0; i < rule.size(); ++i) {
    EigenSparse shifted = a + rule.nodes(i) * id;
    shifted.makeCompressed();
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) fail(ErrorKind::Solver, "exact_fab_sparse: singular shifted system");
    acc += rule.weights(i) * lu.solve(b);
  }
  return acc;
}

}  // namespace

Vector exact_fab_sparse(const SparseMatrix& a, const Vector& b, const FunctionSpec& f, double rel_tol) {
  require_dims(a.rows() == a.cols() && a.rows() == b.size(), "exact_fab_sparse: shape mismatch");
  EigenSparse op = to_eigen(a);
  Vector rhs = b;
  FunctionSpec inner = f;
  if (f.kind == FunctionKind::SignViaInvSqrt) {
    rhs = op * b;
    op = (op * op).pruned();
    inner = FunctionSpec::inv_sqrt();
  } else if (f.kind == FunctionKind::SqrtViaInvSqrt) {
    rhs = op * b;
    inner = FunctionSpec::inv_sqrt();
  }
  if (inner.classification() != FunctionClass::Stieltjes || inner.kind == FunctionKind::Reciprocal)
    fail(ErrorKind::Config, "exact_fab_sparse: needs a Stieltjes function, got " + f.name());
  // substitution scale from the row-sum bound on the spectrum
  double hi = 0.0;
  for (Index k = 0; k < op.outerSize(); ++k)
    for (EigenSparse::InnerIterator it(op, k); it; ++it) hi = std::max(hi, std::abs(it.value()));
  hi *= 4.0;
  const double beta = std::sqrt(std::max(hi, 1e-300) * std::max(hi * 1e-4, 1e-300));
  Vector prev = stieltjes_resolvent_sum(op, rhs, stieltjes_rule(inner, 32, beta));
  for (Index ell = 64; ell <= 4096; ell *= 2) {
    Vector cur = stieltjes_resolvent_sum(op, rhs, stieltjes_rule(inner, ell, beta));
    if ((cur - prev).norm() <= rel_tol * cur.norm()) return cur;
    prev = std::move(cur);
  }
  fail(ErrorKind::Solver, "exact_fab_sparse: quadrature did not settle by 4096 nodes");
}

Vector full_fom(const FullArnoldi& arn, const FunctionSpec& f) {
  const Index m = arn.m;
  const DenseMatrix fh = dense_matfun(f, arn.h.topLeftCorner(m, m));
  return arn.b_norm * (arn.v.leftCols(m) * fh.col(0));
}

Vector full_fom(const DenseMatrix& a, const Vector& b, const FunctionSpec& f, Index m) {
  return full_fom(full_arnoldi(a, b, m), f);
}

double fom_shift_residual(const FullArnoldi& arn, cplx t) {
  const Index m = arn.m;
  if (arn.breakdown) return 0.0;
  DenseMatrix shifted = arn.h.topLeftCorner(m, m);
  shifted.diagonal().array() += t;
  Eigen::PartialPivLU<DenseMatrix> lu(shifted);
  const double rc = lu.rcond();
  if (!(rc > 1e-15)) fail(ErrorKind::Solver, "fom_shift_residual: tI + H_m is singular");
  Vector e1 = Vector::Zero(m);
  e1(0) = 1.0;
  const Vector y = lu.solve(e1);
  return std::abs(arn.b_norm * arn.h(m, m - 1) * y(m - 1));
}

GmresShiftResult full_gmres_shift(const FullArnoldi& arn, cplx t) {
  const Index m = arn.m;
  const Index rows = arn.breakdown ? m : m + 1;
  DenseMatrix hs = arn.h.topLeftCorner(rows, m);
  for (Index i = 0; i < m; ++i) hs(i, i) += t;
  Vector rhs = Vector::Zero(rows);
  rhs(0) = arn.b_norm;
  const LeastSquaresResult ls = least_squares(hs, rhs);
  GmresShiftResult out;
  out.x = arn.v.leftCols(m) * ls.x;
  out.residual_norm = ls.residual_norm;
  return out;
}

GmresShiftResult full_gmres_shift(const DenseMatrix& a, const Vector& b, cplx t, Index m) {
  return full_gmres_shift(full_arnoldi(a, b, m), t);
}

double best_approximation_error(const DenseMatrix& orthonormal_basis, const Vector& fab) {
  return (fab - orthonormal_basis * (orthonormal_basis.adjoint() * fab)).norm();
}

double best_approximation_error(const DenseMatrix& a, const Vector& b, const FunctionSpec& f, Index m) {
  const FullArnoldi arn = full_arnoldi(a, b, m);
  return best_approximation_error(arn.v.leftCols(arn.m), exact_fab(a, b, f));
}

double embedding_distortion(const SketchOperator& s, const DenseMatrix& basis) {
  const DenseMatrix w = thin_qr(basis).q;
  DenseMatrix sw(s.s(), w.cols());
  for (Index j = 0; j < w.cols(); ++j) sw.col(j) = s.apply(w.col(j));
  const RealVector sig = Eigen::BDCSVD<DenseMatrix>(sw).singularValues();
  double eps = 0.0;
  for (Index i = 0; i < sig.size(); ++i) eps = std::max(eps, std::abs(sig(i) * sig(i) - 1.0));
  // a short sketch (s < dim) annihilates part of the space
  if (sig.size() < w.cols()) eps = std::max(eps, 1.0);
  return eps;
}

DenseMatrix rayleigh_quotient(const DenseMatrix& a, const DenseMatrix& v) {
  return Eigen::CompleteOrthogonalDecomposition<DenseMatrix>(v).solve(a * v);
}

bool numerical_range_contains(const DenseMatrix& a, cplx z, double inflate, Index angles) {
  const double slack = inflate + 1e-12 * a.norm();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es;
  for (Index k = 0; k < angles; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(angles);
    const cplx rot = std::polar(1.0, -th);
    const DenseMatrix h = 0.5 * (rot * a + std::conj(rot) * a.adjoint());
    es.compute(h, Eigen::EigenvaluesOnly);
    const double support = es.eigenvalues().maxCoeff();
    if ((rot * z).real() > support + slack) return false;
  }
  return true;
}

}  // namespace sfab
