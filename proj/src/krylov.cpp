#include "sfab/krylov.hpp"

#include <algorithm>

#include "sfab/linalg.hpp"

namespace sfab {

BasisPolicy parse_policy(const std::string& name) {
  if (name == "full") return BasisPolicy::Full;
  if (name == "window") return BasisPolicy::Window;
  if (name == "two-pass") return BasisPolicy::TwoPass;
  fail(ErrorKind::Config, "unknown basis policy '" + name + "'");
}

std::string to_string(BasisPolicy policy) {
  switch (policy) {
    case BasisPolicy::Full: return "full";
    case BasisPolicy::Window: return "window";
    case BasisPolicy::TwoPass: return "two-pass";
  }
  return "?";
}

namespace {

void axpy_raw(Vector& x, cplx c, const cplx* v) {
  cplx* xp = x.data();
  const Index n = x.size();
  for (Index i = 0; i < n; ++i) xp[i] += c * v[i];
}

}  // namespace

void axpy(Vector& x, cplx c, const Vector& v) {
  require_dims(x.size() == v.size(), "axpy: length mismatch");
  axpy_raw(x, c, v.data());
}

Vector assemble(const DenseMatrix& basis, const Vector& coeffs) {
  require_dims(coeffs.size() <= basis.cols(), "assemble: more coefficients than basis vectors");
  Vector x = Vector::Zero(basis.rows());
  for (Index j = 0; j < coeffs.size(); ++j) axpy_raw(x, coeffs(j), basis.col(j).data());
  return x;
}

ArnoldiProcess::ArnoldiProcess(LinearOperator a, const Vector& b,
                               std::shared_ptr<const SketchOperator> sketch,
                               const KrylovOptions& options)
    : a_(std::move(a)), sketch_(std::move(sketch)), opt_(options) {
  if (opt_.k < 1) fail(ErrorKind::Config, "arnoldi: k must be >= 1");
  if (opt_.m_max < 1) fail(ErrorKind::Config, "arnoldi: m_max must be >= 1");
  require_dims(b.size() == a_.size(), "arnoldi: rhs length does not match operator");
  if (sketch_) require_dims(sketch_->n() == a_.size(), "arnoldi: sketch size does not match operator");
  b_norm_ = b.norm();
  if (!(b_norm_ > 0.0)) fail(ErrorKind::Config, "arnoldi: right-hand side is zero");

  h_ = DenseMatrix::Zero(opt_.m_max + 1, opt_.m_max);
  if (sketch_) {
    sv_.resize(sketch_->s(), opt_.m_max + 1);
    sav_.resize(sketch_->s(), opt_.m_max + 1);
  }
  push_vector(b / b_norm_);
  a_.apply(window_.back(), w_);
  sketch_current();
}

void ArnoldiProcess::push_vector(Vector v) {
  if (opt_.policy != BasisPolicy::Full) {
    // keep only what the next orthogonalization needs plus the new vector
    while (static_cast<Index>(window_.size()) >= opt_.k + 1) {
      window_.pop_front();
      ++first_held_;
    }
  }
  window_.push_back(std::move(v));
  peak_held_ = std::max(peak_held_, static_cast<Index>(window_.size()));
}

void ArnoldiProcess::sketch_current() {
  if (!sketch_) return;
  const Index c = sketched_cols_;
  Vector tmp;
  sketch_->apply(window_.back(), tmp);
  sv_.col(c) = tmp;
  eps_ = update_eps(eps_, tmp);
  sketch_->apply(w_, tmp);
  sav_.col(c) = tmp;
  ++sketched_cols_;
}

bool ArnoldiProcess::step() {
  if (breakdown_ || m_ >= opt_.m_max) return false;
  const Index j = m_;  // w_ = A v_{j+1} in 1-based terms
  const double aw_norm = w_.norm();
  const Index first = std::max<Index>(0, j - opt_.k + 1);
  for (Index i = first; i <= j; ++i) {
    const Vector& vi = window_[static_cast<std::size_t>(i - first_held_)];
    const cplx hij = vi.dot(w_);
    h_(i, j) = hij;
    axpy(w_, -hij, vi);
  }
  const double hn = w_.norm();
  m_ = j + 1;
  if (!(hn > opt_.breakdown_tol * aw_norm)) {
    breakdown_ = true;
    subdiag_.push_back(0.0);
    return false;
  }
  h_(j + 1, j) = hn;
  subdiag_.push_back(hn);
  push_vector(w_ / hn);
  a_.apply(window_.back(), w_);
  sketch_current();
  return true;
}

Index ArnoldiProcess::run_to(Index m) {
  while (m_ < m && step()) {
  }
  return m_;
}

DenseMatrix ArnoldiProcess::hessenberg_ext(Index m) const {
  require_dims(m <= m_, "arnoldi: requested Hessenberg block beyond current dimension");
  return h_.topLeftCorner(m + 1, m);
}

DenseMatrix ArnoldiProcess::hessenberg(Index m) const {
  require_dims(m <= m_, "arnoldi: requested Hessenberg block beyond current dimension");
  return h_.topLeftCorner(m, m);
}

DenseMatrix ArnoldiProcess::basis(Index cols) const {
  if (first_held_ != 0) fail(ErrorKind::Config, "arnoldi: full basis not stored under this policy");
  require_dims(cols <= held_vectors(), "arnoldi: requested more basis vectors than available");
  DenseMatrix v(size(), cols);
  for (Index j = 0; j < cols; ++j) v.col(j) = window_[static_cast<std::size_t>(j)];
  return v;
}

const Vector* ArnoldiProcess::held_vector(Index index) const {
  if (index < first_held_ || index > last_index()) return nullptr;
  return &window_[static_cast<std::size_t>(index - first_held_)];
}

Vector WhitenedBasis::to_raw(const Vector& y) const {
  if (pinv_used) return r_pinv * y;
  return r.triangularView<Eigen::Upper>().solve(y);
}

WhitenedBasis whiten(const DenseMatrix& sv, const DenseMatrix& sav, const Vector& sb) {
  require_dims(sv.cols() >= 1, "whiten: empty basis");
  require_dims(sv.rows() == sav.rows() && sv.cols() == sav.cols(),
               "whiten: SV and SAV shapes differ");
  require_dims(sb.size() == sv.rows(), "whiten: Sb length does not match sketch");
  require_dims(sv.rows() >= sv.cols(), "whiten: sketch dimension smaller than basis dimension");
  WhitenedBasis wb;
  ThinQR f = thin_qr(sv);
  wb.q = std::move(f.q);
  wb.r = std::move(f.r);
  wb.rank_deficient = f.rank_deficient;
  if (wb.rank_deficient) {
    // R^+ with singular values below 1e-12 sigma_max dropped. The whitened
    // coordinates are restricted to the retained range, so M carries no
    // spurious zero eigenvalues from the discarded directions.
    Eigen::BDCSVD<DenseMatrix> svd(wb.r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sig = svd.singularValues();
    const double cut = 1e-12 * sig(0);
    Index rank = 0;
    while (rank < sig.size() && sig(rank) > cut) ++rank;
    rank = std::max<Index>(rank, 1);
    wb.r_pinv = svd.matrixV().leftCols(rank) * sig.head(rank).cwiseInverse().asDiagonal();
    wb.q = (wb.q * svd.matrixU().leftCols(rank)).eval();
    wb.pinv_used = true;
    wb.sav_whitened = sav * wb.r_pinv;
  } else {
    wb.sav_whitened = wb.r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(sav);
  }
  wb.m_matrix = wb.q.adjoint() * wb.sav_whitened;
  wb.sb = sb;
  wb.qsb = wb.q.adjoint() * sb;
  return wb;
}

WhitenedBasis whiten(const ArnoldiProcess& proc, Index m) {
  if (!proc.sketch()) fail(ErrorKind::Config, "whiten: process was run without a sketch");
  require_dims(m >= 1 && m <= proc.sketched_columns(),
               "whiten: dimension " + std::to_string(m) + " not available");
  WhitenedBasis wb = whiten(proc.sv(m), proc.sav(m), proc.sb());
  wb.eps_hat = proc.eps().eps_hat;
  return wb;
}

Vector sketched_ritz(const WhitenedBasis& wb) { return dense_eigenvalues(wb.m_matrix); }

std::vector<Vector> two_pass_assemble(const LinearOperator& a, const Vector& b,
                                      const std::vector<Vector>& coeffs, Index k,
                                      const std::vector<double>* expected_subdiag,
                                      TwoPassStats* stats) {
  Index mmax = 0;
  for (const Vector& c : coeffs) mmax = std::max(mmax, c.size());
  std::vector<Vector> out(coeffs.size(), Vector::Zero(a.size()));
  if (mmax == 0) return out;

  // fresh counter so stats report this pass only
  LinearOperator counted(a.size(), [a](const Vector& x, Vector& y) { a.apply(x, y); });
  KrylovOptions opt;
  opt.k = k;
  opt.m_max = std::max<Index>(mmax - 1, 1);
  opt.policy = BasisPolicy::Window;
  ArnoldiProcess proc(counted, b, nullptr, opt);

  auto accumulate = [&](Index j) {
    const Vector* v = proc.held_vector(j);
    if (!v) fail(ErrorKind::Internal, "two-pass: basis vector evicted before use");
    for (std::size_t c = 0; c < coeffs.size(); ++c)
      if (j < coeffs[c].size()) axpy(out[c], coeffs[c](j), *v);
  };
  accumulate(0);
  for (Index j = 1; j < mmax; ++j) {
    const bool ok = proc.step();
    const double h = proc.subdiagonals().back();
    if (expected_subdiag) {
      if (static_cast<std::size_t>(j - 1) >= expected_subdiag->size() ||
          (*expected_subdiag)[static_cast<std::size_t>(j - 1)] != h) {
        fail(ErrorKind::Internal, "two-pass: regenerated basis differs from first pass at step " +
                                      std::to_string(j));
      }
    }
    if (!ok) {
      fail(ErrorKind::Internal,
           "two-pass: breakdown at step " + std::to_string(j) + " before reaching m=" +
               std::to_string(mmax));
    }
    accumulate(j);
  }
  if (stats) {
    stats->peak_basis_vectors = proc.peak_basis_vectors();
    stats->matvecs = proc.matvecs();
  }
  return out;
}

Vector two_pass_assemble(const LinearOperator& a, const Vector& b, const Vector& coeffs, Index k,
                         const std::vector<double>* expected_subdiag, TwoPassStats* stats) {
  return two_pass_assemble(a, b, std::vector<Vector>{coeffs}, k, expected_subdiag, stats)[0];
}

}  // namespace sfab
