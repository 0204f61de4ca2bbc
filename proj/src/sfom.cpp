#include "sfab/sfom.hpp"

#include <cmath>
#include <sstream>

#include "sfab/linalg.hpp"

namespace sfab {

namespace {

SfomDiagnostics base_diagnostics(const WhitenedBasis& wb) {
  SfomDiagnostics d;
  d.eps_hat = wb.eps_hat;
  d.basis_condition = triangular_condition_estimate(wb.r);
  d.pinv_used = wb.pinv_used;
  if (wb.pinv_used) d.warnings.push_back("sketched basis is rank deficient; pseudoinverse of R used");
  return d;
}

DenseMatrix matfun_sketched(const FunctionSpec& f, const DenseMatrix& m,
                            const DenseMatfunOptions& options, DenseMatfunInfo* info) {
  try {
    return dense_matfun(f, m, options, info);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Solver) throw;
    fail(ErrorKind::Solver, std::string("sketched FOM: ") + e.what() + " (critical sketched Ritz value)");
  }
}

// Whitened coordinates sum_i w_i (t_i I + M)^{-1} Q^H S b.
Vector quadrature_whitened(const WhitenedBasis& wb, const QuadratureRule& rule) {
  const Index m = wb.dim();
  Vector acc = Vector::Zero(m);
  DenseMatrix shifted(m, m);
  for (Index i = 0; i < rule.size(); ++i) {
    shifted = wb.m_matrix;
    shifted.diagonal().array() += rule.nodes(i);
    Eigen::PartialPivLU<DenseMatrix> lu(shifted);
    if (!(lu.rcond() >= 1e-14)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "sketched FOM: quadrature node collision, t_i + M singular at t_i = " << rule.nodes(i);
      fail(ErrorKind::Solver, msg.str());
    }
    const Vector y = lu.solve(wb.qsb);
    for (Index j = 0; j < m; ++j) acc(j) += rule.weights(i) * y(j);
  }
  return acc;
}

}  // namespace

std::string to_string(SfomForm form) {
  switch (form) {
    case SfomForm::Closed: return "closed";
    case SfomForm::Quadrature: return "quadrature";
    case SfomForm::HHat: return "h-hat";
  }
  return "?";
}

SfomResult sfom_closed(const WhitenedBasis& wb, const FunctionSpec& f, const DenseMatfunOptions& options) {
  SfomResult res;
  res.form = SfomForm::Closed;
  res.diagnostics = base_diagnostics(wb);
  DenseMatfunInfo info;
  const DenseMatrix fm = matfun_sketched(f, wb.m_matrix, options, &info);
  if (info.used_quadrature) {
    res.diagnostics.quad_ell = info.quad_ell;
    res.diagnostics.warnings.push_back("ill-conditioned eigenvectors; f(M) evaluated by quadrature");
  }
  res.coeffs = wb.to_raw(fm * wb.qsb);
  return res;
}

SfomResult sfom_quadrature(const WhitenedBasis& wb, const QuadratureRule& rule) {
  SfomResult res;
  res.form = SfomForm::Quadrature;
  res.diagnostics = base_diagnostics(wb);
  res.diagnostics.quad_ell = rule.ell;
  const Vector ritz = sketched_ritz(wb);
  for (auto& w : node_proximity_warnings(rule, ritz)) res.diagnostics.warnings.push_back(std::move(w));
  res.coeffs = wb.to_raw(quadrature_whitened(wb, rule));
  return res;
}

SfomResult sfom_quadrature_adaptive(const WhitenedBasis& wb, const FunctionSpec& f, double tol,
                                    Index ell1, Index ell2, const RuleContext& ctx, Index cap) {
  QuadratureRule last;
  const AdaptResult ar = adapt_quadrature(
      [&](Index ell) {
        last = make_rule(f, ell, ctx);
        return quadrature_whitened(wb, last);
      },
      ell1, ell2, tol, cap);
  SfomResult res;
  res.form = SfomForm::Quadrature;
  res.diagnostics = base_diagnostics(wb);
  res.diagnostics.quad_ell = ar.ell;
  const QuadratureRule accepted = make_rule(f, ar.ell, ctx);
  for (auto& w : node_proximity_warnings(accepted, sketched_ritz(wb)))
    res.diagnostics.warnings.push_back(std::move(w));
  res.coeffs = wb.to_raw(ar.value);
  return res;
}

SfomResult sfom_hhat(const ArnoldiProcess& proc, Index m, const FunctionSpec& f,
                     const DenseMatfunOptions& options) {
  if (!proc.sketch()) fail(ErrorKind::Config, "sfom_hhat: process was run without a sketch");
  require_dims(m >= 1 && m <= proc.m(), "sfom_hhat: dimension not reached");
  DenseMatrix hhat = proc.hessenberg(m);
  const double hsub = proc.h_sub(m - 1);
  SfomResult res;
  res.form = SfomForm::HHat;
  res.diagnostics.eps_hat = proc.eps().eps_hat;
  if (hsub != 0.0) {
    require_dims(proc.sketched_columns() >= m + 1, "sfom_hhat: sketch of v_{m+1} missing");
    const DenseMatrix sv = proc.sv(m + 1);
    const LeastSquaresResult ls = least_squares(sv.leftCols(m), sv.col(m));
    if (ls.rank_deficient) res.diagnostics.warnings.push_back("sfom_hhat: rank-deficient sketched basis");
    hhat.col(m - 1) += hsub * ls.x;
    res.diagnostics.basis_condition = triangular_condition_estimate(thin_qr(sv.leftCols(m)).r);
  }
  DenseMatfunInfo info;
  const DenseMatrix fh = matfun_sketched(f, hhat, options, &info);
  if (info.used_quadrature) res.diagnostics.quad_ell = info.quad_ell;
  res.coeffs = proc.b_norm() * fh.col(0);
  return res;
}

double fom_distance_bound(const WhitenedBasis& wb, const FunctionSpec& f, const DenseMatrix& rayleigh_raw,
                          double eps, double b_norm) {
  if (!(eps >= 0.0 && eps < 1.0)) fail(ErrorKind::Config, "fom_distance_bound: need 0 <= eps < 1");
  require_dims(rayleigh_raw.rows() == wb.raw_dim() && rayleigh_raw.cols() == wb.raw_dim(),
               "fom_distance_bound: Rayleigh quotient has wrong size");
  // W = V R^{-1} gives W^+ A W = R (V^+ A V) R^{-1}
  const DenseMatrix rq = wb.pinv_used
                             ? DenseMatrix(wb.r_pinv.completeOrthogonalDecomposition().pseudoInverse() *
                                           rayleigh_raw * wb.r_pinv)
                             : DenseMatrix(wb.r.triangularView<Eigen::Upper>()
                                               .solve<Eigen::OnTheRight>(wb.r * rayleigh_raw));
  const double diff = spectral_norm(dense_matfun(f, rq) - dense_matfun(f, wb.m_matrix));
  return std::sqrt((1.0 + eps) / (1.0 - eps)) * b_norm * diff;
}

}  // namespace sfab
