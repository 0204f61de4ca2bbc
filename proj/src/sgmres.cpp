#include "sfab/sgmres.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "sfab/linalg.hpp"
#include "sfab/oracles.hpp"

namespace sfab {

namespace {

RuleContext rule_context(const WhitenedBasis& wb, const FunctionSpec& f, double beta) {
  RuleContext ctx;
  const Vector ritz = sketched_ritz(wb);
  if (f.classification() == FunctionClass::Entire) {
    ctx.ritz = ritz;
  } else {
    ctx.beta = beta > 0.0 ? beta : stieltjes_scale(ritz);
  }
  return ctx;
}

Vector accumulate(const QuadratureRule& rule, const std::vector<Vector>& ys, Index dim) {
  Vector acc = Vector::Zero(dim);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const cplx w = rule.weights(static_cast<Index>(i));
    for (Index j = 0; j < dim; ++j) acc(j) += w * ys[i](j);
  }
  return acc;
}

}  // namespace

std::vector<Vector> sgmres_node_solutions(const WhitenedBasis& wb, const QuadratureRule& rule,
                                          bool fast_normal_eq, RealVector* residuals,
                                          Index* rank_deficient) {
  const Index r = wb.dim();
  const DenseMatrix& b_mat = wb.sav_whitened;
  std::vector<Vector> ys(static_cast<std::size_t>(rule.size()));
  if (residuals) residuals->resize(rule.size());
  if (rank_deficient) *rank_deficient = 0;

  DenseMatrix gram;
  Vector bsb;
  if (fast_normal_eq) {
    gram = b_mat.adjoint() * b_mat;
    bsb = b_mat.adjoint() * wb.sb;
  }
  DenseMatrix x(wb.q.rows(), r);
  for (Index i = 0; i < rule.size(); ++i) {
    const cplx t = rule.nodes(i);
    x = t * wb.q + b_mat;
    Vector y;
    if (fast_normal_eq) {
      // X^H X = |t|^2 I + conj(t) M + t M^H + B^H B, X^H Sb = conj(t) Q^H Sb + B^H Sb
      DenseMatrix normal = gram + std::conj(t) * wb.m_matrix + t * wb.m_matrix.adjoint();
      normal.diagonal().array() += std::norm(t);
      Eigen::LDLT<DenseMatrix> ldlt(normal);
      y = ldlt.solve(std::conj(t) * wb.qsb + bsb);
      if (ldlt.info() != Eigen::Success || !y.allFinite()) {
        const LeastSquaresResult ls = least_squares(x, wb.sb);
        y = ls.x;
        if (rank_deficient && ls.rank_deficient) ++*rank_deficient;
      }
    } else {
      const LeastSquaresResult ls = least_squares(x, wb.sb);
      y = ls.x;
      if (rank_deficient && ls.rank_deficient) ++*rank_deficient;
    }
    if (residuals) (*residuals)(i) = (wb.sb - x * y).norm();
    ys[static_cast<std::size_t>(i)] = std::move(y);
  }
  return ys;
}

SgmresResult sgmres_solve(const WhitenedBasis& wb, const QuadratureRule& rule, bool fast_normal_eq) {
  SgmresResult res;
  const std::vector<Vector> ys =
      sgmres_node_solutions(wb, rule, fast_normal_eq, &res.per_node_residual_norms, &res.rank_deficient_nodes);
  res.y_whitened = accumulate(rule, ys, wb.dim());
  res.coeffs = wb.to_raw(res.y_whitened);
  res.ell_final = rule.ell;
  res.orders = {rule.ell};
  res.eps_hat = wb.eps_hat;
  res.rule = rule;
  if (wb.pinv_used) res.warnings.push_back("sketched basis is rank deficient; pseudoinverse of R used");
  if (res.rank_deficient_nodes > 0)
    res.warnings.push_back(std::to_string(res.rank_deficient_nodes) +
                           " node least-squares problems were rank deficient; minimal-norm solutions used");
  return res;
}

SgmresResult sgmres_solve(const WhitenedBasis& wb, const FunctionSpec& f, const SgmresOptions& options) {
  if (!has_quadrature_form(f)) fail(ErrorKind::Config, "sGMRES: " + f.name() + " has no quadrature representation");
  const RuleContext ctx = rule_context(wb, f, options.beta);
  const AdaptResult ar = adapt_quadrature(
      [&](Index ell) {
        const QuadratureRule rule = make_rule(f, ell, ctx);
        return accumulate(rule, sgmres_node_solutions(wb, rule, options.fast_normal_eq), wb.dim());
      },
      options.ell1, options.ell2, options.tol, options.cap);
  // Node diagnostics at the accepted order. The solutions are recomputed
  // bitwise identically, so y_whitened is taken from the adaptive loop.
  SgmresResult res = sgmres_solve(wb, make_rule(f, ar.ell, ctx), options.fast_normal_eq);
  res.y_whitened = ar.value;
  res.coeffs = wb.to_raw(ar.value);
  res.ell_final = ar.ell;
  res.orders = ar.orders;
  for (auto& w : node_proximity_warnings(res.rule, sketched_ritz(wb))) res.warnings.push_back(std::move(w));
  return res;
}

double error_estimate(const WhitenedBasis& wb_mplusd, const Vector& y_mplusd, const Vector& y_m, double eps_hat) {
  if (!(eps_hat >= 0.0 && eps_hat < 1.0)) fail(ErrorKind::Config, "error_estimate: need 0 <= eps_hat < 1");
  const Index n = wb_mplusd.raw_dim();
  require_dims(y_mplusd.size() == n && y_m.size() <= n, "error_estimate: coefficient lengths do not match");
  Vector diff = y_mplusd;
  diff.head(y_m.size()) -= y_m;
  const Vector sdiff = wb_mplusd.r.triangularView<Eigen::Upper>() * diff;
  return sdiff.norm() / std::sqrt(1.0 - eps_hat);
}

double quasi_optimality_constant(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) fail(ErrorKind::Config, "quasi-optimality constant needs 0 <= eps < 1");
  return std::sqrt((1.0 + eps) / (1.0 - eps));
}

ResidualReport residual_check(const DenseMatrix& a, const Vector& b, const DenseMatrix& basis,
                              const QuadratureRule& rule, const std::vector<Vector>& coeffs_per_node,
                              double eps_hat, double floor) {
  require_dims(static_cast<Index>(coeffs_per_node.size()) == rule.size(),
               "residual_check: one coefficient vector per node required");
  const Index m = basis.cols();
  ResidualReport rep;
  rep.c_eps = quasi_optimality_constant(eps_hat);
  rep.sketched_residuals.resize(rule.size());
  rep.gmres_residuals.resize(rule.size());
  const FullArnoldi arn = full_arnoldi(a, b, m);
  const DenseMatrix av = a * basis;
  const double norm_a = spectral_norm(a);
  for (Index i = 0; i < rule.size(); ++i) {
    const cplx t = rule.nodes(i);
    const Vector& y = coeffs_per_node[static_cast<std::size_t>(i)];
    const Vector r = b - (t * (basis * y) + av * y);
    rep.sketched_residuals(i) = r.norm();
    const GmresShiftResult g = full_gmres_shift(arn, t);
    rep.gmres_residuals(i) = g.residual_norm;
    // Residuals this close to the rounding level of b - (tI + A) x carry no
    // information about the ratio.
    if (g.residual_norm <= floor * (b.norm() + (std::abs(t) + norm_a) * g.x.norm())) {
      ++rep.skipped_nodes;
      continue;
    }
    rep.max_ratio = std::max(rep.max_ratio, rep.sketched_residuals(i) / g.residual_norm);
  }
  rep.within_bound = rep.max_ratio <= rep.c_eps + 1e-10;
  return rep;
}

StieltjesBoundParts stieltjes_bound_parts(const DenseMatrix& a, const FunctionSpec& f) {
  if (f.classification() != FunctionClass::Stieltjes)
    fail(ErrorKind::Config, "stieltjes_bound: " + f.name() + " is not a Stieltjes function");
  StieltjesBoundParts p;
  p.delta = hermitian_min_eig(hermitian_part(a));
  if (!(p.delta > 0.0)) fail(ErrorKind::Config, "stieltjes_bound: matrix is not positive real");
  p.norm_a = spectral_norm(a);
  const DenseMatrix inv = a.partialPivLu().inverse();
  p.rho = hermitian_min_eig(hermitian_part(inv));
  const double c = std::min(1.0, p.delta / p.norm_a);
  p.sin_beta0 = std::sqrt(std::max(0.0, 1.0 - c * c));
  p.c1 = p.norm_a * scalar_eval(f, p.rho * p.norm_a * p.norm_a).real();
  return p;
}

double stieltjes_bound(const DenseMatrix& a, const FunctionSpec& f, double eps, Index m, double b_norm) {
  const StieltjesBoundParts p = stieltjes_bound_parts(a, f);
  return p.c1 * quasi_optimality_constant(eps) * b_norm * std::pow(p.sin_beta0, static_cast<double>(m));
}

TwoPassReport run_sgmres_twopass(const LinearOperator& a, const Vector& b, const FunctionSpec& f, Index k,
                                 Index m, const SketchParams& sketch, const SgmresOptions& options) {
  KrylovOptions ko;
  ko.k = k;
  ko.m_max = m;
  ko.policy = BasisPolicy::TwoPass;
  // the counter is shared with every copy of `a`
  const long long before = a.matvec_count();
  ArnoldiProcess proc(a, b, std::make_shared<const SketchOperator>(sketch), ko);
  const Index reached = proc.run_to(m);
  const WhitenedBasis wb = whiten(proc, reached);
  const SgmresResult res = sgmres_solve(wb, f, options);
  const long long first_pass = a.matvec_count() - before;
  TwoPassStats stats;
  TwoPassReport out;
  out.approximant = two_pass_assemble(a, b, res.coeffs, k, &proc.subdiagonals(), &stats);
  out.coeffs = res.coeffs;
  out.m = reached;
  out.peak_basis_vectors = std::max(proc.peak_basis_vectors(), stats.peak_basis_vectors);
  out.matvecs = first_pass + stats.matvecs;
  out.ell_final = res.ell_final;
  return out;
}

}  // namespace sfab
