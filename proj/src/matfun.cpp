#include "sfab/matfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace sfab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

std::string fmt(cplx z) {
  std::ostringstream ss;
  ss.precision(6);
  ss << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return ss.str();
}

// |Im z| small relative to |z|: treat as real for branch-cut purposes.
bool near_real(cplx z) { return std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z)); }

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(Index n, RealVector& x, RealVector& w) {
  x.resize(n);
  w.resize(n);
  const double nn = static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (nn + 0.5));
    double pp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (Index j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jj = static_cast<double>(j);
        p1 = ((2.0 * jj - 1.0) * z * p2 - (jj - 1.0) * p3) / jj;
      }
      pp = nn * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x(i) = z;
    w(i) = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

// Gauss-Jacobi for weight (1-x)^a (1+x)^b by Golub-Welsch. Returns nodes and
// the squared first eigenvector components (weights / mu0).
void gauss_jacobi(Index n, double a, double b, RealVector& x, RealVector& v0sq) {
  RealVector diag(n), sub(std::max<Index>(n - 1, 0));
  for (Index k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + a + b;
    diag(k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
  }
  for (Index k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + a + b;
    double beta;
    if (k == 1) {
      beta = 4.0 * (1.0 + a) * (1.0 + b) / ((a + b + 2.0) * (a + b + 2.0) * (a + b + 3.0));
    } else {
      beta = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) / (s * s * (s + 1.0) * (s - 1.0));
    }
    sub(k - 1) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) fail(ErrorKind::Solver, "gauss-jacobi: eigensolver failed");
  x = es.eigenvalues();
  v0sq = es.eigenvectors().row(0).transpose().array().square();
}

double chebyshev_theta(Index i, Index ell) {
  return (2.0 * static_cast<double>(i) + 1.0) * kPi / (2.0 * static_cast<double>(ell));
}

}  // namespace

FunctionClass FunctionSpec::classification() const {
  switch (kind) {
    case FunctionKind::InvSqrt:
    case FunctionKind::InvPow:
    case FunctionKind::Log1pOverZ:
    case FunctionKind::CustomStieltjes:
    case FunctionKind::Reciprocal:
      return FunctionClass::Stieltjes;
    case FunctionKind::ExpNeg:
      return FunctionClass::Entire;
    case FunctionKind::SignViaInvSqrt:
    case FunctionKind::SqrtViaInvSqrt:
    case FunctionKind::Custom:
      return FunctionClass::Other;
  }
  return FunctionClass::Other;
}

std::string FunctionSpec::name() const {
  switch (kind) {
    case FunctionKind::InvSqrt: return "inv-sqrt";
    case FunctionKind::InvPow: {
      std::ostringstream ss;
      ss << "inv-pow:" << alpha;
      return ss.str();
    }
    case FunctionKind::Log1pOverZ: return "log1p-over-z";
    case FunctionKind::ExpNeg: return "exp-neg";
    case FunctionKind::SignViaInvSqrt: return "sign";
    case FunctionKind::SqrtViaInvSqrt: return "sqrt";
    case FunctionKind::Reciprocal: return "reciprocal";
    case FunctionKind::CustomStieltjes:
    case FunctionKind::Custom:
      return label.empty() ? "custom" : label;
  }
  return "?";
}

FunctionSpec FunctionSpec::inv_sqrt() { return {}; }

FunctionSpec FunctionSpec::inv_pow(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::Config, "inv-pow: alpha must lie in (0, 1)");
  FunctionSpec f;
  f.kind = FunctionKind::InvPow;
  f.alpha = alpha;
  return f;
}

FunctionSpec FunctionSpec::log1p_over_z() {
  FunctionSpec f;
  f.kind = FunctionKind::Log1pOverZ;
  return f;
}

FunctionSpec FunctionSpec::exp_neg() {
  FunctionSpec f;
  f.kind = FunctionKind::ExpNeg;
  return f;
}

FunctionSpec FunctionSpec::sign() {
  FunctionSpec f;
  f.kind = FunctionKind::SignViaInvSqrt;
  return f;
}

FunctionSpec FunctionSpec::sqrt() {
  FunctionSpec f;
  f.kind = FunctionKind::SqrtViaInvSqrt;
  return f;
}

FunctionSpec FunctionSpec::reciprocal() {
  FunctionSpec f;
  f.kind = FunctionKind::Reciprocal;
  return f;
}

FunctionSpec FunctionSpec::custom_stieltjes(std::function<double(double)> density, std::string label) {
  if (!density) fail(ErrorKind::Config, "custom-stieltjes: density callback required");
  FunctionSpec f;
  f.kind = FunctionKind::CustomStieltjes;
  f.density = std::move(density);
  f.label = std::move(label);
  return f;
}

FunctionSpec FunctionSpec::custom(std::function<cplx(cplx)> scalar,
                                  std::function<DenseMatrix(const DenseMatrix&)> dense,
                                  std::string label) {
  if (!scalar) fail(ErrorKind::Config, "custom function: scalar callback required");
  FunctionSpec f;
  f.kind = FunctionKind::Custom;
  f.scalar = std::move(scalar);
  f.dense = std::move(dense);
  f.label = std::move(label);
  return f;
}

FunctionSpec FunctionSpec::monomial(int p) {
  if (p < 0) fail(ErrorKind::Config, "monomial: negative power");
  return custom([p](cplx z) { return std::pow(z, p); },
                [p](const DenseMatrix& m) {
                  DenseMatrix r = DenseMatrix::Identity(m.rows(), m.cols());
                  for (int i = 0; i < p; ++i) r = (r * m).eval();
                  return r;
                },
                "z^" + std::to_string(p));
}

FunctionSpec parse_function(const std::string& text) {
  if (text == "inv-sqrt") return FunctionSpec::inv_sqrt();
  if (text == "log1p-over-z") return FunctionSpec::log1p_over_z();
  if (text == "exp-neg") return FunctionSpec::exp_neg();
  if (text == "sign") return FunctionSpec::sign();
  if (text == "sqrt") return FunctionSpec::sqrt();
  if (text == "reciprocal") return FunctionSpec::reciprocal();
  if (text.rfind("inv-pow:", 0) == 0) {
    const std::string num = text.substr(8);
    char* end = nullptr;
    const double alpha = std::strtod(num.c_str(), &end);
    if (num.empty() || end != num.c_str() + num.size()) {
      fail(ErrorKind::Config, "inv-pow: cannot parse exponent '" + num + "'");
    }
    return FunctionSpec::inv_pow(alpha);
  }
  fail(ErrorKind::Config, "unknown function '" + text + "'");
}

bool on_branch_cut(const FunctionSpec& f, cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return true;
  switch (f.kind) {
    case FunctionKind::InvSqrt:
    case FunctionKind::InvPow:
    case FunctionKind::CustomStieltjes:
      return z.real() <= 0.0 && near_real(z);
    case FunctionKind::SqrtViaInvSqrt:
      // sqrt is continuous at 0, so a numerically zero eigenvalue is allowed
      return z.real() < -1e-12 * std::max(1.0, std::abs(z)) && near_real(z);
    case FunctionKind::Log1pOverZ:
      return z.real() <= -1.0 && near_real(z);
    case FunctionKind::Reciprocal:
      return z == cplx(0.0, 0.0);
    case FunctionKind::SignViaInvSqrt:
      return std::abs(z.real()) <= 1e-12 * std::max(1.0, std::abs(z));
    case FunctionKind::ExpNeg:
    case FunctionKind::Custom:
      return false;
  }
  return false;
}

cplx scalar_eval(const FunctionSpec& f, cplx z) {
  if (on_branch_cut(f, z)) {
    fail(ErrorKind::Config, f.name() + ": argument " + fmt(z) + " lies on the branch cut");
  }
  switch (f.kind) {
    case FunctionKind::InvSqrt:
      return 1.0 / std::sqrt(z);
    case FunctionKind::InvPow:
      return std::exp(-f.alpha * std::log(z));
    case FunctionKind::Log1pOverZ:
      if (std::abs(z) < 1e-8) return 1.0 - z / 2.0 + z * z / 3.0;
      if (z.imag() == 0.0) return std::log1p(z.real()) / z.real();
      return std::log(1.0 + z) / z;
    case FunctionKind::ExpNeg:
      return std::exp(-z);
    case FunctionKind::SignViaInvSqrt:
      return z.real() > 0.0 ? 1.0 : -1.0;
    case FunctionKind::SqrtViaInvSqrt:
      if (near_real(z) && z.real() <= 0.0) return 0.0;
      return std::sqrt(z);
    case FunctionKind::Reciprocal:
      return 1.0 / z;
    case FunctionKind::CustomStieltjes: {
      cplx prev = stieltjes_rule(f, 64).apply_scalar(z);
      for (Index ell = next_quadrature_order(64); ell <= 8192; ell = next_quadrature_order(ell)) {
        const cplx cur = stieltjes_rule(f, ell).apply_scalar(z);
        if (std::abs(cur - prev) <= 1e-14 * std::abs(cur)) return cur;
        prev = cur;
      }
      return prev;
    }
    case FunctionKind::Custom:
      return f.scalar(z);
  }
  return 0.0;
}

cplx QuadratureRule::apply_scalar(cplx z) const {
  cplx acc = 0.0;
  for (Index i = 0; i < nodes.size(); ++i) acc += weights(i) / (nodes(i) + z);
  return acc;
}

QuadratureRule stieltjes_rule(const FunctionSpec& f, Index ell, double beta) {
  if (ell < 1) fail(ErrorKind::Config, "quadrature: need at least one node");
  if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorKind::Config, "quadrature: scale must be positive");
  QuadratureRule rule;
  rule.ell = ell;
  rule.scale = beta;
  rule.nodes.resize(ell);
  rule.weights.resize(ell);
  const double l = static_cast<double>(ell);

  switch (f.kind) {
    case FunctionKind::InvSqrt:
    case FunctionKind::SqrtViaInvSqrt:
    case FunctionKind::SignViaInvSqrt:
    case FunctionKind::InvPow:
      if (f.kind != FunctionKind::InvPow || f.alpha == 0.5) {
        // Gauss-Chebyshev; 1 - x = 2 sin^2(theta/2), 1 + x = 2 cos^2(theta/2)
        rule.family = "gauss-chebyshev";
        for (Index i = 0; i < ell; ++i) {
          const double th = chebyshev_theta(i, ell);
          const double c2 = std::cos(th / 2.0) * std::cos(th / 2.0);
          const double tn = std::tan(th / 2.0);
          rule.nodes(i) = beta * tn * tn;
          rule.weights(i) = (2.0 * std::sqrt(beta) / l) / (2.0 * c2);
        }
      } else {
        rule.family = "gauss-jacobi";
        const double a = -f.alpha, b = f.alpha - 1.0;
        RealVector x, v0sq;
        gauss_jacobi(ell, a, b, x, v0sq);
        const double bpow = std::pow(beta, 1.0 - f.alpha);
        for (Index i = 0; i < ell; ++i) {
          rule.nodes(i) = beta * (1.0 - x(i)) / (1.0 + x(i));
          rule.weights(i) = 2.0 * v0sq(i) * bpow / (1.0 + x(i));
        }
      }
      break;
    case FunctionKind::Log1pOverZ: {
      rule.family = "gauss-legendre";
      RealVector x, lam;
      gauss_legendre(ell, x, lam);
      for (Index i = 0; i < ell; ++i) {
        const double xp = 1.0 + x(i), xm = 1.0 - x(i);
        rule.nodes(i) = 1.0 + beta * xm / xp;
        rule.weights(i) = lam(i) * 2.0 * beta / ((xp + beta * xm) * xp);
      }
      break;
    }
    case FunctionKind::CustomStieltjes:
      rule.family = "gauss-chebyshev";
      for (Index i = 0; i < ell; ++i) {
        const double th = chebyshev_theta(i, ell);
        const double c = std::cos(th / 2.0);
        const double tn = std::tan(th / 2.0);
        const double t = beta * tn * tn;
        rule.nodes(i) = t;
        rule.weights(i) = (kPi / l) * std::sin(th) * f.density(t) * 2.0 * beta / (4.0 * c * c * c * c);
      }
      break;
    case FunctionKind::Reciprocal:
      rule.family = "resolvent";
      rule.ell = 1;
      rule.nodes = Vector::Zero(1);
      rule.weights = Vector::Ones(1);
      break;
    case FunctionKind::ExpNeg:
    case FunctionKind::Custom:
      fail(ErrorKind::Config, f.name() + " has no Stieltjes representation");
  }
  return rule;
}

double stieltjes_scale(const Vector& values) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (Index i = 0; i < values.size(); ++i) {
    const double a = std::abs(values(i));
    if (!(a > 0.0) || !std::isfinite(a)) continue;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (!(hi > 0.0)) return 1.0;
  return std::sqrt(lo * hi);
}

QuadratureRule contour_rule(const FunctionSpec& f, const ContourParams& p) {
  if (f.classification() != FunctionClass::Entire) {
    fail(ErrorKind::Config, f.name() + " is not entire; contour rule unavailable");
  }
  if (!(p.c > 0.0) || !(p.half_width > 0.0) || p.ell < 1) {
    fail(ErrorKind::Config, "contour: need c > 0, U > 0, ell >= 1");
  }
  QuadratureRule rule;
  rule.family = "parabolic-contour";
  rule.ell = p.ell;
  rule.contour = p;
  rule.nodes.resize(p.ell);
  rule.weights.resize(p.ell);
  const double h = 2.0 * p.half_width / static_cast<double>(p.ell);
  for (Index i = 0; i < p.ell; ++i) {
    const double u = -p.half_width + (static_cast<double>(i) + 0.5) * h;
    const cplx gamma = p.a + kI * u - p.c * u * u;
    const cplx dgamma = kI - 2.0 * p.c * u;
    // g(t) = f(-t); (1/2 pi i) oint g(t) (tI + A)^{-1} dt
    rule.nodes(i) = gamma;
    rule.weights(i) = scalar_eval(f, -gamma) * dgamma * h / (2.0 * kPi * kI);
  }
  return rule;
}

double rule_scalar_error(const QuadratureRule& rule, const FunctionSpec& f, const Vector& samples) {
  double err = 0.0, scale = 0.0;
  for (Index i = 0; i < samples.size(); ++i) {
    const cplx ref = scalar_eval(f, samples(i));
    err = std::max(err, std::abs(rule.apply_scalar(samples(i)) - ref));
    scale = std::max(scale, std::abs(ref));
  }
  if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
  return scale > 0.0 ? err / scale : err;
}

ContourParams choose_contour(const FunctionSpec& f, const Vector& ritz, Index ell) {
  if (ritz.size() == 0) fail(ErrorKind::Config, "contour: no Ritz values");
  if (!ritz.allFinite()) fail(ErrorKind::Solver, "contour: non-finite Ritz value");
  // Lambda = -ritz
  double max_re = -std::numeric_limits<double>::infinity();
  double min_re = std::numeric_limits<double>::infinity();
  double max_im = 0.0;
  for (Index i = 0; i < ritz.size(); ++i) {
    const cplx lam = -ritz(i);
    max_re = std::max(max_re, lam.real());
    min_re = std::min(min_re, lam.real());
    max_im = std::max(max_im, std::abs(lam.imag()));
  }
  const double spread = std::max({max_re - min_re, max_im, 1.0});

  std::vector<double> margins;
  for (int p = -2; p <= 7; ++p) margins.push_back(std::ldexp(1.0, p));
  for (int q = 1; q <= 5; ++q) margins.push_back(spread * std::ldexp(1.0, -q));

  ContourParams best;
  double best_err = std::numeric_limits<double>::infinity();
  for (double delta : margins) {
    for (double factor : {0.25, 0.5, 1.0, 2.0}) {
      const double a = max_re + delta;
      double c = (a - min_re) / ((max_im + delta) * (max_im + delta));
      for (Index i = 0; i < ritz.size(); ++i) {
        const cplx lam = -ritz(i);
        const double im2 = lam.imag() * lam.imag();
        if (im2 > 0.0) c = std::min(c, (a - 0.5 * delta - lam.real()) / im2);
      }
      c *= factor;
      if (!(c > 0.0) || !std::isfinite(c)) continue;
      ContourParams p;
      p.a = a;
      p.c = c;
      p.half_width = std::sqrt(std::max(a, 0.0) / c + 38.0 / c);
      p.ell = ell;
      const double err = rule_scalar_error(contour_rule(f, p), f, ritz);
      if (err < best_err) {
        best_err = err;
        best = p;
      }
    }
  }
  if (!(best_err <= 1e-2)) {
    fail(ErrorKind::Solver, "contour: no parabola encloses the Ritz values accurately (best scalar error " +
                                std::to_string(best_err) + ")");
  }
  return best;
}

QuadratureRule contour_rule(const FunctionSpec& f, const Vector& ritz, Index ell) {
  return contour_rule(f, choose_contour(f, ritz, ell));
}

bool has_quadrature_form(const FunctionSpec& f) {
  return f.classification() != FunctionClass::Other || f.is_composite();
}

QuadratureRule make_rule(const FunctionSpec& f, Index ell, const RuleContext& ctx) {
  if (f.is_composite()) return stieltjes_rule(FunctionSpec::inv_sqrt(), ell, ctx.beta);
  switch (f.classification()) {
    case FunctionClass::Stieltjes:
      return stieltjes_rule(f, ell, ctx.beta);
    case FunctionClass::Entire:
      return contour_rule(f, ctx.ritz, ell);
    case FunctionClass::Other:
      break;
  }
  fail(ErrorKind::Config, f.name() + " has no quadrature representation");
}

Index next_quadrature_order(Index ell) {
  const auto grown = static_cast<Index>(std::floor(std::sqrt(2.0) * static_cast<double>(ell)));
  return std::max(grown, ell + 1);
}

AdaptResult adapt_quadrature(const std::function<Vector(Index)>& evaluate, Index ell1, Index ell2,
                             double tol, Index cap) {
  if (!(ell1 < ell2)) fail(ErrorKind::Config, "adapt_quadrature: need ell1 < ell2");
  if (!(tol > 0.0)) fail(ErrorKind::Config, "adapt_quadrature: tolerance must be positive");
  if (ell2 > cap) fail(ErrorKind::Config, "adapt_quadrature: initial order exceeds cap");
  AdaptResult res;
  Vector q1 = evaluate(ell1);
  Vector q2 = evaluate(ell2);
  res.orders = {ell1, ell2};
  res.evaluations = 2;
  double diff = (q1 - q2).norm();
  while (!(diff < tol)) {
    const Index next = next_quadrature_order(ell2);
    if (next > cap) {
      fail(ErrorKind::Solver, "adaptive quadrature: order cap " + std::to_string(cap) +
                                  " reached without meeting tol (last discrepancy " +
                                  std::to_string(diff) + " at ell=" + std::to_string(ell2) + ")");
    }
    q1 = std::move(q2);
    ell2 = next;
    q2 = evaluate(ell2);
    res.orders.push_back(ell2);
    ++res.evaluations;
    diff = (q1 - q2).norm();
  }
  res.value = std::move(q2);
  res.ell = ell2;
  res.discrepancy = diff;
  return res;
}

namespace {

// sum_i w_i (t_i I + M)^{-1}
DenseMatrix resolvent_sum(const QuadratureRule& rule, const DenseMatrix& m) {
  const Index n = m.rows();
  DenseMatrix acc = DenseMatrix::Zero(n, n);
  const DenseMatrix eye = DenseMatrix::Identity(n, n);
  for (Index i = 0; i < rule.size(); ++i) {
    DenseMatrix shifted = m;
    shifted.diagonal().array() += rule.nodes(i);
    acc += rule.weights(i) * Eigen::PartialPivLU<DenseMatrix>(shifted).solve(eye);
  }
  return acc;
}

DenseMatrix flatten_back(const Vector& v, Index n) {
  return Eigen::Map<const DenseMatrix>(v.data(), n, n);
}

}  // namespace

DenseMatrix dense_matfun(const FunctionSpec& f, const DenseMatrix& m, const DenseMatfunOptions& options,
                         DenseMatfunInfo* info) {
  require_dims(m.rows() == m.cols(), "dense_matfun: matrix must be square");
  if (m.rows() > options.dense_limit) {
    fail(ErrorKind::Config, "dense_matfun: size " + std::to_string(m.rows()) + " exceeds dense limit");
  }
  const Index n = m.rows();
  if (f.kind == FunctionKind::Custom && f.dense) return f.dense(m);

  EigOptions eo;
  eo.dense_limit = options.dense_limit;
  const EigenDecomposition ed = dense_eig(m, eo);
  for (Index i = 0; i < n; ++i) {
    if (on_branch_cut(f, ed.values(i))) {
      fail(ErrorKind::Solver, "critical Ritz value " + fmt(ed.values(i)) + " on the branch cut of " + f.name());
    }
  }
  const double cond = n == 0 ? 1.0 : condition_estimate(ed.vectors);
  if (info) {
    info->eigvec_condition = cond;
    info->eigenvalues = ed.values;
    info->used_quadrature = false;
  }
  if (cond <= options.eigvec_cond_limit) {
    DenseMatrix wf = ed.vectors;
    for (Index j = 0; j < n; ++j) wf.col(j) *= scalar_eval(f, ed.values(j));
    // f(M) = W f(L) W^{-1}  <=>  W^T f(M)^T = (W f(L))^T
    return Eigen::PartialPivLU<DenseMatrix>(ed.vectors.transpose()).solve(wf.transpose()).transpose();
  }

  if (!has_quadrature_form(f)) {
    fail(ErrorKind::Solver, "dense_matfun: eigenvectors ill-conditioned (" + std::to_string(cond) +
                                ") and " + f.name() + " has no quadrature form");
  }
  RuleContext ctx;
  DenseMatrix inner = m;
  if (f.kind == FunctionKind::SignViaInvSqrt) inner = m * m;
  const Vector inner_eigs =
      f.kind == FunctionKind::SignViaInvSqrt ? Vector(ed.values.array().square()) : ed.values;
  ctx.beta = stieltjes_scale(inner_eigs);
  ctx.ritz = inner_eigs;
  double fscale = 0.0;
  for (Index i = 0; i < n; ++i) fscale = std::max(fscale, std::abs(scalar_eval(f, ed.values(i))));
  const double tol = options.quad_tol * std::max(fscale, 1e-300) * std::sqrt(static_cast<double>(n));
  const FunctionSpec rule_f = f.is_composite() ? FunctionSpec::inv_sqrt() : f;
  auto evaluate = [&](Index ell) -> Vector {
    const DenseMatrix r = resolvent_sum(make_rule(rule_f, ell, ctx), inner);
    DenseMatrix out = f.is_composite() ? DenseMatrix(r * m) : r;
    return Eigen::Map<const Vector>(out.data(), out.size());
  };
  AdaptResult ar;
  if (f.kind == FunctionKind::Reciprocal) {
    ar.value = evaluate(1);
    ar.ell = 1;
  } else {
    ar = adapt_quadrature(evaluate, 16, 22, tol);
  }
  if (info) {
    info->used_quadrature = true;
    info->quad_ell = ar.ell;
  }
  return flatten_back(ar.value, n);
}

std::vector<std::string> node_proximity_warnings(const QuadratureRule& rule, const Vector& ritz) {
  std::vector<std::string> out;
  for (Index i = 0; i < rule.size(); ++i) {
    for (Index j = 0; j < ritz.size(); ++j) {
      if (std::abs(rule.nodes(i) + ritz(j)) < 1e-8 * (1.0 + std::abs(ritz(j)))) {
        out.push_back("quadrature node t=" + fmt(rule.nodes(i)) + " nearly coincides with -(Ritz value " +
                      fmt(ritz(j)) + ")");
      }
    }
  }
  return out;
}

}  // namespace sfab
