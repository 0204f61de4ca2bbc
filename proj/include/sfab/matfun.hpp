#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sfab/linalg.hpp"
#include "sfab/types.hpp"

namespace sfab {

enum class FunctionKind {
  InvSqrt,          // z^{-1/2}
  InvPow,           // z^{-alpha}, 0 < alpha < 1
  Log1pOverZ,       // log(1+z)/z
  ExpNeg,           // e^{-z}
  SignViaInvSqrt,   // sign(z) = (z^2)^{-1/2} z
  SqrtViaInvSqrt,   // z^{1/2} = z^{-1/2} z
  CustomStieltjes,  // int_0^inf rho(t)/(t+z) dt
  Reciprocal,       // 1/z
  Custom,           // user scalar (and optional dense) callback
};

enum class FunctionClass { Stieltjes, Entire, Other };

struct FunctionSpec {
  FunctionKind kind = FunctionKind::InvSqrt;
  double alpha = 0.5;
  std::function<double(double)> density;                   // CustomStieltjes
  std::function<cplx(cplx)> scalar;                        // Custom
  std::function<DenseMatrix(const DenseMatrix&)> dense;    // Custom, optional
  std::string label;

  FunctionClass classification() const;
  std::string name() const;
  /// True for sign/sqrt: evaluated as inv-sqrt of an operator applied to a
  /// premultiplied vector.
  bool is_composite() const {
    return kind == FunctionKind::SignViaInvSqrt || kind == FunctionKind::SqrtViaInvSqrt;
  }

  static FunctionSpec inv_sqrt();
  static FunctionSpec inv_pow(double alpha);
  static FunctionSpec log1p_over_z();
  static FunctionSpec exp_neg();
  static FunctionSpec sign();
  static FunctionSpec sqrt();
  static FunctionSpec reciprocal();
  static FunctionSpec custom_stieltjes(std::function<double(double)> density, std::string label);
  static FunctionSpec custom(std::function<cplx(cplx)> scalar,
                             std::function<DenseMatrix(const DenseMatrix&)> dense, std::string label);
  /// z^p with an exact dense evaluation by repeated multiplication.
  static FunctionSpec monomial(int p);
};

/// Parses "inv-sqrt", "inv-pow:0.3", "log1p-over-z", "exp-neg", "sign", "sqrt", "reciprocal".
FunctionSpec parse_function(const std::string& text);

/// True if z lies on, or within rounding of, the branch cut or pole set of f.
bool on_branch_cut(const FunctionSpec& f, cplx z);

/// Principal-branch value. Throws Config for points on the branch cut.
cplx scalar_eval(const FunctionSpec& f, cplx z);

struct ContourParams {
  double a = 0.0;           // vertex of the parabola
  double c = 1.0;           // curvature
  double half_width = 1.0;  // U: parameter range [-U, U]
  Index ell = 100;
};

/// f(A)b ≈ sum_i w_i (t_i I + A)^{-1} b
struct QuadratureRule {
  Vector nodes;
  Vector weights;
  std::string family;
  Index ell = 0;
  double scale = 1.0;  // Stieltjes substitution scale
  std::optional<ContourParams> contour;

  Index size() const noexcept { return nodes.size(); }
  /// sum_i w_i / (t_i + z)
  cplx apply_scalar(cplx z) const;
};

/// Gauss-Chebyshev / Gauss-Jacobi / Gauss-Legendre rule after the substitution
/// t = beta (1-x)/(1+x). beta = 1 gives the plain map of [-1, 1] onto
/// [0, inf); a beta near the geometric centre of the spectrum balances the
/// node density across it.
QuadratureRule stieltjes_rule(const FunctionSpec& f, Index ell, double beta = 1.0);

/// Scale for stieltjes_rule centred on a set of (Ritz) values: the geometric
/// mean of the smallest and largest modulus. Returns 1 for empty input.
double stieltjes_scale(const Vector& values);

/// Trapezoid rule on the parabola a + iu - cu^2, u in [-U, U], for an entire f.
QuadratureRule contour_rule(const FunctionSpec& f, const ContourParams& params);
/// Chooses the parabola around -ritz by minimizing the scalar error at the
/// Ritz values over a small grid of margins and curvatures.
QuadratureRule contour_rule(const FunctionSpec& f, const Vector& ritz, Index ell);
ContourParams choose_contour(const FunctionSpec& f, const Vector& ritz, Index ell);

/// max_z |rule(z) - f(z)| / max_z |f(z)| over the sample points.
double rule_scalar_error(const QuadratureRule& rule, const FunctionSpec& f, const Vector& samples);

/// Which rule a solver should build for f: Stieltjes rules use `beta`; entire
/// functions need the Ritz values for the contour. Composite functions use
/// the inv-sqrt rule.
struct RuleContext {
  double beta = 1.0;
  Vector ritz;
};
QuadratureRule make_rule(const FunctionSpec& f, Index ell, const RuleContext& ctx);
bool has_quadrature_form(const FunctionSpec& f);

struct AdaptResult {
  Vector value;
  Index ell = 0;
  double discrepancy = 0.0;
  Index evaluations = 0;
  std::vector<Index> orders;  // every order evaluated, in sequence
};

inline constexpr Index kDefaultQuadCap = 5000;

/// Next order in the adaptive sequence: floor(sqrt(2) * ell), at least ell+1.
Index next_quadrature_order(Index ell);

/// Evaluates at ell1 and ell2 and refines ell2 until two consecutive results
/// differ by less than tol (2-norm), reusing the previous higher-order value.
/// Throws Solver if the order would exceed `cap`.
AdaptResult adapt_quadrature(const std::function<Vector(Index)>& evaluate, Index ell1, Index ell2,
                             double tol, Index cap = kDefaultQuadCap);

struct DenseMatfunInfo {
  bool used_quadrature = false;
  double eigvec_condition = 1.0;
  Index quad_ell = 0;
  Vector eigenvalues;
};

struct DenseMatfunOptions {
  // The diagonalization error grows like cond(W) u ||f(M)||; above 1e4 the
  // quadrature path is the more accurate one.
  double eigvec_cond_limit = 1e4;
  double quad_tol = 1e-12;
  Index dense_limit = kDefaultDenseLimit;
};

/// f(M) by diagonalization, or by quadrature when the eigenvector matrix is
/// too ill-conditioned. An eigenvalue on the branch cut throws a Solver error
/// ("critical Ritz value").
DenseMatrix dense_matfun(const FunctionSpec& f, const DenseMatrix& m,
                         const DenseMatfunOptions& options = {}, DenseMatfunInfo* info = nullptr);

/// Quadrature nodes t with |t + lambda| < 1e-8 (1 + |lambda|) for some Ritz value.
std::vector<std::string> node_proximity_warnings(const QuadratureRule& rule, const Vector& ritz);

}  // namespace sfab
