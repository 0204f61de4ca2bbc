#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sfab/krylov.hpp"
#include "sfab/matfun.hpp"

namespace sfab {

struct SgmresOptions {
  double tol = 1e-7;  // adaptive quadrature tolerance
  Index ell1 = 16;
  Index ell2 = 23;
  Index cap = kDefaultQuadCap;
  /// Solve each node through the m x m normal equations assembled from
  /// precomputed Gram blocks instead of a QR of the s x m node matrix.
  bool fast_normal_eq = false;
  /// Scale of the Stieltjes substitution. 0 picks the geometric centre of
  /// the sketched Ritz values.
  double beta = 0.0;
};

struct SgmresResult {
  Vector coeffs;                  // raw-basis coordinates
  Vector y_whitened;              // the same in whitened coordinates
  Index ell_final = 0;
  std::vector<Index> orders;      // quadrature orders evaluated
  RealVector per_node_residual_norms;  // ||S r(t_i)|| at the accepted rule
  std::vector<std::pair<Index, double>> error_estimates;  // filled by drivers
  double eps_hat = 0.0;
  Index rank_deficient_nodes = 0;
  QuadratureRule rule;            // accepted rule
  std::vector<std::string> warnings;
};

/// Per-node sketched least squares min ||S b - (t_i Q + S A V R^{-1}) y||.
/// Returns the whitened solutions; residual norms go to `residuals` if given.
std::vector<Vector> sgmres_node_solutions(const WhitenedBasis& wb, const QuadratureRule& rule,
                                          bool fast_normal_eq = false, RealVector* residuals = nullptr,
                                          Index* rank_deficient = nullptr);

/// sGMRES with a fixed rule.
SgmresResult sgmres_solve(const WhitenedBasis& wb, const QuadratureRule& rule, bool fast_normal_eq = false);

/// sGMRES with adaptive quadrature. Stieltjes functions skip the contour
/// construction; entire functions place the contour around the sketched Ritz values.
SgmresResult sgmres_solve(const WhitenedBasis& wb, const FunctionSpec& f, const SgmresOptions& options = {});

/// (1/sqrt(1-eps)) ||S V_{m+d} (y_{m+d} - [y_m; 0])|| for raw coefficients,
/// evaluated as ||R (y_{m+d} - [y_m; 0])|| since S V_{m+d} = Q R.
double error_estimate(const WhitenedBasis& wb_mplusd, const Vector& y_mplusd, const Vector& y_m, double eps_hat);

/// sqrt((1+eps)/(1-eps))
double quasi_optimality_constant(double eps);

struct ResidualReport {
  RealVector sketched_residuals;  // true ||r~_m(t_i)|| of the sketched solutions
  RealVector gmres_residuals;     // ||r_m(t_i)|| of full GMRES
  double max_ratio = 0.0;
  double c_eps = 1.0;
  bool within_bound = true;       // max_ratio <= c_eps + 1e-10
  Index skipped_nodes = 0;        // GMRES residual at rounding level
};

/// Nodes whose GMRES residual is below kResidualFloor (||b|| + (|t| + ||A||) ||x||)
/// are left out of the ratio.
inline constexpr double kResidualFloor = 1e-14;

/// Compares the unsketched residual of each node solution (raw coefficients)
/// with the full GMRES residual for the same shift.
ResidualReport residual_check(const DenseMatrix& a, const Vector& b, const DenseMatrix& basis,
                              const QuadratureRule& rule, const std::vector<Vector>& coeffs_per_node,
                              double eps_hat, double floor = kResidualFloor);

/// C_1 C_eps ||b|| sin(beta_0)^m for a positive real A and a Stieltjes f.
struct StieltjesBoundParts {
  double delta = 0.0;  // lambda_min of the Hermitian part of A
  double rho = 0.0;    // lambda_min of the Hermitian part of A^{-1}
  double norm_a = 0.0;
  double sin_beta0 = 0.0;
  double c1 = 0.0;
};
StieltjesBoundParts stieltjes_bound_parts(const DenseMatrix& a, const FunctionSpec& f);
double stieltjes_bound(const DenseMatrix& a, const FunctionSpec& f, double eps, Index m, double b_norm);

struct TwoPassReport {
  Vector approximant;
  Vector coeffs;
  Index m = 0;
  Index peak_basis_vectors = 0;  // maximum over both passes
  long long matvecs = 0;         // both passes
  Index ell_final = 0;
};

/// First pass with a window of k+1 vectors and the sketches, sGMRES
/// coefficients from the sketches, second pass to assemble V_m y.
TwoPassReport run_sgmres_twopass(const LinearOperator& a, const Vector& b, const FunctionSpec& f, Index k,
                                 Index m, const SketchParams& sketch, const SgmresOptions& options = {});

}  // namespace sfab
