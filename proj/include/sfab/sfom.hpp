#pragma once

#include <string>
#include <vector>

#include "sfab/krylov.hpp"
#include "sfab/matfun.hpp"

namespace sfab {

enum class SfomForm { Closed, Quadrature, HHat };
std::string to_string(SfomForm form);

struct SfomDiagnostics {
  double eps_hat = 0.0;
  double basis_condition = 1.0;  // estimate of cond(S V_m) = cond(R)
  Index quad_ell = 0;
  bool pinv_used = false;
  std::vector<std::string> warnings;
};

/// Coefficients are in raw-basis coordinates: the approximant is V_m * coeffs.
struct SfomResult {
  Vector coeffs;
  SfomForm form = SfomForm::Closed;
  SfomDiagnostics diagnostics;
};

/// R^{-1} f(M) Q^H S b with M = Q^H S A V_m R^{-1}.
SfomResult sfom_closed(const WhitenedBasis& wb, const FunctionSpec& f,
                       const DenseMatfunOptions& options = {});

/// R^{-1} sum_i w_i (t_i I + M)^{-1} Q^H S b, one LU per node.
SfomResult sfom_quadrature(const WhitenedBasis& wb, const QuadratureRule& rule);

/// Quadrature form with adaptive order control on the whitened coefficients.
SfomResult sfom_quadrature_adaptive(const WhitenedBasis& wb, const FunctionSpec& f, double tol,
                                    Index ell1, Index ell2, const RuleContext& ctx,
                                    Index cap = kDefaultQuadCap);

/// ||b|| f(Ĥ_m) e_1 with Ĥ_m = H_m + h_{m+1,m} x̂ e_m^T and
/// x̂ = argmin ||S v_{m+1} - S V_m x||. Needs only the sketches and H.
SfomResult sfom_hhat(const ArnoldiProcess& proc, Index m, const FunctionSpec& f,
                     const DenseMatfunOptions& options = {});

/// sqrt((1+eps)/(1-eps)) ||b|| ||f(W^+ A W) - f(M)|| for the whitened basis
/// W = V_m R^{-1}, given the raw Rayleigh quotient V_m^+ A V_m.
double fom_distance_bound(const WhitenedBasis& wb, const FunctionSpec& f,
                          const DenseMatrix& rayleigh_raw, double eps, double b_norm);

}  // namespace sfab
