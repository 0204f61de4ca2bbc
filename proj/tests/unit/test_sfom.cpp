#include <cmath>

#include "doctest.h"
#include "sfab/ingest.hpp"
#include "sfab/oracles.hpp"
#include "sfab/sfom.hpp"
#include "test_util.hpp"

using namespace sfab;
using testing::identity_sketch;
using testing::opts;
using testing::positive_real;
using testing::random_vector;
using testing::rel_err;
using testing::sketch_of;

namespace {

DenseMatrix conv_diff(Index n, double d = 1e-3) {
  return gen_convection_diffusion(n, d).to_dense();
}

Vector approximant(const ArnoldiProcess& p, Index m, const Vector& coeffs) {
  return p.basis(m) * coeffs;
}

}  // namespace

TEST_CASE("sfom_closed with S=I and k=m equals FOM") {
  const DenseMatrix a = positive_real(30, 1);
  const Vector b = random_vector(30, 2);
  ArnoldiProcess p(LinearOperator::from_dense(a), b, identity_sketch(30), opts(30, 12));
  p.run_to(12);
  for (const auto& f : {FunctionSpec::inv_sqrt(), FunctionSpec::exp_neg(), FunctionSpec::log1p_over_z()}) {
    for (Index m : {1, 4, 12}) {
      const Vector ref = full_fom(a, b, f, m);
      const Vector x = approximant(p, m, sfom_closed(whiten(p, m), f).coeffs);
      CHECK(rel_err(x, ref) < 1e-12);
    }
  }
}

TEST_CASE("sfom_closed with f(z)=z is exact at m=N") {
  const DenseMatrix a = positive_real(10, 3);
  const Vector b = random_vector(10, 4);
  ArnoldiProcess p(LinearOperator::from_dense(a), b, identity_sketch(10), opts(10, 10));
  CHECK(p.run_to(10) == 10);
  const Vector x = approximant(p, 10, sfom_closed(whiten(p, 10), FunctionSpec::monomial(1)).coeffs);
  CHECK(rel_err(x, a * b) < 1e-10);
}

TEST_CASE("sfom_closed on conv-diff n=10 is close to the best approximation") {
  const DenseMatrix a = conv_diff(10);
  const Vector b = build_rhs(RhsSpec::ones(), 100);
  ArnoldiProcess p(LinearOperator::from_dense(a), b, sketch_of(SketchKind::Srdct, 100, 60, 7), opts(4, 30));
  p.run_to(30);
  const FunctionSpec f = FunctionSpec::inv_sqrt();
  const Vector ref = exact_fab(a, b, f);
  // At m=30 the best approximation is at rounding level, where a 10x
  // comparison is meaningless; 1e-12 relative is the floor used elsewhere.
  const double err = (approximant(p, 30, sfom_closed(whiten(p, 30), f).coeffs) - ref).norm() / ref.norm();
  const double best = best_approximation_error(a, b, f, 30) / ref.norm();
  CHECK(err <= std::max(10.0 * best, 1e-12));
}

TEST_CASE("sfom_quadrature agrees with the closed form") {
  const DenseMatrix a = conv_diff(10);
  const Vector b = build_rhs(RhsSpec::ones(), 100);
  ArnoldiProcess p(LinearOperator::from_dense(a), b, sketch_of(SketchKind::Srdct, 100, 60, 7), opts(4, 25));
  p.run_to(25);
  const WhitenedBasis wb = whiten(p, 25);
  const FunctionSpec f = FunctionSpec::inv_sqrt();
  RuleContext ctx;
  ctx.beta = stieltjes_scale(sketched_ritz(wb));
  const double tol = 1e-11;
  const SfomResult q = sfom_quadrature_adaptive(wb, f, tol, 16, 22, ctx);
  const SfomResult c = sfom_closed(wb, f);
  const Vector xq = approximant(p, 25, q.coeffs);
  const Vector xc = approximant(p, 25, c.coeffs);
  CHECK(rel_err(xq, xc) <= std::max(1e-10, tol));
  CHECK(q.diagnostics.quad_ell >= 22);
  CHECK(q.form == SfomForm::Quadrature);

  // the next order changes the result by less than the tolerance
  const SfomResult q2 = sfom_quadrature(wb, make_rule(f, next_quadrature_order(q.diagnostics.quad_ell), ctx));
  CHECK((approximant(p, 25, q2.coeffs) - xq).norm() < 10 * tol);
}

TEST_CASE("sfom_quadrature with the reciprocal rule is the sketched resolvent") {
  const DenseMatrix a = positive_real(20, 6);
  ArnoldiProcess p(LinearOperator::from_dense(a), random_vector(20, 7), sketch_of(SketchKind::Gaussian, 20, 15, 8),
                   opts(3, 6));
  p.run_to(6);
  const WhitenedBasis wb = whiten(p, 6);
  const SfomResult r = sfom_quadrature(wb, stieltjes_rule(FunctionSpec::reciprocal(), 1));
  const Vector expect = wb.to_raw(wb.m_matrix.lu().solve(wb.qsb));
  CHECK(rel_err(r.coeffs, expect) < 1e-13);
}

TEST_CASE("sfom_quadrature reports a node collision") {
  DenseMatrix a = DenseMatrix::Zero(6, 6);
  a.diagonal() << 1, 2, 3, 4, 5, 6;
  ArnoldiProcess p(LinearOperator::from_dense(a), Vector::Ones(6), identity_sketch(6), opts(6, 3));
  p.run_to(3);
  const WhitenedBasis wb = whiten(p, 3);
  QuadratureRule rule = stieltjes_rule(FunctionSpec::reciprocal(), 1);
  rule.nodes(0) = -sketched_ritz(wb)(0);
  try {
    sfom_quadrature(wb, rule);
    FAIL("expected a node collision");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Solver);
    CHECK(std::string(e.what()).find("collision") != std::string::npos);
  }
}

TEST_CASE("sfom_hhat matches the closed form and FOM") {
  const DenseMatrix a = conv_diff(8);
  const Vector b = build_rhs(RhsSpec::ones(), 64);
  const FunctionSpec f = FunctionSpec::inv_sqrt();
  {
    ArnoldiProcess p(LinearOperator::from_dense(a), b, sketch_of(SketchKind::Srdct, 64, 40, 3), opts(3, 15));
    p.run_to(15);
    for (Index m : {5, 10, 15}) {
      const WhitenedBasis wb = whiten(p, m);
      REQUIRE(triangular_condition_estimate(wb.r) <= 1e6);
      const Vector xc = approximant(p, m, sfom_closed(wb, f).coeffs);
      const SfomResult h = sfom_hhat(p, m, f);
      CHECK(h.form == SfomForm::HHat);
      CHECK(rel_err(approximant(p, m, h.coeffs), xc) < 1e-9);
    }
  }
  {
    ArnoldiProcess p(LinearOperator::from_dense(a), b, identity_sketch(64), opts(15, 15));
    p.run_to(15);
    CHECK(rel_err(approximant(p, 15, sfom_hhat(p, 15, f).coeffs), full_fom(a, b, f, 15)) < 1e-9);
  }
}

TEST_CASE("sfom_hhat is exact for polynomials of degree below m") {
  const DenseMatrix a = positive_real(40, 9);
  const Vector b = random_vector(40, 10);
  ArnoldiProcess p(LinearOperator::from_dense(a), b, sketch_of(SketchKind::Gaussian, 40, 30, 11), opts(2, 8));
  p.run_to(8);
  for (int deg = 0; deg <= 5; ++deg) {
    Vector ref = b;
    for (int i = 0; i < deg; ++i) ref = a * ref;
    for (Index m = deg + 1; m <= 8; ++m) {
      const Vector x = approximant(p, m, sfom_hhat(p, m, FunctionSpec::monomial(deg)).coeffs);
      CHECK(rel_err(x, ref) < 1e-9);
    }
  }
}

TEST_CASE("sfom_closed does not depend on the truncation length") {
  const DenseMatrix a = positive_real(50, 12);
  const Vector b = random_vector(50, 13);
  const auto s = sketch_of(SketchKind::Srdct, 50, 40, 14);
  const Index m = 15;
  ArnoldiProcess p2(LinearOperator::from_dense(a), b, s, opts(2, m));
  ArnoldiProcess pm(LinearOperator::from_dense(a), b, s, opts(m, m));
  p2.run_to(m);
  pm.run_to(m);
  const FunctionSpec f = FunctionSpec::inv_sqrt();
  const Vector x2 = approximant(p2, m, sfom_closed(whiten(p2, m), f).coeffs);
  const Vector xm = approximant(pm, m, sfom_closed(whiten(pm, m), f).coeffs);
  CHECK(rel_err(x2, xm) < 1e-9);
}

TEST_CASE("fom_distance_bound") {
  const FunctionSpec f = FunctionSpec::inv_sqrt();
  SUBCASE("S=I gives zero distance") {
    const DenseMatrix a = positive_real(20, 15);
    const Vector b = random_vector(20, 16);
    ArnoldiProcess p(LinearOperator::from_dense(a), b, identity_sketch(20), opts(20, 6));
    p.run_to(6);
    const WhitenedBasis wb = whiten(p, 6);
    const DenseMatrix v = p.basis(6);
    const double bound = fom_distance_bound(wb, f, rayleigh_quotient(a, v), 0.0, b.norm());
    CHECK(bound >= 0.0);
    CHECK(bound < 1e-12);
    CHECK((approximant(p, 6, sfom_closed(wb, f).coeffs) - full_fom(a, b, f, 6)).norm() < 1e-12);
  }
  SUBCASE("multiplier at eps=0.5") {
    const DenseMatrix a = positive_real(20, 15);
    const Vector b = random_vector(20, 16);
    ArnoldiProcess p(LinearOperator::from_dense(a), b, sketch_of(SketchKind::Gaussian, 20, 18, 1), opts(3, 6));
    p.run_to(6);
    const WhitenedBasis wb = whiten(p, 6);
    const DenseMatrix rq = rayleigh_quotient(a, p.basis(6));
    const double b0 = fom_distance_bound(wb, f, rq, 0.0, 1.0);
    CHECK(std::abs(fom_distance_bound(wb, f, rq, 0.5, 1.0) - std::sqrt(3.0) * b0) < 1e-12 * b0);
    CHECK_THROWS_AS(fom_distance_bound(wb, f, rq, 1.0, 1.0), Error);
  }
  SUBCASE("conv-diff n=8, m=15 bound holds") {
    const DenseMatrix a = conv_diff(8);
    const Vector b = build_rhs(RhsSpec::ones(), 64);
    const auto s = sketch_of(SketchKind::Srdct, 64, 48, 5);
    ArnoldiProcess p(LinearOperator::from_dense(a), b, s, opts(4, 15));
    p.run_to(15);
    const DenseMatrix v = p.basis(15);
    const double eps = embedding_distortion(*s, v);
    REQUIRE(eps < 1.0);
    const WhitenedBasis wb = whiten(p, 15);
    const double dist = (full_fom(a, b, f, 15) - approximant(p, 15, sfom_closed(wb, f).coeffs)).norm();
    CHECK(dist <= fom_distance_bound(wb, f, rayleigh_quotient(a, v), eps, b.norm()));
  }
}
