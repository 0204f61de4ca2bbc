// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sfab/driver.hpp"
#include "sfab/ingest.hpp"
#include "sfab/oracles.hpp"
#include "sfab/sfom.hpp"
#include "sfab/sgmres.hpp"
#include "test_util.hpp"

using namespace sfab;
using testing::identity_sketch;
using testing::opts;
using testing::positive_real;
using testing::random_vector;
using testing::rel_err;
using testing::sketch_of;

namespace {

struct Outcome {
  enum class Status { Pass, Fail, Skip };
  Status status = Status::Pass;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Outcome::Status::Pass : Outcome::Status::Fail, std::move(detail)};
}

Vector approximant(const ArnoldiProcess& p, Index m, const Vector& coeffs) { return assemble(p.basis(m), coeffs); }

// With S = I and k = m every sketched method collapses to its classical counterpart.
Outcome degeneracy() {
  const FunctionSpec f = FunctionSpec::inv_sqrt();
  const FunctionSpec recip = FunctionSpec::reciprocal();
  struct Instance {
    DenseMatrix a;
    Vector b;
    std::string name;
  };
  std::vector<Instance> instances;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Index n = 15 + 5 * static_cast<Index>(seed - 1) % 46;
    instances.push_back({positive_real(n, seed), random_vector(n, 100 + seed), "random N=" + std::to_string(n)});
  }
  instances.push_back({gen_convection_diffusion(8, 1e-3).to_dense(), build_rhs(RhsSpec::ones(), 64), "conv-diff n=8"});

  double worst[4] = {0, 0, 0, 0};
  Index checks = 0;
  for (const Instance& in : instances) {
    const Index n = in.a.rows();
    const Index m_max = std::min<Index>(n - 1, 24);
    ArnoldiProcess p(LinearOperator::from_dense(in.a), in.b, identity_sketch(n), opts(m_max, m_max));
    p.run_to(m_max);
    for (Index m : {Index{4}, m_max / 2, m_max}) {
      const WhitenedBasis wb = whiten(p, m);
      const Vector fom = full_fom(in.a, in.b, f, m);
      worst[0] = std::max(worst[0], rel_err(approximant(p, m, sfom_closed(wb, f).coeffs), fom));
      RuleContext ctx;
      ctx.beta = stieltjes_scale(sketched_ritz(wb));
      const SfomResult q = sfom_quadrature_adaptive(wb, f, 1e-12, 16, 23, ctx);
      worst[1] = std::max(worst[1], rel_err(approximant(p, m, q.coeffs), fom));
      worst[2] = std::max(worst[2], rel_err(approximant(p, m, sfom_hhat(p, m, f).coeffs), fom));
      const SgmresResult g = sgmres_solve(wb, stieltjes_rule(recip, 1));
      const GmresShiftResult gm = full_gmres_shift(in.a, in.b, 0.0, m);
      worst[3] = std::max(worst[3], rel_err(approximant(p, m, g.coeffs), gm.x));
      ++checks;
    }
  }
  const bool ok = std::max({worst[0], worst[1], worst[2], worst[3]}) <= 1e-10;
  return verdict(ok, std::to_string(instances.size()) + " instances, " + std::to_string(checks) +
                         " (instance, m) pairs; max rel diff closed " + sci(worst[0]) + ", quadrature " +
                         sci(worst[1]) + ", h-hat " + sci(worst[2]) + ", sGMRES/GMRES " + sci(worst[3]) +
                         " (tol 1e-10)");
}

double max_rel_scalar_error(const QuadratureRule& rule, const FunctionSpec& f, double lo, double hi, int samples) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double z = lo * std::pow(hi / lo, i / static_cast<double>(samples - 1));
    const cplx exact = scalar_eval(f, z);
    worst = std::max(worst, std::abs(rule.apply_scalar(z) - exact) / std::abs(exact));
  }
  return worst;
}

Outcome quadrature_scalar() {
  const FunctionSpec f = FunctionSpec::inv_sqrt();
  const double e45 = max_rel_scalar_error(stieltjes_rule(f, 45, std::sqrt(0.1 * 100.0)), f, 0.1, 100.0, 2000);
  const double e45_unit = max_rel_scalar_error(stieltjes_rule(f, 45, 1.0), f, 0.1, 100.0, 2000);
  const double e176 = max_rel_scalar_error(stieltjes_rule(f, 176, std::sqrt(1e-2 * 1e4)), f, 1e-2, 1e4, 2000);
  const double e176_unit = max_rel_scalar_error(stieltjes_rule(f, 176, 1.0), f, 1e-2, 1e4, 2000);

  // Ritz-like cloud of a nonsymmetric adjacency matrix: a bulk disc around
  // the origin, a few real outliers and conjugate pairs.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector cloud(240);
  for (Index i = 0; i < 200; ++i) {
    const double r = 4.0 * std::sqrt(u(rng)), th = 2.0 * M_PI * u(rng);
    cloud(i) = std::polar(r, th);
  }
  for (Index i = 200; i < 220; ++i) cloud(i) = cplx(-6.0 + 30.0 * u(rng), 0.0);
  for (Index i = 220; i < 240; i += 2) {
    cloud(i) = cplx(-4.0 + 12.0 * u(rng), 6.0 * u(rng));
    cloud(i + 1) = std::conj(cloud(i));
  }
  const FunctionSpec g = FunctionSpec::exp_neg();
  const QuadratureRule contour = contour_rule(g, cloud, 100);
  // max_i |rule(z_i) - f(z_i)| / max_i |f(z_i)|
  const double e_exp = rule_scalar_error(contour, g, cloud);
  const bool ok = e45 <= 1e-10 && e176 <= 1e-7 && e_exp <= 1e-8;
  return verdict(ok, "inv-sqrt l=45 on [0.1,100]: " + sci(e45) + " (tol 1e-10; unit scale " + sci(e45_unit) +
                         "), l=176 on [1e-2,1e4]: " + sci(e176) + " (tol 1e-7; unit scale " + sci(e176_unit) +
                         "), exp(-z) parabola l=100 on 240 Ritz-like points: " + sci(e_exp) + " (tol 1e-8)");
}

Outcome convdiff_reproduction() {
  RunConfig base;
  apply_setting(base, "gen", "conv-diff:n=32,D=1e-3");
  apply_setting(base, "rhs", "ones");
  apply_setting(base, "fn", "inv-sqrt");
  apply_setting(base, "m-max", "100");
  apply_setting(base, "k", "4");
  apply_setting(base, "sketch", "srdct");
  apply_setting(base, "seed", "7");
  apply_setting(base, "quad-tol", "1e-7");
  RunConfig g = base, c = base, q = base;
  apply_setting(g, "method", "sgmres");
  apply_setting(c, "method", "sfom-closed");
  apply_setting(q, "method", "sfom-quad");
  const RunResult rg = run(g), rc = run(c), rq = run(q);
  if (rg.s != 200) return verdict(false, "sketch size " + std::to_string(rg.s) + ", expected 2 m_max = 200");

  std::vector<double> err;  // err[m-1]
  double worst_best_ratio = 0.0;
  Index first_below = -1;
  for (const CurveRow& row : rg.rows) {
    err.push_back(*row.error_vs_exact);
    if (*row.error_vs_exact > 1e-12)
      worst_best_ratio = std::max(worst_best_ratio, *row.error_vs_exact / *row.best_approx_error);
    if (first_below < 0 && *row.error_vs_exact <= 1e-8) first_below = row.m;
  }
  // superlinear: the second half of the descent to 1e-8 drops more decades than the first half
  bool superlinear = false;
  double drop1 = 0.0, drop2 = 0.0;
  if (first_below > 2) {
    const Index h = first_below / 2;
    drop1 = std::log10(err[0] / err[static_cast<std::size_t>(h - 1)]);
    drop2 = std::log10(err[static_cast<std::size_t>(h - 1)] / err[static_cast<std::size_t>(first_below - 1)]);
    superlinear = drop2 > drop1;
  }
  double worst_cq = 1.0;
  Index worst_cq_m = 0;
  for (std::size_t i = 0; i < rc.rows.size() && i < rq.rows.size(); ++i) {
    const double a = *rc.rows[i].error_vs_exact, b = *rq.rows[i].error_vs_exact;
    const double ratio = std::max(a / b, b / a);
    if (ratio > worst_cq) {
      worst_cq = ratio;
      worst_cq_m = rc.rows[i].m;
    }
  }
  const bool ok = first_below > 0 && first_below < 100 && superlinear && worst_best_ratio <= 10.0 &&
                  worst_cq <= 2.0 && rc.rows.size() == 100 && rq.rows.size() == 100;
  return verdict(ok, "sGMRES error <= 1e-8 first at m=" + std::to_string(first_below) + ", decades dropped " +
                         sci(drop1) + " then " + sci(drop2) + ", max err/best (err > 1e-12) " +
                         sci(worst_best_ratio) + " (tol 10), max sFOM closed/quad ratio " + sci(worst_cq) +
                         " at m=" + std::to_string(worst_cq_m) + " (tol 2)");
}

Outcome residual_quasi_optimality() {
  const DenseMatrix a = gen_convection_diffusion(8, 1e-3).to_dense();
  const Vector b = build_rhs(RhsSpec::ones(), 64);
  const auto s = sketch_of(SketchKind::Srdct, 64, 48, 11);
  const QuadratureRule rule =
      stieltjes_rule(FunctionSpec::inv_sqrt(), 45, stieltjes_scale(dense_eigenvalues(a)));
  ArnoldiProcess p(LinearOperator::from_dense(a), b, s, opts(4, 20));
  p.run_to(20);
  double worst_excess = -INFINITY, worst_ratio = 0.0, worst_eps = 0.0;
  Index skipped = 0, vacuous = 0;
  for (Index m = 1; m <= 20; ++m) {
    const double eps = embedding_distortion(*s, p.basis(m + 1));
    worst_eps = std::max(worst_eps, eps);
    if (eps >= 1.0) {
      ++vacuous;
      continue;
    }
    const WhitenedBasis wb = whiten(p, m);
    std::vector<Vector> coeffs;
    for (const Vector& y : sgmres_node_solutions(wb, rule)) coeffs.push_back(wb.to_raw(y));
    const ResidualReport rep = residual_check(a, b, p.basis(m), rule, coeffs, eps);
    worst_excess = std::max(worst_excess, rep.max_ratio - rep.c_eps);
    worst_ratio = std::max(worst_ratio, rep.max_ratio);
    skipped += rep.skipped_nodes;
  }
  const bool ok = vacuous == 0 && worst_excess <= 1e-10;
  return verdict(ok, "45 nodes, m=1..20, measured eps <= " + sci(worst_eps) + "; max ratio " + sci(worst_ratio) +
                         ", max (ratio - C_eps) " + sci(worst_excess) + " (tol 1e-10); " + std::to_string(skipped) +
                         " node residuals at rounding level skipped");
}

Outcome stieltjes_bound_domination() {
  const FunctionSpec f = FunctionSpec::inv_sqrt();
  SgmresOptions tight;
  tight.tol = 1e-12;
  double worst = 0.0, worst_eps = 0.0;
  Index checks = 0, vacuous = 0;
  std::string deltas;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Index n = 100;
    const DenseMatrix a = positive_real(n, 500 + seed);
    const StieltjesBoundParts parts = stieltjes_bound_parts(a, f);
    if (!(parts.delta > 0.0)) return verdict(false, "instance " + std::to_string(seed) + " is not positive real");
    deltas += (deltas.empty() ? "" : ", ") + sci(parts.delta);
    const Vector b = random_vector(n, 600 + seed);
    const Vector ref = exact_fab(a, b, f);
    const auto s = sketch_of(SketchKind::Srdct, n, 90, 700 + seed);
    ArnoldiProcess p(LinearOperator::from_dense(a), b, s, opts(4, 40));
    p.run_to(40);
    for (Index m = 1; m <= 40; ++m) {
      const double eps = embedding_distortion(*s, p.basis(m + 1));
      worst_eps = std::max(worst_eps, eps);
      if (eps >= 1.0) {
        ++vacuous;
        continue;
      }
      const SgmresResult r = sgmres_solve(whiten(p, m), f, tight);
      const double err = (a * (ref - p.basis(m) * r.coeffs)).norm();
      const double bound = parts.c1 * quasi_optimality_constant(eps) * b.norm() *
                           std::pow(parts.sin_beta0, static_cast<double>(m));
      worst = std::max(worst, err / bound);
      ++checks;
    }
  }
  const bool ok = vacuous == 0 && worst <= 1.0;
  return verdict(ok, "5 instances N=100 (delta " + deltas + "), " + std::to_string(checks) +
                         " m values; max measured/bound " + sci(worst) + " (tol 1); measured eps <= " +
                         sci(worst_eps));
}

Outcome polynomial_exactness() {
  double worst = 0.0;
  Index checks = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Index n = 30 + 10 * static_cast<Index>(seed - 1);
    const DenseMatrix a = seed % 2 ? positive_real(n, 800 + seed) : testing::random_dense(n, n, 800 + seed);
    const Vector b = random_vector(n, 900 + seed);
    const auto s = sketch_of(seed % 2 ? SketchKind::Gaussian : SketchKind::Srdct, n, n / 2 + 5, 1000 + seed);
    ArnoldiProcess p(LinearOperator::from_dense(a), b, s, opts(2, 12));
    p.run_to(12);
    for (int deg = 0; deg <= 5; ++deg) {
      Vector ref = b;
      for (int i = 0; i < deg; ++i) ref = a * ref;
      for (Index m = deg + 1; m <= 12; ++m) {
        const Vector x = approximant(p, m, sfom_hhat(p, m, FunctionSpec::monomial(deg)).coeffs);
        worst = std::max(worst, rel_err(x, ref));
        ++checks;
      }
    }
  }
  return verdict(worst <= 1e-9, std::to_string(checks) + " (instance, p, m) cases, N=30..60, p<=5; max rel err " +
                                    sci(worst) + " (tol 1e-9)");
}

Outcome two_pass() {
  const SparseMatrix sp = gen_convection_diffusion(32, 1e-3);
  const Vector b = build_rhs(RhsSpec::ones(), sp.rows());
  SgmresOptions o;
  o.tol = 1e-7;
  std::string detail;
  bool ok = true;
  for (Index k : {2, 4}) {
    for (Index m : {30, 60}) {
      const SketchParams sk{SketchKind::Srdct, sp.rows(), 2 * m, 31, 8};
      const LinearOperator op = LinearOperator::from_sparse(sp);
      const TwoPassReport tp = run_sgmres_twopass(op, b, FunctionSpec::inv_sqrt(), k, m, sk, o);

      const LinearOperator op_full = LinearOperator::from_sparse(sp);
      ArnoldiProcess full(op_full, b, std::make_shared<const SketchOperator>(sk), opts(k, m));
      full.run_to(m);
      const SgmresResult r = sgmres_solve(whiten(full, m), FunctionSpec::inv_sqrt(), o);
      const Vector x = assemble(full.basis(m), r.coeffs);
      const bool bitwise = tp.coeffs == r.coeffs && tp.approximant == x;
      const bool storage = tp.peak_basis_vectors == k + 1;
      const bool count = std::llabs(tp.matvecs - 2 * (m + 1)) <= 1 && op_full.matvec_count() == m + 1;
      ok = ok && bitwise && storage && count;
      detail += (detail.empty() ? "" : "; ") + std::string("k=") + std::to_string(k) + " m=" + std::to_string(m) +
                (bitwise ? " bitwise-equal" : " DIFFERS") + ", peak " + std::to_string(tp.peak_basis_vectors) +
                ", matvecs " + std::to_string(tp.matvecs);
    }
  }
  return verdict(ok, detail);
}

Outcome stopping_sandwich() {
  const FunctionSpec f = FunctionSpec::inv_sqrt();
  SgmresOptions tight;
  tight.tol = 1e-12;
  const Index d = 5;
  double worst_low = INFINITY, worst_high = INFINITY;  // margins to the two sides, relative
  Index checks = 0, vacuous = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Index n = 40 + 4 * static_cast<Index>(seed);
    const DenseMatrix a = positive_real(n, 1100 + seed);
    const Vector b = random_vector(n, 1200 + seed);
    const auto s = sketch_of(SketchKind::Srdct, n, n - 10, 1300 + seed);
    ArnoldiProcess p(LinearOperator::from_dense(a), b, s, opts(4, 20));
    p.run_to(20);
    for (Index m : {5, 10, 15}) {
      const double eps = embedding_distortion(*s, p.basis(m + d));
      if (eps >= 1.0) {
        ++vacuous;
        continue;
      }
      const WhitenedBasis wm = whiten(p, m), wmd = whiten(p, m + d);
      const std::pair<Vector, Vector> pairs[] = {
          {sfom_closed(wm, f).coeffs, sfom_closed(wmd, f).coeffs},
          {sgmres_solve(wm, f, tight).coeffs, sgmres_solve(wmd, f, tight).coeffs},
      };
      for (const auto& [cm, cmd] : pairs) {
        const double truth = (p.basis(m + d) * cmd - p.basis(m) * cm).norm();
        const double sketched = error_estimate(wmd, cmd, cm, 0.0);
        const double lo = sketched / std::sqrt(1.0 + eps), hi = sketched / std::sqrt(1.0 - eps);
        worst_low = std::min(worst_low, (truth - lo) / truth);
        worst_high = std::min(worst_high, (hi - truth) / truth);
        ++checks;
      }
    }
  }
  const bool ok = vacuous == 0 && worst_low >= -1e-10 && worst_high >= -1e-10;
  return verdict(ok, "10 instances, d=5, " + std::to_string(checks) + " (m, method) cases; min relative margin below " +
                         sci(worst_low) + ", above " + sci(worst_high) + " (must be >= -1e-10)");
}

// SuiteSparse MatrixMarket form, or a SNAP edge list whose 1-based ids are
// used as indices directly so N matches the published size.
std::filesystem::path wiki_vote_matrix(const std::filesystem::path& src, const std::filesystem::path& tmpdir) {
  if (src.extension() == ".mtx") return src;
  std::ifstream in(src);
  if (!in) fail(ErrorKind::Io, "cannot open " + src.string());
  std::vector<Triplet> t;
  Index n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long u = 0, v = 0;
    if (!(ls >> u >> v)) fail(ErrorKind::Parse, "bad edge line: " + line);
    t.push_back({static_cast<Index>(u - 1), static_cast<Index>(v - 1), 1.0});
    n = std::max<Index>(n, static_cast<Index>(std::max(u, v)));
  }
  const auto out = tmpdir / "wiki-vote.mtx";
  write_matrix_market(out, SparseMatrix::from_triplets(n, n, t));
  return out;
}

Outcome wiki_vote() {
  const char* env = std::getenv("SFAB_WIKI_VOTE");
  std::filesystem::path src = env ? env : "";
  if (src.empty()) {
    for (const char* cand : {"data/wiki-Vote.mtx", "data/wiki-Vote.txt"})
      if (std::filesystem::exists(cand)) src = cand;
  }
  if (src.empty() || !std::filesystem::exists(src))
    return {Outcome::Status::Skip, "wiki-Vote not provided (set SFAB_WIKI_VOTE or place data/wiki-Vote.{mtx,txt})"};
  const auto tmp = std::filesystem::temp_directory_path();
  const auto path = wiki_vote_matrix(src, tmp);
  const SparseMatrix a = read_matrix_market(path);
  if (a.rows() != 8297) return verdict(false, "N=" + std::to_string(a.rows()) + ", expected 8297");
  std::string detail = "N=8297";
  bool ok = true;
  for (const char* method : {"sfom-closed", "sgmres"}) {
    RunConfig c;
    apply_setting(c, "matrix", path.string());
    apply_setting(c, "fn", "exp-neg");
    apply_setting(c, "method", method);
    apply_setting(c, "m-max", "50");
    apply_setting(c, "s", "100");
    apply_setting(c, "k", "2");
    apply_setting(c, "d", "10");
    const RunResult r = run(c);
    double last = INFINITY;
    for (const CurveRow& row : r.rows)
      if (row.error_estimate) last = *row.error_estimate;
    ok = ok && last <= 1e-6;
    detail += std::string(", ") + method + " final estimate " + sci(last);
  }
  return verdict(ok, detail + " (tol 1e-6)");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double time_limit_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"degeneracy with S=I and k=m", 10, degeneracy},
      {"quadrature scalar oracles", 5, quadrature_scalar},
      {"conv-diff n=32 reproduction", 60, convdiff_reproduction},
      {"residual quasi-optimality", 30, residual_quasi_optimality},
      {"Stieltjes bound domination", 60, stieltjes_bound_domination},
      {"h-hat polynomial exactness", 10, polynomial_exactness},
      {"two-pass equivalence and memory", 30, two_pass},
      {"stopping-criterion sandwich", 30, stopping_sandwich},
      {"wiki-Vote network (optional)", 600, wiki_vote},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {Outcome::Status::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.status == Outcome::Status::Pass && secs > c.time_limit_s) {
      o.status = Outcome::Status::Fail;
      o.detail += "; runtime over the " + std::to_string(static_cast<int>(c.time_limit_s)) + " s limit";
    }
    const char* tag = o.status == Outcome::Status::Pass ? "PASS" : o.status == Outcome::Status::Fail ? "FAIL" : "SKIP";
    if (o.status == Outcome::Status::Fail) ++failures;
    std::printf("%s  %-34s %6.2f s  %s\n", tag, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
