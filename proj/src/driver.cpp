#include "sfab/driver.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sfab/linalg.hpp"
#include "sfab/oracles.hpp"
#include "sfab/sfom.hpp"
#include "sfab/sgmres.hpp"

namespace sfab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    fail(ErrorKind::Config, key + ": cannot parse number '" + text + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    fail(ErrorKind::Config, key + ": cannot parse integer '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    fail(ErrorKind::Config, key + ": cannot parse unsigned integer '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  fail(ErrorKind::Config, key + ": expected a boolean, got '" + text + "'");
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_sketched(Method m) {
  return m == Method::SfomClosed || m == Method::SfomQuad || m == Method::Sgmres;
}

std::string quad_scale_text(const QuadScale& q) {
  switch (q.mode) {
    case QuadScale::Mode::Auto: return "auto";
    case QuadScale::Mode::Unit: return "unit";
    case QuadScale::Mode::Fixed: return fmt17(q.value);
  }
  return "?";
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  return {
      {"problem", c.problem_text},
      {"rhs", c.rhs_text},
      {"fn", c.function},
      {"method", to_string(c.method)},
      {"m-max", std::to_string(c.m_max)},
      {"k", std::to_string(c.k)},
      {"s", std::to_string(c.s)},
      {"seed", std::to_string(c.seed)},
      {"sketch", to_string(c.sketch)},
      {"density", std::to_string(c.sparse_density)},
      {"quad-tol", fmt17(c.quad_tol)},
      {"tol", fmt17(c.tol)},
      {"d", std::to_string(c.d)},
      {"policy", to_string(c.policy)},
      {"record-every", std::to_string(c.record_every)},
      {"ell1", std::to_string(c.ell1)},
      {"ell2", std::to_string(c.ell2)},
      {"fast-normal-eq", c.fast_normal_eq ? "true" : "false"},
      {"quad-scale", quad_scale_text(c.quad_scale)},
      {"dense-limit", std::to_string(c.dense_limit)},
      {"label", c.label},
  };
}

std::string default_label(const RunConfig& c) {
  std::string s = to_string(c.method);
  if (is_sketched(c.method)) s += " k=" + std::to_string(c.k) + " seed=" + std::to_string(c.seed);
  return s;
}

// Collects warnings once each, tagged with the first m they appeared at.
class WarningLog {
 public:
  void add(const std::string& msg, Index m = -1) {
    if (!seen_.insert(msg).second) return;
    out_.push_back(m >= 0 ? "m=" + std::to_string(m) + ": " + msg : msg);
  }
  std::vector<std::string> take() { return std::move(out_); }

 private:
  std::set<std::string> seen_;
  std::vector<std::string> out_;
};

struct Setup {
  FunctionSpec f;      // as requested
  FunctionSpec inner;  // what the solver evaluates
  Problem problem;
  LinearOperator op;   // operator the Krylov space is built with
  Vector b;            // original right-hand side
  Vector b_eff;        // starting vector of the Krylov space
  Index n = 0;
  std::optional<Vector> fab;
  double fab_norm = 0.0;
};

Setup prepare(const RunConfig& cfg, WarningLog& log) {
  Setup st;
  st.f = parse_function(cfg.function);
  ProblemSpec spec = cfg.problem;
  if (st.f.kind == FunctionKind::SignViaInvSqrt) {
    if (spec.transform != Transform::None)
      fail(ErrorKind::Config, "sign needs an untransformed matrix");
    spec.transform = Transform::Square;
  }
  st.problem = load_problem(spec);
  st.n = st.problem.size();
  st.op = st.problem.op();
  st.b = st.problem.b;
  st.inner = st.f.is_composite() ? FunctionSpec::inv_sqrt() : st.f;
  st.b_eff = st.f.is_composite() ? st.problem.base_op().apply(st.b) : st.b;
  if (!(st.b_eff.norm() > 0.0)) fail(ErrorKind::Config, "starting vector of the Krylov space is zero");
  if (cfg.m_max >= st.n) fail(ErrorKind::Config, "m-max must be smaller than the problem size");

  if (st.n <= cfg.dense_limit) {
    try {
      if (st.f.classification() == FunctionClass::Stieltjes || st.f.is_composite()) {
        st.fab = exact_fab_sparse(*st.problem.matrix, st.b, st.f);
      } else {
        st.fab = exact_fab(st.problem.matrix->to_dense(), st.b, st.f);
      }
      st.fab_norm = st.fab->norm();
      if (!(st.fab_norm > 0.0)) st.fab.reset();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Solver && e.kind() != ErrorKind::Config) throw;
      log.add(std::string("no reference f(A)b: ") + e.what());
    }
  }
  return st;
}

struct Solved {
  Vector coeffs;
  std::optional<Index> quad_ell;
  Vector nodes;
};

Solved solve_at(const RunConfig& cfg, const Setup& st, const WhitenedBasis& wb, WarningLog& log, Index m) {
  Solved out;
  switch (cfg.method) {
    case Method::SfomClosed: {
      const SfomResult r = sfom_closed(wb, st.inner);
      out.coeffs = r.coeffs;
      if (r.diagnostics.quad_ell > 0) out.quad_ell = r.diagnostics.quad_ell;
      for (const auto& w : r.diagnostics.warnings) log.add(w, m);
      break;
    }
    case Method::SfomQuad: {
      RuleContext ctx;
      const Vector ritz = sketched_ritz(wb);
      if (st.inner.classification() == FunctionClass::Entire) {
        ctx.ritz = ritz;
      } else {
        ctx.beta = cfg.quad_scale.mode == QuadScale::Mode::Auto ? stieltjes_scale(ritz)
                   : cfg.quad_scale.mode == QuadScale::Mode::Unit ? 1.0
                                                                  : cfg.quad_scale.value;
      }
      const SfomResult r = sfom_quadrature_adaptive(wb, st.inner, cfg.quad_tol, cfg.ell1, cfg.ell2, ctx);
      out.coeffs = r.coeffs;
      out.quad_ell = r.diagnostics.quad_ell;
      out.nodes = make_rule(st.inner, r.diagnostics.quad_ell, ctx).nodes;
      for (const auto& w : r.diagnostics.warnings) log.add(w, m);
      break;
    }
    case Method::Sgmres: {
      SgmresOptions o;
      o.tol = cfg.quad_tol;
      o.ell1 = cfg.ell1;
      o.ell2 = cfg.ell2;
      o.fast_normal_eq = cfg.fast_normal_eq;
      o.beta = cfg.quad_scale.mode == QuadScale::Mode::Auto ? 0.0
               : cfg.quad_scale.mode == QuadScale::Mode::Unit ? 1.0
                                                              : cfg.quad_scale.value;
      const SgmresResult r = sgmres_solve(wb, st.inner, o);
      out.coeffs = r.coeffs;
      out.quad_ell = r.ell_final;
      out.nodes = r.rule.nodes;
      for (const auto& w : r.warnings) log.add(w, m);
      break;
    }
    default:
      fail(ErrorKind::Internal, "solve_at: not a sketched method");
  }
  return out;
}

RunResult run_sketched(const RunConfig& cfg, Setup& st, WarningLog& log,
                       const std::vector<double>& best_err) {
  using clock = std::chrono::steady_clock;
  RunResult res;
  res.n = st.n;
  res.s = cfg.sketch == SketchKind::Identity ? st.n
          : cfg.s > 0                          ? cfg.s
                                               : std::min<Index>(2 * cfg.m_max, st.n - 1);
  if (res.s <= cfg.m_max) log.add("sketch size s should exceed m-max");

  auto sketch = std::make_shared<const SketchOperator>(
      make_sketch(cfg.sketch, st.n, res.s, cfg.seed, cfg.sparse_density));
  KrylovOptions ko;
  ko.k = cfg.k;
  ko.m_max = cfg.m_max;
  ko.policy = cfg.policy;
  const LinearOperator aop = st.op;
  const auto t0 = clock::now();
  ArnoldiProcess proc(aop, st.b_eff, sketch, ko);

  auto recorded = [&](Index m) { return m % cfg.record_every == 0 || m % cfg.d == 0 || m == cfg.m_max; };
  std::map<Index, Vector> coeffs;        // raw coefficients of every solved m
  std::map<Index, std::size_t> row_of;   // m -> index in res.rows
  Vector last_nodes;

  while (true) {
    const Index before = proc.m();
    proc.step();
    const Index m = proc.m();
    if (m == before) break;
    const bool final_m = proc.breakdown() || m == cfg.m_max;
    const bool rec = recorded(m) || final_m;
    if (!rec && !(m > cfg.d && recorded(m - cfg.d))) continue;

    const WhitenedBasis wb = whiten(proc, m);
    std::optional<Solved> sol;
    try {
      sol = solve_at(cfg, st, wb, log, m);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Solver || final_m) throw;
      log.add(e.what(), m);
    }
    if (sol) {
      coeffs[m] = sol->coeffs;
      last_nodes = sol->nodes;
    }

    if (rec) {
      CurveRow row;
      row.m = m;
      row.eps_hat = wb.eps_hat;
      row.basis_condition_estimate = triangular_condition_estimate(wb.r);
      if (sol) {
        row.quad_ell = sol->quad_ell;
        if (st.fab && cfg.policy == BasisPolicy::Full) {
          const Vector x = assemble(proc.basis(m), sol->coeffs);
          row.error_vs_exact = (*st.fab - x).norm() / st.fab_norm;
        }
      }
      if (!best_err.empty()) row.best_approx_error = best_err[static_cast<std::size_t>(std::min<Index>(
          m, static_cast<Index>(best_err.size()) - 1))];
      row.matvec_count = aop.matvec_count();
      row.wall_time_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      row_of[m] = res.rows.size();
      res.rows.push_back(row);
    }

    // estimate for m - d, available now that m is reached
    bool stop = false;
    const Index md = m - cfg.d;
    if (md >= 1 && row_of.count(md) && coeffs.count(md) && sol) {
      if (wb.eps_hat < 1.0) {
        const double est = error_estimate(wb, sol->coeffs, coeffs[md], wb.eps_hat);
        const Vector sx = wb.r.triangularView<Eigen::Upper>() * sol->coeffs;
        const double scale = sx.norm();
        if (scale > 0.0) {
          const double rel = est / scale;
          res.rows[row_of[md]].error_estimate = rel;
          if (cfg.tol > 0.0 && m % cfg.d == 0 && rel < cfg.tol) stop = true;
        }
      } else {
        log.add("sketch distortion estimate reached 1; error estimates omitted", m);
      }
    }
    if (stop && !final_m) {
      res.stopped_early = true;
      break;
    }
    if (final_m) break;
  }

  res.m_final = proc.m();
  res.breakdown = proc.breakdown();
  if (res.breakdown) log.add("Krylov space became invariant at m=" + std::to_string(res.m_final));
  const WhitenedBasis wb_final = whiten(proc, res.m_final);
  res.ritz = sketched_ritz(wb_final);
  res.quad_nodes = last_nodes;
  const bool have_final = coeffs.count(res.m_final) > 0;

  if (cfg.policy == BasisPolicy::Full) {
    if (have_final) res.approximant = assemble(proc.basis(res.m_final), coeffs[res.m_final]);
  } else if (cfg.policy == BasisPolicy::TwoPass) {
    std::vector<Vector> cs;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
      const auto it = coeffs.find(res.rows[i].m);
      if (it == coeffs.end()) continue;
      cs.push_back(it->second);
      rows.push_back(i);
    }
    if (!cs.empty()) {
      TwoPassStats stats;
      const std::vector<Vector> xs =
          two_pass_assemble(st.problem.op(), st.b_eff, cs, cfg.k, &proc.subdiagonals(), &stats);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        CurveRow& row = res.rows[rows[i]];
        if (st.fab) row.error_vs_exact = (*st.fab - xs[i]).norm() / st.fab_norm;
      }
      if (have_final) res.approximant = xs.back();
    }
    // a second pass that stops at v_m costs m matvecs on top of the first pass
    for (CurveRow& row : res.rows) row.matvec_count += row.m;
  } else {
    log.add("window policy keeps no basis; no approximant or error_vs_exact is formed");
  }
  return res;
}

RunResult run_oracle(const RunConfig& cfg, Setup& st, const FullArnoldi& arn, const std::vector<double>& best_err) {
  using clock = std::chrono::steady_clock;
  RunResult res;
  res.n = st.n;
  const auto t0 = clock::now();
  const Index top = std::min(cfg.m_max, arn.m);
  for (Index m = 1; m <= top; ++m) {
    if (!(m % cfg.record_every == 0 || m % cfg.d == 0 || m == top)) continue;
    CurveRow row;
    row.m = m;
    row.best_approx_error = best_err[static_cast<std::size_t>(m)];
    if (cfg.method == Method::FomOracle) {
      const Vector x = full_fom(truncate(arn, m), st.inner);
      row.error_vs_exact = (*st.fab - x).norm() / st.fab_norm;
      if (m == top) res.approximant = x;
    } else {
      row.error_vs_exact = row.best_approx_error;
    }
    row.matvec_count = m;
    row.wall_time_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    res.rows.push_back(row);
  }
  res.m_final = top;
  res.breakdown = arn.breakdown && top == arn.m;
  res.ritz = dense_eigenvalues(DenseMatrix(arn.h.topLeftCorner(top, top)));
  return res;
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "sfom-closed") return Method::SfomClosed;
  if (name == "sfom-quad") return Method::SfomQuad;
  if (name == "sgmres") return Method::Sgmres;
  if (name == "fom-oracle") return Method::FomOracle;
  if (name == "best-approx") return Method::BestApprox;
  fail(ErrorKind::Config, "unknown method '" + name + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::SfomClosed: return "sfom-closed";
    case Method::SfomQuad: return "sfom-quad";
    case Method::Sgmres: return "sgmres";
    case Method::FomOracle: return "fom-oracle";
    case Method::BestApprox: return "best-approx";
  }
  return "?";
}

QuadScale parse_quad_scale(const std::string& text) {
  QuadScale q;
  if (text == "auto") return q;
  if (text == "unit") {
    q.mode = QuadScale::Mode::Unit;
    return q;
  }
  q.mode = QuadScale::Mode::Fixed;
  q.value = parse_double("quad-scale", text);
  if (!(q.value > 0.0)) fail(ErrorKind::Config, "quad-scale must be auto, unit or a positive number");
  return q;
}

ProblemSpec parse_generator(const std::string& text) {
  ProblemSpec spec;
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (name == "conv-diff") {
    ConvDiffSource src;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) fail(ErrorKind::Config, "conv-diff: expected key=value, got '" + item + "'");
      const std::string key = trim(item.substr(0, eq));
      const std::string val = item.substr(eq + 1);
      if (key == "n") {
        src.n = parse_int("conv-diff n", val);
      } else if (key == "D") {
        src.diffusion = parse_double("conv-diff D", val);
      } else {
        fail(ErrorKind::Config, "conv-diff: unknown parameter '" + key + "'");
      }
    }
    if (src.n < 1) fail(ErrorKind::Config, "conv-diff: n must be positive");
    if (!(src.diffusion > 0.0)) fail(ErrorKind::Config, "conv-diff: D must be positive");
    spec.source = src;
    return spec;
  }
  if (name == "in-degree-laplacian") {
    if (rest.empty()) fail(ErrorKind::Config, "in-degree-laplacian needs an edge-list path");
    spec.source = EdgeListSource{rest, true};
    spec.transform = Transform::InDegreeLaplacian;
    return spec;
  }
  fail(ErrorKind::Config, "unknown generator '" + name + "'");
}

RhsSpec parse_rhs(const std::string& text) {
  if (text == "ones") return RhsSpec::ones();
  if (text.rfind("e:", 0) == 0) {
    const long long i = parse_int("rhs", text.substr(2));
    if (i < 1) fail(ErrorKind::Config, "rhs: unit vector index is 1-based");
    return RhsSpec::unit(static_cast<Index>(i - 1));
  }
  if (text.rfind("file:", 0) == 0) return RhsSpec::file(text.substr(5));
  fail(ErrorKind::Config, "rhs: expected ones, e:<i> or file:<path>, got '" + text + "'");
}

std::vector<std::string> config_keys() {
  return {"matrix", "gen",  "rhs",  "fn",   "method", "m-max",          "k",          "s",
          "seed",   "sketch", "density", "quad-tol", "tol", "d",           "policy",     "record-every",
          "ell1",   "ell2", "fast-normal-eq", "quad-scale", "dense-limit", "label", "out", "json"};
}

void apply_setting(RunConfig& c, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "matrix") {
    const RhsSpec rhs = c.problem.rhs;
    c.problem = ProblemSpec{};
    c.problem.source = MatrixMarketSource{value};
    c.problem.rhs = rhs;
    c.problem_text = "matrix:" + value;
  } else if (key == "gen") {
    const RhsSpec rhs = c.problem.rhs;
    c.problem = parse_generator(value);
    c.problem.rhs = rhs;
    c.problem_text = value;
  } else if (key == "rhs") {
    c.problem.rhs = parse_rhs(value);
    c.rhs_text = value;
  } else if (key == "fn") {
    parse_function(value);
    c.function = value;
  } else if (key == "method") {
    c.method = parse_method(value);
  } else if (key == "m-max") {
    c.m_max = parse_int(key, value);
  } else if (key == "k") {
    c.k = parse_int(key, value);
  } else if (key == "s") {
    c.s = parse_int(key, value);
  } else if (key == "seed") {
    c.seed = parse_uint(key, value);
  } else if (key == "sketch") {
    c.sketch = parse_sketch_kind(value);
  } else if (key == "density") {
    c.sparse_density = parse_int(key, value);
  } else if (key == "quad-tol") {
    c.quad_tol = parse_double(key, value);
  } else if (key == "tol") {
    c.tol = parse_double(key, value);
  } else if (key == "d") {
    c.d = parse_int(key, value);
  } else if (key == "policy") {
    c.policy = parse_policy(value);
  } else if (key == "record-every") {
    c.record_every = parse_int(key, value);
  } else if (key == "ell1") {
    c.ell1 = parse_int(key, value);
  } else if (key == "ell2") {
    c.ell2 = parse_int(key, value);
  } else if (key == "fast-normal-eq") {
    c.fast_normal_eq = parse_bool(key, value);
  } else if (key == "quad-scale") {
    c.quad_scale = parse_quad_scale(value);
  } else if (key == "dense-limit") {
    c.dense_limit = parse_int(key, value);
  } else if (key == "label") {
    c.label = value;
  } else if (key == "out") {
    c.out = value;
  } else if (key == "json") {
    c.json = value;
  } else {
    fail(ErrorKind::Config, "unknown setting '" + key + "'");
  }
}

RunConfig read_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Config, path + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

void validate(const RunConfig& c, std::vector<std::string>* warnings) {
  if (c.k < 1) fail(ErrorKind::Config, "k must be at least 1");
  if (c.m_max < 1) fail(ErrorKind::Config, "m-max must be at least 1");
  if (c.s < 0) fail(ErrorKind::Config, "s must be nonnegative");
  if (!(c.quad_tol > 0.0)) fail(ErrorKind::Config, "quad-tol must be positive");
  if (!(c.tol >= 0.0)) fail(ErrorKind::Config, "tol must be nonnegative");
  if (c.d < 1) fail(ErrorKind::Config, "d must be at least 1");
  if (c.record_every < 1) fail(ErrorKind::Config, "record-every must be at least 1");
  if (c.ell1 < 1 || c.ell2 <= c.ell1) fail(ErrorKind::Config, "need 1 <= ell1 < ell2");
  if (c.sparse_density < 1) fail(ErrorKind::Config, "density must be at least 1");
  if (c.dense_limit < 0) fail(ErrorKind::Config, "dense-limit must be nonnegative");
  const FunctionSpec f = parse_function(c.function);
  if ((c.method == Method::SfomQuad || c.method == Method::Sgmres) && !has_quadrature_form(f))
    fail(ErrorKind::Config, to_string(c.method) + " needs a function with a quadrature form");
  if (f.kind == FunctionKind::SignViaInvSqrt && c.problem.transform != Transform::None)
    fail(ErrorKind::Config, "sign needs an untransformed matrix");
  if (warnings && is_sketched(c.method) && c.s > 0 && c.s <= c.m_max)
    warnings->push_back("sketch size s should exceed m-max");
}

RunResult run(const RunConfig& cfg) {
  WarningLog log;
  {
    std::vector<std::string> w;
    validate(cfg, &w);
    for (const auto& x : w) log.add(x);
  }
  Setup st = prepare(cfg, log);

  const bool oracle = !is_sketched(cfg.method);
  if (oracle && !st.fab)
    fail(ErrorKind::Config, to_string(cfg.method) + " needs a reference f(A)b (problem size above dense-limit?)");

  std::vector<double> best_err;
  std::optional<FullArnoldi> arn;
  if (st.fab) {
    arn = full_arnoldi(st.problem.op(), st.b_eff, cfg.m_max);
    best_err.assign(static_cast<std::size_t>(arn->m) + 1, 0.0);
    best_err[0] = 1.0;
    for (Index m = 1; m <= arn->m; ++m)
      best_err[static_cast<std::size_t>(m)] = best_approximation_error(arn->v.leftCols(m), *st.fab) / st.fab_norm;
  }

  RunResult res = oracle ? run_oracle(cfg, st, *arn, best_err) : run_sketched(cfg, st, log, best_err);
  res.series = cfg.label.empty() ? default_label(cfg) : cfg.label;
  for (auto& w : log.take()) res.warnings.push_back(std::move(w));
  return res;
}

std::vector<RunResult> compare(const std::vector<RunConfig>& configs) {
  if (configs.empty()) fail(ErrorKind::Config, "compare: no configurations given");
  for (const RunConfig& c : configs) {
    if (c.problem_text != configs[0].problem_text || c.rhs_text != configs[0].rhs_text)
      fail(ErrorKind::Config, "compare: configurations use different problems ('" + configs[0].problem_text +
                                  "' vs '" + c.problem_text + "')");
    if (c.function != configs[0].function)
      fail(ErrorKind::Config, "compare: configurations use different functions ('" + configs[0].function +
                                  "' vs '" + c.function + "')");
  }
  std::vector<RunResult> out;
  std::set<std::string> labels;
  for (const RunConfig& c : configs) {
    out.push_back(run(c));
    std::string label = out.back().series;
    for (int i = 2; labels.count(label); ++i) label = out.back().series + " #" + std::to_string(i);
    labels.insert(label);
    out.back().series = label;
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<RunResult>& results, bool series_column) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
  if (series_column) out << "series,";
  out << kCsvHeader << '\n';
  for (const RunResult& r : results) {
    for (const CurveRow& row : r.rows) {
      if (series_column) {
        // labels are written as-is unless they need quoting
        if (r.series.find_first_of(",\"\n") != std::string::npos) {
          std::string q = "\"";
          for (char ch : r.series) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          out << q << "\",";
        } else {
          out << r.series << ',';
        }
      }
      out << row.m << ',' << opt(row.error_vs_exact) << ',' << opt(row.error_estimate) << ','
          << opt(row.best_approx_error) << ',' << opt(row.basis_condition_estimate) << ',' << opt(row.eps_hat)
          << ',' << (row.quad_ell ? std::to_string(*row.quad_ell) : std::string()) << ','
          << fmt17(row.wall_time_ms) << ',' << row.matvec_count << '\n';
    }
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  f << text;
  f.close();
  if (!f) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

void write_csv_file(const std::string& path, const std::vector<RunResult>& results, bool series_column) {
  std::ostringstream ss;
  write_csv(ss, results, series_column);
  write_text_file(path, ss.str());
}

namespace {

nlohmann::json complex_list(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back({{"re", v(i).real()}, {"im", v(i).imag()}});
  return arr;
}

nlohmann::json run_json(const RunConfig& c, const RunResult& r) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : config_entries(c)) cfg[k] = v;
  nlohmann::json j;
  j["series"] = r.series;
  j["config"] = cfg;
  j["n"] = r.n;
  j["s"] = r.s;
  j["m_final"] = r.m_final;
  j["stopped_early"] = r.stopped_early;
  j["breakdown"] = r.breakdown;
  j["matvec_count"] = r.rows.empty() ? 0 : r.rows.back().matvec_count;
  j["ritz_values"] = complex_list(r.ritz);
  j["quadrature_nodes"] = complex_list(r.quad_nodes);
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace

std::string diagnostics_json(const RunConfig& config, const RunResult& result) {
  return run_json(config, result).dump(2) + "\n";
}

std::string diagnostics_json(const std::vector<RunConfig>& configs, const std::vector<RunResult>& results) {
  require_dims(configs.size() == results.size(), "diagnostics_json: one result per configuration");
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < configs.size(); ++i) runs.push_back(run_json(configs[i], results[i]));
  return nlohmann::json{{"runs", runs}}.dump(2) + "\n";
}

}  // namespace sfab
