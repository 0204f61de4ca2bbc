#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sfab/ingest.hpp"
#include "sfab/krylov.hpp"
#include "sfab/matfun.hpp"
#include "sfab/sketch.hpp"

namespace sfab {

enum class Method { SfomClosed, SfomQuad, Sgmres, FomOracle, BestApprox };

Method parse_method(const std::string& name);
std::string to_string(Method method);

/// Scale of the Stieltjes substitution: picked from the sketched Ritz
/// values, fixed at 1, or a user value.
struct QuadScale {
  enum class Mode { Auto, Unit, Fixed };
  Mode mode = Mode::Auto;
  double value = 1.0;
};
QuadScale parse_quad_scale(const std::string& text);

struct RunConfig {
  ProblemSpec problem;
  std::string problem_text = "conv-diff:n=100,D=1e-3";  // as given, for reports
  std::string rhs_text = "ones";
  std::string function = "inv-sqrt";
  Method method = Method::Sgmres;
  Index m_max = 100;
  Index k = 4;
  Index s = 0;  // 0: 2 m_max, clipped to N-1
  std::uint64_t seed = 7;
  SketchKind sketch = SketchKind::Srdct;
  Index sparse_density = 8;
  double quad_tol = 1e-7;
  double tol = 0.0;  // stop once the relative error estimate drops below; 0 runs to m_max
  Index d = 20;      // stopping cadence and estimate lag
  BasisPolicy policy = BasisPolicy::Full;
  Index record_every = 1;
  Index ell1 = 16;
  Index ell2 = 23;
  bool fast_normal_eq = false;
  QuadScale quad_scale;
  Index dense_limit = kDefaultDenseLimit;
  std::string label;  // series name in compare output
  std::string out;    // CSV path
  std::string json;   // diagnostics path
};

/// Keys are the long CLI option names without dashes ("m-max", "gen", ...).
/// Throws Config for unknown keys or malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
/// Flat "key = value" lines, '#' comments. Settings are applied on top of `base`.
RunConfig read_config_file(const std::string& path, RunConfig base = {});
std::vector<std::string> config_keys();

/// Config errors for invalid settings; advisories go to `warnings`.
void validate(const RunConfig& config, std::vector<std::string>* warnings = nullptr);

/// "conv-diff:n=32,D=0.001" and similar.
ProblemSpec parse_generator(const std::string& text);
RhsSpec parse_rhs(const std::string& text);

struct CurveRow {
  Index m = 0;
  std::optional<double> error_vs_exact;
  std::optional<double> error_estimate;
  std::optional<double> best_approx_error;
  std::optional<double> basis_condition_estimate;
  std::optional<double> eps_hat;
  std::optional<Index> quad_ell;
  double wall_time_ms = 0.0;
  long long matvec_count = 0;
};

struct RunResult {
  std::string series;
  Index n = 0;
  Index s = 0;
  Index m_final = 0;
  bool stopped_early = false;
  bool breakdown = false;
  std::vector<CurveRow> rows;
  Vector ritz;             // at the final m
  Vector quad_nodes;       // accepted rule at the final m, if any
  Vector approximant;      // when the method assembles one
  std::vector<std::string> warnings;
};

/// Runs one configuration. Error columns are relative to ||f(A)b||; the
/// estimate is relative to the sketched norm of the current approximant.
RunResult run(const RunConfig& config);

/// Runs every configuration; all must share problem and function.
std::vector<RunResult> compare(const std::vector<RunConfig>& configs);

inline constexpr const char* kCsvHeader =
    "m,error_vs_exact,error_estimate,best_approx_error,basis_condition_estimate,eps_hat,quad_ell,"
    "wall_time_ms,matvec_count";

/// 17 significant digits, empty fields for unavailable values. With
/// `series_column` a leading "series" column is written.
void write_csv(std::ostream& out, const std::vector<RunResult>& results, bool series_column);
void write_csv_file(const std::string& path, const std::vector<RunResult>& results, bool series_column);

/// JSON diagnostics: configuration, Ritz values and nodes at the final m, warnings.
std::string diagnostics_json(const RunConfig& config, const RunResult& result);
std::string diagnostics_json(const std::vector<RunConfig>& configs, const std::vector<RunResult>& results);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sfab
