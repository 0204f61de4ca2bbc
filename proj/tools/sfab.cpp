// sfab run|compare: convergence curves of sketched Krylov methods for f(A)b.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sfab/driver.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kSolver = 3, kIo = 4 };

int exit_code(sfab::ErrorKind kind) {
  switch (kind) {
    case sfab::ErrorKind::Config: return kConfig;
    case sfab::ErrorKind::Io:
    case sfab::ErrorKind::Parse: return kIo;
    default: return kSolver;
  }
}

const std::map<std::string, std::string>& option_help() {
  static const std::map<std::string, std::string> help = {
      {"matrix", "MatrixMarket file"},
      {"gen", "conv-diff:n=<n>,D=<D> or in-degree-laplacian:<edge list>"},
      {"rhs", "ones (normalized), e:<i> (1-based) or file:<path>"},
      {"fn", "inv-sqrt, inv-pow:<a>, log1p-over-z, exp-neg, sign, sqrt"},
      {"method", "sfom-closed, sfom-quad, sgmres, fom-oracle, best-approx"},
      {"m-max", "largest Krylov dimension"},
      {"k", "truncation length of the Arnoldi recurrence"},
      {"s", "sketch size (default 2 m-max, at most N-1)"},
      {"seed", "sketch seed"},
      {"sketch", "srdct, gaussian, sparse-sign, identity"},
      {"density", "nonzeros per column of a sparse-sign sketch"},
      {"quad-tol", "adaptive quadrature tolerance"},
      {"tol", "stop once the relative error estimate is below this (0: never)"},
      {"d", "stopping cadence and estimate lag"},
      {"policy", "full, window, two-pass"},
      {"record-every", "CSV row cadence"},
      {"ell1", "first quadrature order"},
      {"ell2", "second quadrature order"},
      {"fast-normal-eq", "sGMRES node solves through normal equations (true/false)"},
      {"quad-scale", "Stieltjes substitution scale: auto, unit or a number"},
      {"dense-limit", "largest N with reference solutions"},
      {"label", "series name"},
      {"out", "CSV output path (default: standard output)"},
      {"json", "diagnostics JSON path"},
  };
  return help;
}

struct Overrides {
  std::map<std::string, std::string> raw;
};

void add_setting_options(CLI::App* app, Overrides& ov) {
  for (const std::string& key : sfab::config_keys()) {
    app->add_option("--" + key, ov.raw[key], option_help().at(key));
  }
}

void apply_overrides(CLI::App* app, Overrides& ov, sfab::RunConfig& cfg) {
  // generator and matrix reset the problem, so they go before rhs
  for (const std::string& key : sfab::config_keys()) {
    if (app->count("--" + key) > 0) sfab::apply_setting(cfg, key, ov.raw[key]);
  }
}

void print_warnings(const sfab::RunResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning [" << r.series << "]: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sketched Krylov methods for f(A)b"};
  app.require_subcommand(1);

  CLI::App* run_cmd = app.add_subcommand("run", "run one configuration and write its convergence curve");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "key = value settings file; command-line options take precedence");
  Overrides run_ov;
  add_setting_options(run_cmd, run_ov);

  CLI::App* cmp_cmd = app.add_subcommand("compare", "run several configurations into one CSV with a series column");
  std::vector<std::string> cmp_configs;
  cmp_cmd->add_option("configs", cmp_configs, "settings files, one per series");
  Overrides cmp_ov;
  add_setting_options(cmp_cmd, cmp_ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (run_cmd->parsed()) {
      sfab::RunConfig cfg = run_config.empty() ? sfab::RunConfig{} : sfab::read_config_file(run_config);
      apply_overrides(run_cmd, run_ov, cfg);
      const sfab::RunResult r = sfab::run(cfg);
      print_warnings(r);
      if (cfg.out.empty()) {
        sfab::write_csv(std::cout, {r}, false);
      } else {
        sfab::write_csv_file(cfg.out, {r}, false);
      }
      if (!cfg.json.empty()) sfab::write_text_file(cfg.json, sfab::diagnostics_json(cfg, r));
    } else {
      std::vector<sfab::RunConfig> cfgs;
      for (const std::string& path : cmp_configs) {
        cfgs.push_back(sfab::read_config_file(path));
        apply_overrides(cmp_cmd, cmp_ov, cfgs.back());
      }
      const std::vector<sfab::RunResult> rs = sfab::compare(cfgs);
      for (const auto& r : rs) print_warnings(r);
      const std::string out = cmp_ov.raw["out"];
      if (out.empty()) {
        sfab::write_csv(std::cout, rs, true);
      } else {
        sfab::write_csv_file(out, rs, true);
      }
      const std::string json = cmp_ov.raw["json"];
      if (!json.empty()) sfab::write_text_file(json, sfab::diagnostics_json(cfgs, rs));
    }
  } catch (const sfab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kOk;
}
