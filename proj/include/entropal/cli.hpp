#ifndef ENTROPAL_CLI_HPP
#define ENTROPAL_CLI_HPP

#include <string>
#include <vector>

#include "entropal/entropy_alm.hpp"
#include "entropal/instances.hpp"
#include "entropal/report.hpp"

namespace entropal {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverError = 3;

struct RunConfig {
  std::string instance_path;  // exclusive with generator
  InstanceSpec generator;     // active when generator.family is nonempty
  std::string solver = "palm+alm";
  double tol = 1e-6;
  int max_outer = 60;
  int palm_iters = 200;  // warmstart length; also the cap in palm-only mode
  double palm_sigma = 1.0;
  double palm_tau = 1.618;
  int palm_check_every = 100;
  EntropyAlmConfig alm;
  std::string out;  // output path prefix
  int verbosity = 0;
};

// Strict parser: unknown keys anywhere are a ConfigError.
RunConfig run_config_from_json(const std::string& text);
InstanceSpec instance_spec_from_json(const std::string& text);

struct SolveOutcome {
  int exit_code = kExitSolverError;
  std::vector<ReportRow> rows;
  std::string message;
};

SolveOutcome run_solve(const RunConfig& cfg);

int cmd_generate(const InstanceSpec& spec, const std::string& out_path);
int cmd_solve(const RunConfig& cfg);

struct BenchConfig {
  std::vector<InstanceSpec> instances;
  double tol = 1e-6;
  int max_outer = 60;
  int palm_warmstart_iters = 200;
  long long palm_only_iters = 10000;
  double palm_sigma = 1.0;
  double palm_tau = 1.618;
  int palm_check_every = 100;
  EntropyAlmConfig alm;
  std::string out;
  int verbosity = 0;
};

BenchConfig bench_config_from_json(const std::string& text);

// Two rows per instance (PALM-only, then PALM-warmstarted ALM), paper-table
// style. Per-row failures are recorded in the status column and the suite
// continues.
std::vector<ReportRow> run_bench(const BenchConfig& cfg);
int cmd_bench(const BenchConfig& cfg);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOutcome {
  std::vector<VerifyCheck> checks;
  bool all_pass = true;
};

// Property suites over the prox/spectral/duality invariants. The injected
// gradient bug is a test fixture demonstrating failure reporting.
VerifyOutcome run_verify_suites(bool inject_gradient_bug = false);
int cmd_verify(bool inject_gradient_bug = false);

std::string instance_basename(const InstanceSpec& spec);

}  // namespace entropal

#endif
