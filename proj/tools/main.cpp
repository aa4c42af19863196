#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "entropal/cli.hpp"
#include "entropal/errors.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw entropal::ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int log_verbosity() {
  const char* env = std::getenv("ENTROPAL_LOG");
  if (!env) return 0;
  std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace entropal;
  CLI::App app{"entropal — entropy-regularized semidefinite solver bench"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write an instance file");
  std::string gen_family, gen_out = "instance.json", gen_path, gen_config;
  int gen_n = 0, gen_zeros = 0, gen_rank = 0, gen_random_edges = 0;
  double gen_mu = 1.0, gen_eps = 0.0, gen_gamma = 0.0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--config", gen_config, "generator spec JSON file");
  gen->add_option("--family", gen_family, "p0 | br | kl");
  gen->add_option("--n", gen_n, "dimension");
  gen->add_option("--zeros", gen_zeros, "p0: forced-zero off-diagonal entries");
  gen->add_option("--mu", gen_mu, "entropy weight");
  gen->add_option("--eps", gen_eps, "PSD shift");
  gen->add_option("--rank", gen_rank, "br: rank of the synthetic fixture");
  gen->add_option("--gamma", gen_gamma, "kl: distance bound");
  gen->add_option("--random-edges", gen_random_edges, "kl: sample this many edges");
  gen->add_option("--data", gen_path, "br/kl: matrix or edge-list file");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output instance file");

  // solve
  auto* solve = app.add_subcommand("solve", "solve one instance");
  std::string solve_config, solve_instance, solve_out, solve_solver;
  double solve_tol = -1.0;
  int solve_max_outer = -1, solve_palm_iters = -1;
  std::uint64_t solve_seed = 0;
  bool solve_seed_set = false;
  solve->add_option("--config", solve_config, "run config JSON file");
  solve->add_option("--instance", solve_instance, "instance file");
  solve->add_option("--solver", solve_solver, "palm | alm | palm+alm");
  solve->add_option("--tol", solve_tol, "KKT tolerance (default 1e-6)");
  solve->add_option("--max-outer", solve_max_outer, "outer iteration cap");
  solve->add_option("--palm-iters", solve_palm_iters,
                    "PALM iterations (warmstart length, default 200)");
  solve->add_option("--out", solve_out, "report path prefix");
  solve
      ->add_option("--seed", solve_seed,
                   "override the generator seed from the config")
      ->each([&](const std::string&) { solve_seed_set = true; });

  // bench
  auto* bench = app.add_subcommand("bench", "run a suite and emit the table");
  std::string bench_config, bench_out;
  bench->add_option("--config", bench_config, "suite JSON file")->required();
  bench->add_option("--out", bench_out, "report path prefix");

  // verify
  auto* ver = app.add_subcommand("verify", "run the property suites");
  bool inject_bug = false;
  ver->add_flag("--inject-gradient-bug", inject_bug,
                "test fixture: corrupt the analytic gradient")
      ->group("");  // hidden

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      InstanceSpec spec;
      if (!gen_config.empty()) {
        spec = instance_spec_from_json(slurp(gen_config));
      } else {
        spec.family = gen_family;
        spec.n = gen_n;
        spec.num_zero_entries = gen_zeros;
        spec.mu = gen_mu;
        spec.eps = gen_eps;
        spec.rank = gen_rank;
        spec.gamma = gen_gamma;
        spec.random_edges = gen_random_edges;
        spec.path = gen_path;
        spec.seed = gen_seed;
        if (spec.family.empty())
          throw ConfigError("generate: --family or --config is required");
        if (spec.n <= 0 && spec.path.empty())
          throw ConfigError("generate: --n is required");
      }
      return cmd_generate(spec, gen_out);
    }
    if (solve->parsed()) {
      RunConfig cfg;
      if (!solve_config.empty()) cfg = run_config_from_json(slurp(solve_config));
      if (!solve_instance.empty()) cfg.instance_path = solve_instance;
      if (!solve_solver.empty()) {
        if (solve_solver != "palm" && solve_solver != "alm" &&
            solve_solver != "palm+alm")
          throw ConfigError("solve: bad --solver value");
        cfg.solver = solve_solver;
      }
      if (solve_tol > 0.0) cfg.tol = solve_tol;
      if (solve_max_outer > 0) cfg.max_outer = solve_max_outer;
      if (solve_palm_iters > 0) cfg.palm_iters = solve_palm_iters;
      if (!solve_out.empty()) cfg.out = solve_out;
      if (solve_seed_set) cfg.generator.seed = solve_seed;
      cfg.verbosity = log_verbosity();
      return cmd_solve(cfg);
    }
    if (bench->parsed()) {
      BenchConfig cfg = bench_config_from_json(slurp(bench_config));
      if (!bench_out.empty()) cfg.out = bench_out;
      cfg.verbosity = log_verbosity();
      return cmd_bench(cfg);
    }
    if (ver->parsed()) return cmd_verify(inject_bug);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolverError;
  }
  return kExitConfigError;
}
