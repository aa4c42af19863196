#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "entropal/cli.hpp"
#include "entropal/errors.hpp"

using namespace entropal;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("entropal_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  std::string cmd = std::string(ENTROPAL_CLI_PATH) + " " + args +
                    " > /dev/null 2> /dev/null";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("run config parsing is strict about keys and values") {
  CHECK_THROWS_AS(run_config_from_json("{\"unknown\": 1}"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json("{\"solver\": \"magic\"}"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json("{\"tol\": -1.0}"), ConfigError);
  CHECK_THROWS_AS(
      run_config_from_json("{\"palm\": {\"tau\": 2.5}}"), ConfigError);
  CHECK_THROWS_AS(
      run_config_from_json(
          "{\"instance\": {\"generator\": {\"family\": \"nope\", \"n\": 3}}}"),
      ConfigError);
  RunConfig ok = run_config_from_json(
      "{\"instance\": {\"generator\": {\"family\": \"p0\", \"n\": 5, "
      "\"zeros\": 2}}, \"tol\": 1e-7, \"solver\": \"alm\"}");
  CHECK(ok.tol == 1e-7);
  CHECK(ok.generator.family == "p0");
}

TEST_CASE("solve is deterministic for a fixed config and seed") {
  RunConfig cfg;
  cfg.generator = {.family = "p0",
                   .n = 8,
                   .seed = 17,
                   .mu = 1.0,
                   .num_zero_entries = 6};
  cfg.solver = "palm+alm";
  cfg.tol = 1e-7;
  SolveOutcome a = run_solve(cfg);
  SolveOutcome b = run_solve(cfg);
  REQUIRE(a.exit_code == kExitOk);
  REQUIRE(b.exit_code == kExitOk);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].pobj == doctest::Approx(b.rows[i].pobj).epsilon(1e-12));
    CHECK(a.rows[i].RP == doctest::Approx(b.rows[i].RP).epsilon(1e-12));
    CHECK(a.rows[i].it == b.rows[i].it);
    CHECK(a.rows[i].itsub == b.rows[i].itsub);
  }
}

TEST_CASE("bench produces a two-row pairing per instance") {
  BenchConfig cfg;
  cfg.instances.push_back(
      {.family = "p0", .n = 6, .seed = 2, .mu = 1.0, .num_zero_entries = 4});
  cfg.instances.push_back({.family = "kl",
                           .n = 5,
                           .seed = 3,
                           .random_edges = 3,
                           .gamma = 0.5});
  cfg.tol = 1e-6;
  cfg.palm_only_iters = 3000;
  auto rows = run_bench(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].algorithm == "PALM");
  CHECK(rows[1].algorithm == "ALM");
  CHECK(rows[2].algorithm == "PALM");
  CHECK(rows[3].algorithm == "ALM");
  for (const auto& r : rows) CHECK(!r.status.empty());
  CHECK(rows[1].converged);
  CHECK(rows[3].converged);
}

TEST_CASE("cli generate/solve round trip and exit codes") {
  TempDir tmp;
  fs::path inst = tmp.path / "p0.json";
  int rc = run_cli("generate --family p0 --n 6 --zeros 4 --mu 1.0 --seed 5 "
                   "--out " +
                   inst.string());
  REQUIRE(rc == kExitOk);
  REQUIRE(fs::exists(inst));

  // generating again with the same seed gives the identical file
  fs::path inst2 = tmp.path / "p0_again.json";
  run_cli("generate --family p0 --n 6 --zeros 4 --mu 1.0 --seed 5 --out " +
          inst2.string());
  CHECK(slurp(inst) == slurp(inst2));

  fs::path report = tmp.path / "report";
  rc = run_cli("solve --instance " + inst.string() +
               " --solver palm+alm --tol 1e-6 --out " + report.string());
  CHECK(rc == kExitOk);
  CHECK(fs::exists(tmp.path / "report.csv"));
  CHECK(fs::exists(tmp.path / "report.txt"));
  CHECK(fs::exists(tmp.path / "report_history.csv"));
  std::string table = slurp(tmp.path / "report.txt");
  CHECK(table.find("ALM") != std::string::npos);

  // PALM-only with a tiny iteration cap cannot converge: exit 1, report kept
  fs::path preport = tmp.path / "palm_report";
  rc = run_cli("solve --instance " + inst.string() +
               " --solver palm --palm-iters 3 --tol 1e-10 --out " +
               preport.string());
  CHECK(rc == kExitNotConverged);
  CHECK(slurp(tmp.path / "palm_report.txt").find("not converged") !=
        std::string::npos);
}

TEST_CASE("cli rejects malformed configs with exit code 2") {
  TempDir tmp;
  fs::path cfg = tmp.path / "bad.json";
  write(cfg, "{\"instance\": {\"generator\": {\"family\": \"p0\", \"n\": 5}}, "
             "\"mystery\": true}");
  CHECK(run_cli("solve --config " + cfg.string()) == kExitConfigError);
  write(cfg, "{ definitely not json");
  CHECK(run_cli("solve --config " + cfg.string()) == kExitConfigError);
  CHECK(run_cli("solve --instance /nonexistent.json") == kExitConfigError);
}

TEST_CASE("cli bench writes the aggregated table") {
  TempDir tmp;
  fs::path cfg = tmp.path / "suite.json";
  write(cfg,
        "{\"instances\": ["
        "{\"family\": \"p0\", \"n\": 5, \"zeros\": 3, \"mu\": 1.0, \"seed\": 1},"
        "{\"family\": \"p0\", \"n\": 5, \"zeros\": 3, \"mu\": 0.5, \"seed\": 2}"
        "], \"tol\": 1e-6, \"palm_only_iters\": 2000, \"out\": \"" +
            (tmp.path / "bench").string() + "\"}");
  int rc = run_cli("bench --config " + cfg.string());
  CHECK(rc == kExitOk);
  std::string table = slurp(tmp.path / "bench.txt");
  CHECK(std::count(table.begin(), table.end(), '\n') >= 6);  // header + 4 rows
  std::string csv = slurp(tmp.path / "bench.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("cli verify passes clean and fails with the injected bug") {
  CHECK(run_cli("verify") == kExitOk);
  CHECK(run_cli("verify --inject-gradient-bug") == kExitNotConverged);
}

TEST_CASE("verify suites report the named invariant on failure") {
  VerifyOutcome clean = run_verify_suites(false);
  CHECK(clean.all_pass);
  VerifyOutcome bad = run_verify_suites(true);
  CHECK_FALSE(bad.all_pass);
  bool found = false;
  for (const auto& c : bad.checks)
    if (c.name == "auglag-gradient-fd" && !c.pass) found = true;
  CHECK(found);
  CHECK(bad.checks.size() == clean.checks.size());
}
