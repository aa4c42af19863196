#include "entropal/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"

#include "entropal/errors.hpp"
#include "entropal/prox.hpp"
#include "entropal/rng.hpp"
#include "entropal/verify.hpp"

namespace entropal {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("config: unknown key '" + it.key() + "' in " + context);
  }
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(what + ": invalid JSON: " + e.what());
  }
}

InstanceSpec spec_from(const json& j) {
  check_keys(j,
             {"family", "n", "seed", "mu", "eps", "zeros", "rank", "rank_tol",
              "edges", "random_edges", "gamma", "path"},
             "generator");
  InstanceSpec spec;
  spec.family = j.at("family");
  spec.n = j.value("n", 0);
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.mu = j.value("mu", 1.0);
  spec.eps = j.value("eps", 0.0);
  spec.num_zero_entries = j.value("zeros", 0);
  spec.rank = j.value("rank", 0);
  spec.rank_tol = j.value("rank_tol", 1e-8);
  spec.random_edges = j.value("random_edges", 0);
  spec.gamma = j.value("gamma", 0.0);
  spec.path = j.value("path", "");
  if (j.contains("edges"))
    for (const auto& e : j["edges"])
      spec.edges.push_back({static_cast<int>(e.at(0)) - 1,
                            static_cast<int>(e.at(1)) - 1});  // 1-based in configs
  if (spec.family != "p0" && spec.family != "br" && spec.family != "kl")
    throw ConfigError("config: unknown family '" + spec.family + "'");
  if (spec.n <= 0 && spec.path.empty())
    throw ConfigError("config: generator needs a positive n");
  return spec;
}

void alm_from(const json& j, EntropyAlmConfig& alm) {
  check_keys(j, {"sigma0", "rho", "sigma_cap", "max_inner", "pcg_max_iter"},
             "alm");
  alm.sigma0 = j.value("sigma0", alm.sigma0);
  alm.rho = j.value("rho", alm.rho);
  alm.sigma_cap = j.value("sigma_cap", alm.sigma_cap);
  alm.ssn.max_iter = j.value("max_inner", alm.ssn.max_iter);
  alm.ssn.pcg_max_iter = j.value("pcg_max_iter", alm.ssn.pcg_max_iter);
}

}  // namespace

InstanceSpec instance_spec_from_json(const std::string& text) {
  return spec_from(parse_json(text, "generator spec"));
}

RunConfig run_config_from_json(const std::string& text) {
  json j = parse_json(text, "run config");
  check_keys(j,
             {"instance", "solver", "tol", "max_outer", "palm", "alm", "out",
              "seed"},
             "run config");
  RunConfig cfg;
  if (j.contains("instance")) {
    const json& inst = j["instance"];
    check_keys(inst, {"path", "generator"}, "instance");
    if (inst.contains("path") && inst.contains("generator"))
      throw ConfigError("config: give either instance.path or instance.generator");
    if (inst.contains("path")) cfg.instance_path = inst["path"];
    if (inst.contains("generator")) cfg.generator = spec_from(inst["generator"]);
  }
  cfg.solver = j.value("solver", cfg.solver);
  if (cfg.solver != "palm" && cfg.solver != "alm" && cfg.solver != "palm+alm")
    throw ConfigError("config: solver must be palm, alm or palm+alm");
  cfg.tol = j.value("tol", cfg.tol);
  cfg.max_outer = j.value("max_outer", cfg.max_outer);
  if (j.contains("palm")) {
    const json& p = j["palm"];
    check_keys(p, {"iters", "sigma", "tau", "check_every"}, "palm");
    cfg.palm_iters = p.value("iters", cfg.palm_iters);
    cfg.palm_sigma = p.value("sigma", cfg.palm_sigma);
    cfg.palm_tau = p.value("tau", cfg.palm_tau);
    cfg.palm_check_every = p.value("check_every", cfg.palm_check_every);
  }
  if (j.contains("alm")) alm_from(j["alm"], cfg.alm);
  cfg.out = j.value("out", "");
  if (j.contains("seed")) cfg.generator.seed = j["seed"];
  if (cfg.tol <= 0.0) throw ConfigError("config: tol must be positive");
  if (cfg.palm_tau <= 0.0 || cfg.palm_tau >= 2.0)
    throw ConfigError("config: palm.tau must lie in (0,2)");
  return cfg;
}

std::string instance_basename(const InstanceSpec& spec) {
  std::ostringstream os;
  if (spec.family == "p0") {
    os << "rand";
  } else if (spec.family == "br") {
    os << "br";
  } else if (spec.family == "kl") {
    os << "kl";
  } else {
    os << (spec.family.empty() ? "file" : spec.family);
  }
  return os.str();
}

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

GeneratedInstance obtain_instance(const RunConfig& cfg) {
  if (!cfg.instance_path.empty()) return load_instance(cfg.instance_path);
  if (cfg.generator.family.empty())
    throw ConfigError("config: no instance source given");
  return generate_instance(cfg.generator);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path);
  out << text;
}

}  // namespace

SolveOutcome run_solve(const RunConfig& cfg) {
  SolveOutcome outcome;
  GeneratedInstance inst = obtain_instance(cfg);
  inst.prob.validate();
  std::string pbname = instance_basename(inst.spec);

  EntropyAlmConfig alm = cfg.alm;
  alm.tol = cfg.tol;
  alm.max_outer = cfg.max_outer;
  alm.verbosity = cfg.verbosity;

  std::vector<EntropyIterRow> history;
  bool converged = false;

  auto t0 = std::chrono::steady_clock::now();
  if (cfg.solver == "palm") {
    PalmConfig pc;
    pc.sigma = cfg.palm_sigma;
    pc.tau = cfg.palm_tau;
    pc.iters = cfg.palm_iters;
    pc.tol = cfg.tol;
    pc.check_every = cfg.palm_check_every;
    pc.verbosity = cfg.verbosity;
    PalmResult res = palm_run(inst.prob, pc);
    outcome.rows.push_back(
        report_row_from_palm(pbname, inst.prob, res, ms_since(t0)));
    converged = res.converged;
  } else {
    EntropyWarmstart ws;
    const EntropyWarmstart* wsp = nullptr;
    if (cfg.solver == "palm+alm") {
      ws = palm_warmstart(inst.prob, cfg.palm_sigma, cfg.palm_tau,
                          cfg.palm_iters);
      wsp = &ws;
    }
    EntropySolveResult res = alm_solve_entropy(inst.prob, alm, wsp);
    outcome.rows.push_back(
        report_row_from_alm(pbname, inst.prob, res, ms_since(t0)));
    history = res.history;
    converged = res.converged;
  }

  if (!cfg.out.empty()) {
    write_text(cfg.out + ".csv", render_csv(outcome.rows));
    write_text(cfg.out + ".txt", render_table(outcome.rows));
    if (!history.empty())
      write_text(cfg.out + "_history.csv", render_history_csv(history));
  }
  outcome.exit_code = converged ? kExitOk : kExitNotConverged;
  outcome.message = converged ? "converged" : "not converged";
  return outcome;
}

int cmd_generate(const InstanceSpec& spec, const std::string& out_path) {
  try {
    GeneratedInstance inst = generate_instance(spec);
    inst.prob.validate();
    save_instance(inst, out_path);
    std::printf("wrote %s (n=%d, m1=%d, m2=%d", out_path.c_str(),
                inst.prob.n(), inst.prob.m1(), inst.prob.m2());
    if (inst.has_reduction) std::printf(", rank=%d", inst.rank);
    std::printf(")\n");
    return kExitOk;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolverError;
  }
}

int cmd_solve(const RunConfig& cfg) {
  try {
    SolveOutcome out = run_solve(cfg);
    for (const auto& row : out.rows) std::fputs(render_table({row}).c_str(), stdout);
    std::printf("%s\n", out.message.c_str());
    return out.exit_code;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolverError;
  }
}

BenchConfig bench_config_from_json(const std::string& text) {
  json j = parse_json(text, "bench config");
  check_keys(j,
             {"instances", "tol", "max_outer", "palm_warmstart_iters",
              "palm_only_iters", "palm", "alm", "out"},
             "bench config");
  BenchConfig cfg;
  if (!j.contains("instances") || !j["instances"].is_array() ||
      j["instances"].empty())
    throw ConfigError("bench config: needs a nonempty instances array");
  for (const auto& inst : j["instances"]) cfg.instances.push_back(spec_from(inst));
  cfg.tol = j.value("tol", cfg.tol);
  cfg.max_outer = j.value("max_outer", cfg.max_outer);
  cfg.palm_warmstart_iters =
      j.value("palm_warmstart_iters", cfg.palm_warmstart_iters);
  cfg.palm_only_iters = j.value("palm_only_iters", cfg.palm_only_iters);
  if (j.contains("palm")) {
    const json& p = j["palm"];
    check_keys(p, {"sigma", "tau", "check_every"}, "palm");
    cfg.palm_sigma = p.value("sigma", cfg.palm_sigma);
    cfg.palm_tau = p.value("tau", cfg.palm_tau);
    cfg.palm_check_every = p.value("check_every", cfg.palm_check_every);
  }
  if (j.contains("alm")) alm_from(j["alm"], cfg.alm);
  cfg.out = j.value("out", "");
  return cfg;
}

std::vector<ReportRow> run_bench(const BenchConfig& cfg) {
  std::vector<ReportRow> rows;
  for (const auto& spec : cfg.instances) {
    GeneratedInstance inst = generate_instance(spec);
    std::string pbname = instance_basename(spec);

    // PALM-only row at the long cap.
    auto t0 = std::chrono::steady_clock::now();
    try {
      PalmConfig pc;
      pc.sigma = cfg.palm_sigma;
      pc.tau = cfg.palm_tau;
      pc.iters = static_cast<int>(cfg.palm_only_iters);
      pc.tol = cfg.tol;
      pc.check_every = cfg.palm_check_every;
      PalmResult pres = palm_run(inst.prob, pc);
      rows.push_back(report_row_from_palm(pbname, inst.prob, pres, ms_since(t0)));
    } catch (const std::exception& e) {
      ReportRow row;
      row.algorithm = "PALM";
      row.pbname = pbname;
      row.n = inst.prob.n();
      row.m1 = inst.prob.m1();
      row.m2 = inst.prob.m2();
      row.mu = inst.prob.mu;
      row.status = std::string("error: ") + e.what();
      rows.push_back(row);
    }

    // PALM-warmstarted ALM row.
    t0 = std::chrono::steady_clock::now();
    try {
      EntropyWarmstart ws = palm_warmstart(inst.prob, cfg.palm_sigma,
                                           cfg.palm_tau, cfg.palm_warmstart_iters);
      EntropyAlmConfig alm = cfg.alm;
      alm.tol = cfg.tol;
      alm.max_outer = cfg.max_outer;
      EntropySolveResult res = alm_solve_entropy(inst.prob, alm, &ws);
      rows.push_back(report_row_from_alm(pbname, inst.prob, res, ms_since(t0)));
    } catch (const std::exception& e) {
      ReportRow row;
      row.algorithm = "ALM";
      row.pbname = pbname;
      row.n = inst.prob.n();
      row.m1 = inst.prob.m1();
      row.m2 = inst.prob.m2();
      row.mu = inst.prob.mu;
      row.status = std::string("error: ") + e.what();
      rows.push_back(row);
    }
  }
  return rows;
}

int cmd_bench(const BenchConfig& cfg) {
  try {
    std::vector<ReportRow> rows = run_bench(cfg);
    std::string table = render_table(rows);
    std::fputs(table.c_str(), stdout);
    if (!cfg.out.empty()) {
      write_text(cfg.out + ".csv", render_csv(rows));
      write_text(cfg.out + ".txt", table);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolverError;
  }
}

namespace {

EntropyProblem small_seeded_instance(int n, int zeros, double mu,
                                     std::uint64_t seed) {
  return gen_p0(n, zeros, mu, seed);
}

}  // namespace

VerifyOutcome run_verify_suites(bool inject_gradient_bug) {
  VerifyOutcome out;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    out.checks.push_back({name, pass, detail});
    if (!pass) out.all_pass = false;
  };

  {
    Rng rng(101);
    bool ok = true;
    double worst = 0.0;
    std::vector<std::shared_ptr<ProxOracle>> fs = {
        std::make_shared<PointIndicator>(Eigen::VectorXd::Zero(5)),
        std::make_shared<QuadraticDistance>(rng.normal_vector(5)),
        std::make_shared<L1Norm>(0.8),
        std::make_shared<BoxIndicator>(Eigen::VectorXd::Constant(5, -1.0),
                                       Eigen::VectorXd::Constant(5, 1.0)),
        std::make_shared<NonnegIndicator>()};
    for (auto& f : fs)
      for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd x = 3.0 * rng.normal_vector(5);
        double sigma = std::exp(rng.uniform(-1.0, 1.0));
        Eigen::VectorXd lhs = moreau_conjugate_prox(*f, x, sigma) +
                              sigma * f->prox(x / sigma, 1.0 / sigma) - x;
        worst = std::max(worst, lhs.norm());
        ok = ok && lhs.norm() <= 1e-12;
      }
    add("moreau-decomposition", ok, "max residual " + format_sci(worst));
  }
  {
    Rng rng(102);
    bool ok = true;
    L1Norm l1(1.2);
    QuadraticDistance quad(rng.normal_vector(6));
    for (int k = 0; k < 200; ++k) {
      Eigen::VectorXd x = 3.0 * rng.normal_vector(6);
      Eigen::VectorXd y = 3.0 * rng.normal_vector(6);
      double sigma = std::exp(rng.uniform(-1.0, 1.0));
      ok = ok && (l1.prox(x, sigma) - l1.prox(y, sigma)).norm() <=
                     (x - y).norm() + 1e-12;
      ok = ok && (quad.prox(x, sigma) - quad.prox(y, sigma)).norm() <=
                     (x - y).norm() + 1e-12;
    }
    add("prox-nonexpansive", ok, "200 seeded pairs");
  }
  {
    Rng rng(103);
    L1Norm l1(0.7);
    bool ok = true;
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd x = 2.0 * rng.normal_vector(4);
      double sigma = 1.3;
      Eigen::VectorXd grad = (x - l1.prox(x, sigma)) / sigma;
      for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
        e[i] = 1e-6;
        double fd =
            (l1.envelope(x + e, sigma) - l1.envelope(x - e, sigma)) / 2e-6;
        double err = std::abs(fd - grad[i]) / std::max(1.0, std::abs(grad[i]));
        worst = std::max(worst, err);
        ok = ok && err <= 1e-6;
      }
    }
    add("envelope-gradient-fd", ok, "max rel err " + format_sci(worst));
  }
  {
    Rng rng(104);
    bool ok = true;
    double worst = 0.0;
    for (int n : {3, 16, 48, 64}) {
      SymMatrix w(rng.normal_matrix(n, n));
      auto d = sym_eigen(w);
      double err = (d.reconstruct() - w).norm() / std::max(1.0, w.norm());
      worst = std::max(worst, err);
      ok = ok && err <= 1e-10;
    }
    add("eigen-reconstruction", ok, "max scaled err " + format_sci(worst));
  }
  {
    Rng rng(105);
    bool ok = true;
    for (int k = 0; k < 5; ++k) {
      SymMatrix w(rng.normal_matrix(6, 6));
      SymMatrix p = psd_project(w);
      ok = ok && (psd_project(p) - p).norm() <= 1e-12 * std::max(1.0, p.norm());
      SymMatrix q = psd_project(-w);
      ok = ok && (p - q - w).norm() <= 1e-10 * std::max(1.0, w.norm());
      ok = ok && std::abs(inner(p, q)) <= 1e-10 * std::max(1.0, w.norm());
    }
    add("psd-projection-idempotent-orthogonal", ok, "5 seeded matrices");
  }
  {
    Rng rng(106);
    Eigen::MatrixXd g = rng.normal_matrix(6, 6);
    SymMatrix x = SymMatrix::raw(g * g.transpose() / 6.0 +
                                 0.5 * Eigen::MatrixXd::Identity(6, 6));
    SymMatrix h(rng.normal_matrix(6, 6));
    auto d = sym_eigen(x);
    SymMatrix lh = loewner_apply(
        d, [](double t) { return std::log(t); },
        [](double t) { return 1.0 / t; }, h);
    double t = 1e-6;
    SymMatrix fd = (1.0 / (2.0 * t)) *
                   (spectral_apply(sym_eigen(x + t * h),
                                   [](double s) { return std::log(s); }) -
                    spectral_apply(sym_eigen(x - t * h),
                                   [](double s) { return std::log(s); }));
    double err = (lh - fd).norm() / std::max(1.0, fd.norm());
    add("loewner-fd-consistency", err <= 1e-5, "rel err " + format_sci(err));
  }
  {
    EntropyProblem prob = small_seeded_instance(4, 2, 0.7, 201);
    Rng rng(107);
    Eigen::MatrixXd g = rng.normal_matrix(4, 4);
    SymMatrix x = SymMatrix::raw(g * g.transpose() / 4.0 +
                                 0.4 * Eigen::MatrixXd::Identity(4, 4));
    Eigen::VectorXd y = rng.normal_vector(prob.m1());
    SymMatrix s = psd_project(SymMatrix(rng.normal_matrix(4, 4)));
    double sigma = 2.0;
    SymMatrix grad =
        aug_lagrangian_grad(x, y, Eigen::VectorXd(0), s, sigma, prob);
    if (inject_gradient_bug)
      grad = grad + SymMatrix::ScaledIdentity(4, 1e-3);
    SymMatrix fd = verify::fd_gradient(
        [&](const SymMatrix& w) {
          return aug_lagrangian(w, y, Eigen::VectorXd(0), s, sigma, prob);
        },
        x, 1e-6);
    double err = (grad - fd).norm() / std::max(1.0, fd.norm());
    add("auglag-gradient-fd", err <= 1e-6, "rel err " + format_sci(err));
  }
  {
    EntropyProblem prob = small_seeded_instance(5, 3, 0.5, 202);
    Rng rng(108);
    Eigen::MatrixXd g = rng.normal_matrix(5, 5);
    SymMatrix x = SymMatrix::raw(g * g.transpose() / 5.0 +
                                 0.4 * Eigen::MatrixXd::Identity(5, 5));
    Eigen::VectorXd y = rng.normal_vector(prob.m1());
    SymMatrix s = psd_project(SymMatrix(rng.normal_matrix(5, 5)));
    bool ok = true;
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      SymMatrix h1(rng.normal_matrix(5, 5));
      SymMatrix h2(rng.normal_matrix(5, 5));
      SymMatrix hh1 = hessian_apply(x, y, Eigen::VectorXd(0), s, 2.0, prob, h1);
      SymMatrix hh2 = hessian_apply(x, y, Eigen::VectorXd(0), s, 2.0, prob, h2);
      double err = std::abs(inner(h1, hh2) - inner(hh1, h2));
      worst = std::max(worst, err);
      ok = ok && err <= 1e-10 * std::max(1.0, std::abs(inner(h1, hh2)));
    }
    add("hessian-self-adjoint", ok, "max asymmetry " + format_sci(worst));
  }
  {
    EntropyProblem prob = small_seeded_instance(5, 2, 0.9, 203);
    Rng rng(109);
    bool ok = true;
    for (int k = 0; k < 50; ++k) {
      // feasible primal: positive diagonal with unit trace (off-diagonal
      // equalities hold automatically)
      Eigen::VectorXd diag(5);
      for (int i = 0; i < 5; ++i) diag[i] = 0.05 + rng.uniform(0.0, 1.0);
      diag /= diag.sum();
      SymMatrix x = SymMatrix::raw(Eigen::MatrixXd(diag.asDiagonal()));
      Eigen::VectorXd y = rng.normal_vector(prob.m1());
      SymMatrix s = psd_project(SymMatrix(0.3 * rng.normal_matrix(5, 5)));
      double p = primal_objective(x, prob);
      double d = dual_objective(prob, y, Eigen::VectorXd(0), s);
      ok = ok && d <= p + 1e-9;
    }
    add("weak-duality", ok, "50 seeded feasible pairs");
  }
  {
    Rng rng(110);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      double m = rng.uniform(-15.0, 15.0);
      double c = std::exp(rng.uniform(-2.0, 2.0));
      double x = entropy_scalar_prox(m, c, 0.0);
      double xb = verify::scalar_prox_bisection(m, c, 0.0);
      worst = std::max(worst, std::abs(x - xb));
    }
    add("scalar-prox-cross-check", worst <= 1e-12,
        "max |newton - bisection| " + format_sci(worst));
  }
  return out;
}

int cmd_verify(bool inject_gradient_bug) {
  VerifyOutcome out = run_verify_suites(inject_gradient_bug);
  int passed = 0;
  for (const auto& c : out.checks) {
    std::printf("[%s] %s — %s\n", c.pass ? "ok" : "FAIL", c.name.c_str(),
                c.detail.c_str());
    if (c.pass) ++passed;
  }
  std::printf("%d/%zu checks passed\n", passed, out.checks.size());
  return out.all_pass ? kExitOk : kExitNotConverged;
}

}  // namespace entropal
