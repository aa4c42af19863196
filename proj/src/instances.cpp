#include "entropal/instances.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "entropal/errors.hpp"
#include "entropal/rng.hpp"
#include "entropal/spectral.hpp"

namespace entropal {

using nlohmann::json;

EntropyProblem gen_p0(int n, int num_zero_entries, double mu,
                      std::uint64_t seed, double eps) {
  if (num_zero_entries > n * (n - 1) / 2)
    throw ConfigError("gen_p0: more zero entries than off-diagonal pairs");
  Rng rng(seed);

  // Normalized Gram matrix: random correlation-like PSD with unit diagonal.
  Eigen::MatrixXd g = rng.normal_matrix(n, n);
  Eigen::MatrixXd w = g * g.transpose();
  Eigen::VectorXd dinv = w.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd c0 = dinv.asDiagonal() * w * dinv.asDiagonal();

  // Symmetric uniform perturbation with unit diagonal, then mix and clip.
  Eigen::MatrixXd e(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e(i, j) = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) e(i, j) = e(j, i);
  e.diagonal().setOnes();
  const double alpha = 0.1;
  Eigen::MatrixXd c = (1.0 - alpha) * c0 + alpha * e;
  c = 0.5 * (c + c.transpose()).eval();
  c = c.cwiseMin(1.0).cwiseMax(-1.0);

  EntropyProblem prob;
  prob.C = SymMatrix(c);
  prob.mu = mu;
  prob.eps_shift = eps;
  prob.A = ConstraintMap(n);
  prob.A.add_trace();
  // Sample the forced-zero index set without replacement.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
  rng.shuffle(pairs);
  for (int k = 0; k < num_zero_entries; ++k)
    prob.A.add_entry(pairs[k].first, pairs[k].second);
  prob.b = Eigen::VectorXd::Zero(prob.A.rows());
  prob.b[0] = 1.0;
  prob.B = ConstraintMap(n);
  prob.d = Eigen::VectorXd(0);
  return prob;
}

BregmanInstance gen_bregman_nearness(
    const SymMatrix& X0, const std::vector<std::pair<int, int>>& extra_zero_entries,
    double rank_tol) {
  const int n = X0.dim();
  EigenDecomposition d0 = sym_eigen(X0);
  SymMatrix x0 = (d0.lambda_min() < 0.0) ? psd_project(d0) : X0;
  if (d0.lambda_min() < 0.0) d0 = sym_eigen(x0);

  int r = 0;
  for (int i = 0; i < n; ++i)
    if (d0.lambda[i] > rank_tol) ++r;
  if (r == 0) throw ConfigError("gen_bregman_nearness: X0 has rank zero");

  BregmanInstance inst;
  inst.n_full = n;
  inst.rank = r;
  inst.X0 = x0;
  inst.U = d0.Q.rightCols(r);  // eigenvalues ascending; range space is the tail

  // Reduced objective: tr(Y log Y) + <-log(L_r) - I, Y> up to a constant.
  Eigen::VectorXd lam_r = d0.lambda.tail(r);
  Eigen::MatrixXd cr = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < r; ++i) cr(i, i) = -std::log(lam_r[i]) - 1.0;

  inst.reduced.C = SymMatrix::raw(std::move(cr));
  inst.reduced.mu = 1.0;
  inst.reduced.eps_shift = 0.0;
  inst.reduced.A = ConstraintMap(r);
  // Unit diagonal of the lifted matrix: (U Y U^T)_ii = <g_i g_i^T, Y>.
  int m = n + static_cast<int>(extra_zero_entries.size());
  inst.reduced.b = Eigen::VectorXd(m);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd gi = inst.U.row(i).transpose();
    inst.reduced.A.add_dense(SymMatrix::raw(gi * gi.transpose()));
    inst.reduced.b[i] = 1.0;
  }
  int at = n;
  for (auto [i, j] : extra_zero_entries) {
    if (i == j || i < 0 || j < 0 || i >= n || j >= n)
      throw ConfigError("gen_bregman_nearness: bad extra entry constraint");
    Eigen::VectorXd gi = inst.U.row(i).transpose();
    Eigen::VectorXd gj = inst.U.row(j).transpose();
    Eigen::MatrixXd gij =
        0.5 * (gi * gj.transpose() + gj * gi.transpose());
    inst.reduced.A.add_dense(SymMatrix(gij));
    inst.reduced.b[at++] = 0.0;
  }
  inst.reduced.B = ConstraintMap(r);
  inst.reduced.d = Eigen::VectorXd(0);
  return inst;
}

EntropyProblem gen_kernel_learning(const std::vector<std::pair<int, int>>& edges,
                                   int n, double gamma) {
  EntropyProblem prob;
  prob.C = SymMatrix::Zero(n);
  prob.mu = 1.0;
  prob.eps_shift = 0.0;
  prob.A = ConstraintMap(n);
  prob.A.add_trace();
  prob.b = Eigen::VectorXd::Ones(1);
  prob.B = ConstraintMap(n);
  std::set<std::pair<int, int>> seen;
  for (auto [s, t] : edges) {
    if (s > t) std::swap(s, t);
    if (s == t) throw ConfigError("gen_kernel_learning: self-loop edge");
    if (s < 0 || t >= n) throw ConfigError("gen_kernel_learning: edge out of range");
    if (!seen.insert({s, t}).second)
      throw ConfigError("gen_kernel_learning: duplicate edge");
    // tr(K V_j) <= gamma stored as -tr(K V_j) >= -gamma.
    prob.B.add_edge(s, t, -1.0);
  }
  prob.d = Eigen::VectorXd::Constant(prob.B.rows(), -gamma);
  return prob;
}

SymMatrix gen_lowrank_correlation(int n, int rank, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd g = rng.normal_matrix(n, rank);
  Eigen::MatrixXd w = g * g.transpose();
  Eigen::VectorXd dinv = w.diagonal().cwiseSqrt().cwiseInverse();
  return SymMatrix(dinv.asDiagonal() * w * dinv.asDiagonal());
}

GeneratedInstance generate_instance(const InstanceSpec& spec) {
  GeneratedInstance out;
  out.spec = spec;
  if (spec.family == "p0") {
    out.prob = gen_p0(spec.n, spec.num_zero_entries, spec.mu, spec.seed, spec.eps);
  } else if (spec.family == "br") {
    SymMatrix x0 = spec.path.empty()
                       ? gen_lowrank_correlation(spec.n, spec.rank, spec.seed)
                       : load_dense_matrix_file(spec.path);
    BregmanInstance br = gen_bregman_nearness(x0, {}, spec.rank_tol);
    out.prob = br.reduced;
    out.has_reduction = true;
    out.U = br.U;
    out.rank = br.rank;
    out.n_full = br.n_full;
  } else if (spec.family == "kl") {
    std::vector<std::pair<int, int>> edges = spec.edges;
    if (!spec.path.empty()) edges = load_edge_list(spec.path);
    if (spec.random_edges > 0) {
      Rng rng(spec.seed);
      std::vector<std::pair<int, int>> pairs;
      for (int i = 0; i < spec.n; ++i)
        for (int j = i + 1; j < spec.n; ++j) pairs.push_back({i, j});
      rng.shuffle(pairs);
      edges.assign(pairs.begin(), pairs.begin() + spec.random_edges);
    }
    out.prob = gen_kernel_learning(edges, spec.n, spec.gamma);
    out.spec.edges = edges;
  } else {
    throw ConfigError("generate_instance: unknown family '" + spec.family + "'");
  }
  return out;
}

namespace {

json atom_to_json(const ConstraintRow& row) {
  json j;
  j["coeff"] = row.coeff;
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, TraceAtom>) {
          j["kind"] = "trace";
        } else if constexpr (std::is_same_v<T, EntryAtom>) {
          j["kind"] = "entry";
          j["i"] = a.i;
          j["j"] = a.j;
        } else if constexpr (std::is_same_v<T, DiagAtom>) {
          j["kind"] = "diag";
        } else if constexpr (std::is_same_v<T, EdgeQuadAtom>) {
          j["kind"] = "edge";
          j["s"] = a.s;
          j["t"] = a.t;
        } else {
          j["kind"] = "dense";
          std::vector<double> g;
          for (int r = 0; r < a.G.dim(); ++r)
            for (int c = 0; c < a.G.dim(); ++c) g.push_back(a.G(r, c));
          j["g"] = g;
        }
      },
      row.atom);
  return j;
}

void atom_from_json(const json& j, ConstraintMap& map, int n) {
  double coeff = j.value("coeff", 1.0);
  std::string kind = j.at("kind");
  if (kind == "trace") {
    map.add_trace(coeff);
  } else if (kind == "entry") {
    map.add_entry(j.at("i"), j.at("j"), coeff);
  } else if (kind == "diag") {
    map.add_diag(coeff);
  } else if (kind == "edge") {
    map.add_edge(j.at("s"), j.at("t"), coeff);
  } else if (kind == "dense") {
    std::vector<double> g = j.at("g");
    if (static_cast<int>(g.size()) != n * n)
      throw ConfigError("instance file: dense atom size mismatch");
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = g[r * n + c];
    map.add_dense(SymMatrix(m), coeff);
  } else {
    throw ConfigError("instance file: unknown atom kind '" + kind + "'");
  }
}

json map_to_json(const ConstraintMap& map) {
  json rows = json::array();
  for (const auto& row : map.atoms()) rows.push_back(atom_to_json(row));
  return rows;
}

std::vector<double> vec_to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd std_to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

}  // namespace

std::string instance_to_json(const GeneratedInstance& inst) {
  const EntropyProblem& p = inst.prob;
  json j;
  j["format"] = "entropal-instance";
  j["version"] = 1;
  j["n"] = p.n();
  j["mu"] = p.mu;
  j["eps"] = p.eps_shift;
  std::vector<double> c;
  c.reserve(p.n() * p.n());
  for (int r = 0; r < p.n(); ++r)
    for (int col = 0; col < p.n(); ++col) c.push_back(p.C(r, col));
  j["C"] = c;
  j["A"] = map_to_json(p.A);
  j["b"] = vec_to_std(p.b);
  j["B"] = map_to_json(p.B);
  j["d"] = vec_to_std(p.d);
  json meta;
  meta["family"] = inst.spec.family;
  meta["seed"] = inst.spec.seed;
  meta["gamma"] = inst.spec.gamma;
  meta["num_zero_entries"] = inst.spec.num_zero_entries;
  if (inst.has_reduction) {
    meta["rank"] = inst.rank;
    meta["n_full"] = inst.n_full;
    std::vector<double> u;
    for (int r = 0; r < inst.U.rows(); ++r)
      for (int col = 0; col < inst.U.cols(); ++col) u.push_back(inst.U(r, col));
    meta["U"] = u;
  }
  j["meta"] = meta;
  return j.dump(2);
}

GeneratedInstance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("instance file: invalid JSON: ") + e.what());
  }
  if (j.value("format", "") != "entropal-instance")
    throw ConfigError("instance file: missing format tag");
  GeneratedInstance inst;
  int n = j.at("n");
  EntropyProblem& p = inst.prob;
  std::vector<double> c = j.at("C");
  if (static_cast<int>(c.size()) != n * n)
    throw ConfigError("instance file: C size mismatch");
  Eigen::MatrixXd cm(n, n);
  for (int r = 0; r < n; ++r)
    for (int col = 0; col < n; ++col) cm(r, col) = c[r * n + col];
  p.C = SymMatrix(cm);
  p.mu = j.at("mu");
  p.eps_shift = j.at("eps");
  p.A = ConstraintMap(n);
  for (const auto& row : j.at("A")) atom_from_json(row, p.A, n);
  p.b = std_to_vec(j.at("b"));
  p.B = ConstraintMap(n);
  for (const auto& row : j.at("B")) atom_from_json(row, p.B, n);
  p.d = std_to_vec(j.at("d"));
  if (j.contains("meta")) {
    const json& meta = j["meta"];
    inst.spec.family = meta.value("family", "custom");
    inst.spec.seed = meta.value("seed", std::uint64_t{0});
    inst.spec.gamma = meta.value("gamma", 0.0);
    inst.spec.num_zero_entries = meta.value("num_zero_entries", 0);
    inst.spec.n = n;
    inst.spec.mu = p.mu;
    inst.spec.eps = p.eps_shift;
    if (meta.contains("rank")) {
      inst.has_reduction = true;
      inst.rank = meta["rank"];
      inst.n_full = meta["n_full"];
      std::vector<double> u = meta.at("U");
      inst.U.resize(inst.n_full, inst.rank);
      for (int r = 0; r < inst.n_full; ++r)
        for (int col = 0; col < inst.rank; ++col)
          inst.U(r, col) = u[r * inst.rank + col];
    }
  }
  p.validate();
  return inst;
}

void save_instance(const GeneratedInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_instance: cannot open " + path);
  out << instance_to_json(inst) << "\n";
}

GeneratedInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_instance: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return instance_from_json(ss.str());
}

SymMatrix load_dense_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_dense_matrix_file: cannot open " + path);
  int n = 0;
  if (!(in >> n) || n <= 0)
    throw ConfigError("load_dense_matrix_file: bad dimension header");
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(in >> m(i, j)))
        throw ConfigError("load_dense_matrix_file: truncated matrix data");
  return SymMatrix(m);
}

std::vector<std::pair<int, int>> load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_edge_list: cannot open " + path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    int s, t;
    if (ls >> s >> t) edges.push_back({s - 1, t - 1});  // 1-based on disk
  }
  return edges;
}

}  // namespace entropal
