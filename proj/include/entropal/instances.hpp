#ifndef ENTROPAL_INSTANCES_HPP
#define ENTROPAL_INSTANCES_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "entropal/entropy_problem.hpp"

namespace entropal {

// Random correlation-like objective with a trace-one constraint and a seeded
// set of forced-zero off-diagonal entries:
//   min <C,X> + mu tr(X log X)  s.t.  tr X = 1, X_ij = 0 on E, X >= eps I.
// C is built from a normalized Gram matrix mixed with a symmetric uniform
// perturbation (0.9/0.1), then clipped to [-1, 1].
EntropyProblem gen_p0(int n, int num_zero_entries, double mu,
                      std::uint64_t seed, double eps = 0.0);

struct BregmanInstance {
  EntropyProblem reduced;   // problem in S^r over the range space of X0
  Eigen::MatrixXd U;        // n x r, orthonormal columns
  int rank = 0;
  int n_full = 0;
  SymMatrix X0;

  SymMatrix lift(const SymMatrix& Y) const {
    return SymMatrix::raw(U * Y.mat() * U.transpose());
  }
};

// Entropy-divergence nearness to X0 under unit-diagonal (and optional
// zero-entry) constraints, reduced to the range space of X0 so the solution
// rank never exceeds rank(X0). X0 is projected onto the PSD cone first when
// needed. Throws ConfigError if X0 has rank zero at the given tolerance.
BregmanInstance gen_bregman_nearness(
    const SymMatrix& X0,
    const std::vector<std::pair<int, int>>& extra_zero_entries = {},
    double rank_tol = 1e-8);

// Maximum-entropy kernel subject to distance bounds on graph edges:
//   min tr(K log K)  s.t.  tr K = 1, K_ss + K_tt - 2 K_st <= gamma per edge.
// Inequalities are stored in the B(X) >= d orientation with coefficient -1.
// Duplicate edges and self-loops are rejected.
EntropyProblem gen_kernel_learning(const std::vector<std::pair<int, int>>& edges,
                                   int n, double gamma);

// Deterministic rank-deficient correlation-style fixture (unit diagonal).
SymMatrix gen_lowrank_correlation(int n, int rank, std::uint64_t seed);

// Replayable generator spec; the same spec always produces a byte-identical
// serialized instance.
struct InstanceSpec {
  std::string family;  // "p0" | "br" | "kl"
  int n = 0;
  std::uint64_t seed = 0;
  double mu = 1.0;
  double eps = 0.0;
  int num_zero_entries = 0;                     // p0
  int rank = 0;                                 // br (synthetic fixture)
  double rank_tol = 1e-8;                       // br
  std::vector<std::pair<int, int>> edges;       // kl
  int random_edges = 0;                         // kl: sample this many
  double gamma = 0.0;                           // kl
  std::string path;                             // br/kl: optional data file
};

struct GeneratedInstance {
  EntropyProblem prob;
  InstanceSpec spec;
  // Present for the br family (needed to lift solutions).
  bool has_reduction = false;
  Eigen::MatrixXd U;
  int rank = 0;
  int n_full = 0;
};

GeneratedInstance generate_instance(const InstanceSpec& spec);

// Instance file I/O (self-describing JSON; see README for the schema).
std::string instance_to_json(const GeneratedInstance& inst);
GeneratedInstance instance_from_json(const std::string& text);
void save_instance(const GeneratedInstance& inst, const std::string& path);
GeneratedInstance load_instance(const std::string& path);

// Plain-text loaders for external data: a whitespace matrix file ("n" then
// n*n values) and a 1-based edge list ("s t" per line, '#' comments).
SymMatrix load_dense_matrix_file(const std::string& path);
std::vector<std::pair<int, int>> load_edge_list(const std::string& path);

}  // namespace entropal

#endif
