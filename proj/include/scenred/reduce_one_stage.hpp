#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scenred/model.hpp"

namespace scenred {

struct MuStep {
  Matrix mu;                // N x K
  std::vector<double> t_i;  // per-scenario scalings, +inf for zero scenarios
  double t = 0.0;           // min_i t_i (at most 1 unless U is all-zero)
};

/// For every scenario independently: max t_i s.t. t_i c^i <= sum_k mu_ik chat^k,
/// mu_i in the simplex.
MuStep mu_step(const UncertaintySet& u, std::span<const Scenario> reduced);

/// Rows (scenario, item) and columns (cluster, scenario) of a lambda-step's
/// restricted model that ended up binding; seeds the next call.
struct LambdaBasis {
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  std::vector<std::pair<std::size_t, std::size_t>> cols;
};

struct LambdaStep {
  Matrix lambda;  // K x N
  std::vector<Scenario> reduced;
  double t = 0.0;
  LambdaBasis active;
};

/// max t over (t, lambda) with mu fixed: t c^i <= sum_k mu_ik sum_l lambda_kl c^l.
/// Clusters without mu-mass get the scenario farthest from the live centers.
LambdaStep lambda_step(const UncertaintySet& u, const Matrix& mu,
                       const LambdaBasis* warm = nullptr);

struct ContOptions {
  int reps = 10;
  int max_iters = 20;
  std::uint64_t seed = 0;
  // Extra repetition started from these scenario indices (if given).
  std::optional<std::vector<int>> initial_subset;
};

struct ContRun {
  ReductionResult result;
  std::vector<double> history;  // worst-case t after every mu/lambda step
};

/// One alternating run from the given starting scenarios.
ContRun cont_run(const UncertaintySet& u, std::vector<Scenario> start, int max_iters);

/// Alternating-LP heuristic; repetition 0 starts from a balanced partition's
/// averages, the others from random K-subsets.
ReductionResult cont(const UncertaintySet& u, int k, const ContOptions& options);

struct MilpReduceOptions {
  double time_limit = 60.0;
  long max_nodes = 0;  // 0: unlimited
  // IP-lambda uses the MILP up to this N, a greedy/swap heuristic beyond.
  int exact_max_scenarios = 25;
};

/// Binary assignment mu, continuous lambda, big-M linearisation.
ReductionResult ip_mu(const UncertaintySet& u, int k, const MilpReduceOptions& options = {});

/// Binary subset selection lambda, continuous mu.
ReductionResult ip_lambda(const UncertaintySet& u, int k,
                          const MilpReduceOptions& options = {});

/// t of a fixed subset: min_i max{t : t c^i <= conv(subset)}.
double subset_t(const UncertaintySet& u, std::span<const int> subset);

/// Exhaustive optimum of the subset-selection model; C(N, K) <= 1e5.
double brute_subset_oracle(const UncertaintySet& u, int k);

/// Balanced partition: scenario i goes to cluster i mod K.
std::vector<std::vector<int>> balanced_partition(int n_scenarios, int k);

struct ClusterFit {
  std::vector<double> lambda;  // weights over U
  double t = 0.0;
};

/// Best representative of one cluster inside conv(U):
/// max t s.t. t c^i <= sum_l lambda_l c^l for i in members.
ClusterFit fit_cluster(const UncertaintySet& u, std::span<const int> members);

struct KMeansFit {
  std::vector<int> assignment;
  double distortion = 0.0;
};

/// Lloyd iterations from K sampled scenarios; best of `reps` by distortion.
KMeansFit kmeans_clusters(const UncertaintySet& u, int k, int reps, std::uint64_t seed);

/// K-means as a reduction: centroids, uniform lambda per cluster, hard mu and
/// a post hoc guarantee (alpha with beta = 1).
ReductionResult kmeans(const UncertaintySet& u, int k, int reps, std::uint64_t seed);

Scenario midpoint(const UncertaintySet& u);
ReductionResult midpoint_reduction(const UncertaintySet& u);

/// Attach t and the guarantee of an arbitrary reduced set inside conv(U).
void certify_one_stage(const UncertaintySet& u, ReductionResult& r);

}  // namespace scenred
