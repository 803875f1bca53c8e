#pragma once

#include <optional>
#include <span>
#include <vector>

#include "scenred/guarantee.hpp"
#include "scenred/model.hpp"

namespace scenred {

struct TwoStageOptions {
  double time_limit = 60.0;
  // Solve the subset-selection MILP with the kernel instead of the
  // threshold search; kept for cross-validation.
  bool use_milp = false;
  long max_nodes = 0;
};

/// min_i max_{l in subset} d[i][l], +inf when every row is infinite.
double two_stage_value(const DMatrix& d, std::span<const int> subset);

/// A set of at most k columns such that every finite row i has a selected
/// column l with d[i][l] >= tau; nothing if no such set exists.
std::optional<std::vector<int>> threshold_cover(const DMatrix& d, double tau, int k);

/// Exact optimum over K-subsets of U.
ReductionResult ip_two_stage(const UncertaintySet& u, int k, const TwoStageOptions& options = {});

/// Adds the column with the best resulting value K times.
ReductionResult greedy_two_stage(const UncertaintySet& u, int k);

/// Enumerates all K-subsets; C(N, K) <= 1e6.
double brute_two_stage(const UncertaintySet& u, int k);

/// Stage-2 result for a given subset: unit lambda rows, each scenario assigned
/// to its best selected column (lowest index on ties).
ReductionResult two_stage_result(const UncertaintySet& u, const DMatrix& d,
                                 std::vector<int> subset, Method method);

}  // namespace scenred
