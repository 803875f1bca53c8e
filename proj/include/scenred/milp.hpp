#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "scenred/linprog.hpp"

namespace scenred::milp {

inline constexpr double kIntegerTolerance = 1e-6;
inline constexpr double kGapTolerance = 1e-6;

struct MilpProblem {
  lp::LpProblem lp;
  std::vector<std::size_t> binaries;

  /// Besides the LP checks: binary indices in range, bounds within [0, 1].
  void validate() const;
};

enum class MilpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kLimit,              // stopped on a time/node limit, incumbent available
  kLimitNoIncumbent,   // stopped on a limit without any feasible point
};

const char* to_string(MilpStatus status);

// Maps a node's LP solution to a feasible point of the full problem, or
// nothing. Used as a primal heuristic.
using Heuristic =
    std::function<std::optional<std::vector<double>>(const std::vector<double>&)>;

struct MilpOptions {
  double time_limit = 60.0;  // seconds
  long max_nodes = 0;        // 0: unlimited
  std::optional<std::vector<double>> initial_solution;
  Heuristic heuristic;
  int heuristic_frequency = 10;  // every k-th node, plus the root
  bool record_trace = false;
};

struct NodeRecord {
  long id;
  long parent;  // -1 at the root
  double bound;
};

struct MilpSolution {
  MilpStatus status = MilpStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  double bound = 0.0;  // best remaining relaxation bound
  double gap = 0.0;    // relative
  long nodes = 0;
  std::vector<NodeRecord> trace;

  bool has_incumbent() const {
    return status == MilpStatus::kOptimal || status == MilpStatus::kLimit;
  }
};

/// Best-first branch-and-bound over binaries. Branches on the most fractional
/// variable (lowest index on ties); fully deterministic unless the time limit
/// triggers.
MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options = {});

}  // namespace scenred::milp
