#pragma once

#include <vector>

#include "scenred/model.hpp"

namespace scenred {

struct RobustOptions {
  double time_limit = 60.0;  // seconds
  long max_nodes = 0;        // 0: unlimited (MILP-based searches)
};

struct RobustSolution {
  std::vector<int> x;  // first-stage 0/1 vector
  double value = 0.0;  // worst case over the scenario set it was solved on
  std::vector<double> per_scenario;
  bool exact = true;   // false when a limit stopped the search
};

struct Recourse {
  std::vector<int> y;
  double value = 0.0;
};

/// max_i (c^i)^T x; x must be feasible for the one-stage instance.
double evaluate_one_stage(const RobustInstance& inst, const std::vector<int>& x,
                          const UncertaintySet& u);

/// Exact min-max solution via the MILP kernel with an epigraph variable.
RobustSolution solve_one_stage(const RobustInstance& inst, const UncertaintySet& u,
                               const RobustOptions& options = {});

/// The p - |x| cheapest items outside x (lowest index on ties).
Recourse second_stage_selection(const std::vector<int>& x, const Scenario& c, int p);

/// Cheapest completion of x to a dominating set under c.
Recourse second_stage_vertex_cover(const RobustInstance& inst, const std::vector<int>& x,
                                   const Scenario& c);

/// C^T x + max_i recourse_i(x).
double evaluate_two_stage(const RobustInstance& inst, const std::vector<int>& x,
                          const UncertaintySet& u);

/// Exact two-stage solution by branch-and-bound over first-stage decisions.
RobustSolution solve_two_stage(const RobustInstance& inst, const UncertaintySet& u,
                               const RobustOptions& options = {});

/// Dispatch on inst.stages.
RobustSolution solve_robust(const RobustInstance& inst, const UncertaintySet& u,
                            const RobustOptions& options = {});
double evaluate_robust(const RobustInstance& inst, const std::vector<int>& x,
                       const UncertaintySet& u);

std::string save_robust_solution(const RobustSolution& s);

}  // namespace scenred
