#include "scenred/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <string>

#include "scenred/error.hpp"

namespace scenred::milp {

void MilpProblem::validate() const {
  lp.validate();
  for (std::size_t b : binaries) {
    if (b >= lp.num_vars()) {
      throw Error(ErrorCode::kValidation, "binary index " + std::to_string(b) + " out of range");
    }
    const double lo = lp.lower.empty() ? 0.0 : lp.lower[b];
    const double hi = lp.upper.empty() ? lp::kNoBound : lp.upper[b];
    if (lo < 0.0 || hi > 1.0) {
      throw Error(ErrorCode::kValidation,
                  "binary variable " + std::to_string(b) + " must have bounds within [0, 1]");
    }
  }
}

const char* to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::kOptimal: return "optimal";
    case MilpStatus::kInfeasible: return "infeasible";
    case MilpStatus::kUnbounded: return "unbounded";
    case MilpStatus::kLimit: return "limit";
    case MilpStatus::kLimitNoIncumbent: return "limit-no-incumbent";
  }
  return "unknown";
}

namespace {

struct Node {
  long id;
  long parent;
  double bound;  // in maximization terms
  std::vector<double> lower;
  std::vector<double> upper;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

}  // namespace

MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options) {
  problem.validate();
  if (!(options.time_limit > 0.0)) {
    throw Error(ErrorCode::kValidation, "time limit must be positive");
  }
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const lp::LpProblem& base = problem.lp;
  const std::size_t nv = base.num_vars();
  // Internally everything is a maximization.
  const double sign = base.sense == lp::Sense::kMaximize ? 1.0 : -1.0;
  auto max_value = [&](const std::vector<double>& x) {
    double v = 0.0;
    for (std::size_t j = 0; j < nv; ++j) v += base.objective[j] * x[j];
    return sign * v;
  };

  std::vector<char> is_binary(nv, 0);
  for (std::size_t b : problem.binaries) is_binary[b] = 1;

  MilpSolution out;
  bool have_incumbent = false;
  double incumbent = -lp::kNoBound;

  auto feasible_point = [&](const std::vector<double>& x) {
    if (x.size() != nv) return false;
    for (std::size_t b : problem.binaries) {
      if (std::abs(x[b] - std::round(x[b])) > kIntegerTolerance) return false;
    }
    return lp::max_violation(base, x) <= 1e-6;
  };
  auto offer = [&](std::vector<double> x) {
    if (!feasible_point(x)) return;
    for (std::size_t b : problem.binaries) x[b] = std::round(x[b]);
    const double v = max_value(x);
    if (!have_incumbent || v > incumbent + 1e-12) {
      have_incumbent = true;
      incumbent = v;
      out.x = std::move(x);
    }
  };
  if (options.initial_solution) offer(*options.initial_solution);

  auto prune_level = [&] {
    return incumbent + kGapTolerance * std::max(1.0, std::abs(incumbent));
  };

  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  Node root{0, -1, lp::kNoBound,
            base.lower.empty() ? std::vector<double>(nv, 0.0) : base.lower,
            base.upper.empty() ? std::vector<double>(nv, lp::kNoBound) : base.upper};
  open.push(std::move(root));
  long next_id = 1;
  bool limit_hit = false;
  bool unbounded = false;
  lp::LpProblem node_lp = base;

  while (!open.empty()) {
    if ((options.max_nodes > 0 && out.nodes >= options.max_nodes) ||
        elapsed() > options.time_limit) {
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (have_incumbent && node.bound <= prune_level()) continue;
    ++out.nodes;

    node_lp.lower = node.lower;
    node_lp.upper = node.upper;
    const lp::LpSolution rel = lp::solve_lp(node_lp);
    if (rel.status == lp::LpStatus::kInfeasible) continue;
    if (rel.status == lp::LpStatus::kUnbounded) {
      unbounded = true;
      break;
    }
    // A child can never be better than its parent.
    const double bound = std::min(node.bound, sign * rel.objective);
    if (options.record_trace) out.trace.push_back({node.id, node.parent, sign * bound});
    if (have_incumbent && bound <= prune_level()) continue;

    int branch = -1;
    double most = kIntegerTolerance;
    for (std::size_t b : problem.binaries) {
      const double frac = std::abs(rel.x[b] - std::round(rel.x[b]));
      if (frac > most + 1e-12) {
        most = frac;
        branch = static_cast<int>(b);
      }
    }
    if (branch < 0) {
      offer(rel.x);
      continue;
    }
    if (options.heuristic &&
        (node.id == 0 || (options.heuristic_frequency > 0 &&
                          out.nodes % options.heuristic_frequency == 0))) {
      if (auto x = options.heuristic(rel.x)) offer(std::move(*x));
      if (have_incumbent && bound <= prune_level()) continue;
    }
    for (double fix : {1.0, 0.0}) {
      Node child{next_id++, node.id, bound, node.lower, node.upper};
      child.lower[branch] = fix;
      child.upper[branch] = fix;
      open.push(std::move(child));
    }
  }

  if (unbounded) {
    out.status = MilpStatus::kUnbounded;
    return out;
  }
  double best_open = -lp::kNoBound;
  if (limit_hit) {
    while (!open.empty()) {
      best_open = std::max(best_open, open.top().bound);
      open.pop();
    }
  }
  if (!have_incumbent) {
    out.status = limit_hit ? MilpStatus::kLimitNoIncumbent : MilpStatus::kInfeasible;
    out.bound = sign * best_open;
    return out;
  }
  out.objective = sign * incumbent;
  const double bound = limit_hit ? std::max(best_open, incumbent) : incumbent;
  out.bound = sign * bound;
  out.gap = (bound - incumbent) / std::max(1e-10, std::abs(incumbent));
  if (!std::isfinite(out.gap)) out.gap = lp::kNoBound;
  out.status = (!limit_hit || out.gap <= kGapTolerance) ? MilpStatus::kOptimal
                                                        : MilpStatus::kLimit;
  return out;
}

}  // namespace scenred::milp
