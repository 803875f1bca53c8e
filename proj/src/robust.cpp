#include "scenred/robust.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "scenred/milp.hpp"

namespace scenred {

namespace {

using Clock = std::chrono::steady_clock;

void check_inputs(const RobustInstance& inst, const UncertaintySet& u) {
  inst.validate();
  if (u.dimension() != static_cast<std::size_t>(inst.n)) {
    throw Error(ErrorCode::kDimension, "scenario dimension " + std::to_string(u.dimension()) +
                                           " does not match instance n = " +
                                           std::to_string(inst.n));
  }
}

void check_binary(const std::vector<int>& x, int n) {
  if (x.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::kDimension, "solution vector has wrong length");
  }
  for (int v : x) {
    if (v != 0 && v != 1) throw Error(ErrorCode::kValidation, "solution entries must be 0 or 1");
  }
}

double dot(const Scenario& c, const std::vector<int>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j]) s += c[j];
  }
  return s;
}

bool dominates(const std::vector<std::vector<int>>& nbh, const std::vector<int>& x) {
  for (const auto& nv : nbh) {
    bool hit = false;
    for (int u : nv) hit = hit || x[static_cast<std::size_t>(u)];
    if (!hit) return false;
  }
  return true;
}

void check_one_stage_feasible(const RobustInstance& inst, const std::vector<int>& x) {
  check_binary(x, inst.n);
  if (inst.kind == ProblemKind::kSelection) {
    if (std::accumulate(x.begin(), x.end(), 0) != inst.p) {
      throw Error(ErrorCode::kValidation, "selection solution must pick exactly p items");
    }
  } else if (!dominates(inst.closed_neighborhoods(), x)) {
    throw Error(ErrorCode::kValidation, "vertex-cover solution leaves a node uncovered");
  }
}

// Greedy dominating set under cost vector w: repeatedly take the node with the
// best newly-covered count per unit cost.
std::vector<int> greedy_dominating(const std::vector<std::vector<int>>& nbh,
                                   const std::vector<double>& w,
                                   std::vector<int> x) {
  const std::size_t n = nbh.size();
  std::vector<bool> covered(n, false);
  auto refresh = [&] {
    for (std::size_t v = 0; v < n; ++v) {
      covered[v] = false;
      for (int u : nbh[v]) covered[v] = covered[v] || x[static_cast<std::size_t>(u)];
    }
  };
  refresh();
  while (true) {
    int best = -1;
    double best_ratio = -1.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (x[u]) continue;
      int gain = 0;
      for (int v : nbh[u]) gain += covered[static_cast<std::size_t>(v)] ? 0 : 1;
      if (gain == 0) continue;
      const double ratio = gain / std::max(w[u], 1e-12);
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = static_cast<int>(u);
      }
    }
    if (best < 0) break;
    x[static_cast<std::size_t>(best)] = 1;
    refresh();
  }
  return x;
}

std::vector<int> cheapest_p(std::span<const double> w, int p) {
  std::vector<int> order(w.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return w[static_cast<std::size_t>(a)] < w[static_cast<std::size_t>(b)];
  });
  std::vector<int> x(w.size(), 0);
  for (int q = 0; q < p; ++q) x[static_cast<std::size_t>(order[static_cast<std::size_t>(q)])] = 1;
  return x;
}

double remaining_seconds(Clock::time_point start, double limit) {
  return limit - std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

double evaluate_one_stage(const RobustInstance& inst, const std::vector<int>& x,
                          const UncertaintySet& u) {
  check_inputs(inst, u);
  check_one_stage_feasible(inst, x);
  double v = 0.0;
  for (const Scenario& c : u) v = std::max(v, dot(c, x));
  return v;
}

RobustSolution solve_one_stage(const RobustInstance& inst, const UncertaintySet& u,
                               const RobustOptions& options) {
  check_inputs(inst, u);
  const std::size_t n = static_cast<std::size_t>(inst.n);
  const auto nbh = inst.kind == ProblemKind::kVertexCover ? inst.closed_neighborhoods()
                                                          : std::vector<std::vector<int>>{};

  // Nominal solutions of every scenario and of the average as starting points.
  std::vector<std::vector<double>> weights;
  std::vector<double> avg(n, 0.0);
  for (const Scenario& c : u) {
    weights.push_back(c.values());
    for (std::size_t j = 0; j < n; ++j) avg[j] += c[j] / static_cast<double>(u.size());
  }
  weights.push_back(avg);
  std::vector<int> start;
  double start_value = kInf;
  for (const auto& w : weights) {
    std::vector<int> x = inst.kind == ProblemKind::kSelection
                             ? cheapest_p(w, inst.p)
                             : greedy_dominating(nbh, w, std::vector<int>(n, 0));
    const double v = evaluate_one_stage(inst, x, u);
    if (v < start_value) {
      start_value = v;
      start = std::move(x);
    }
  }

  milp::MilpProblem mp;
  lp::LpProblem& p = mp.lp;
  p.sense = lp::Sense::kMinimize;
  for (std::size_t j = 0; j < n; ++j) mp.binaries.push_back(p.add_variable(0.0, 0.0, 1.0));
  const std::size_t z = p.add_variable(1.0);
  for (const Scenario& c : u) {
    std::vector<double> row(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) row[j] = c[j];
    row[z] = -1.0;
    p.add_row(std::move(row), lp::RowSense::kLessEqual, 0.0);
  }
  if (inst.kind == ProblemKind::kSelection) {
    std::vector<double> row(n + 1, 1.0);
    row[z] = 0.0;
    p.add_row(std::move(row), lp::RowSense::kEqual, static_cast<double>(inst.p));
  } else {
    for (const auto& nv : nbh) {
      std::vector<double> row(n + 1, 0.0);
      for (int v : nv) row[static_cast<std::size_t>(v)] = 1.0;
      p.add_row(std::move(row), lp::RowSense::kGreaterEqual, 1.0);
    }
  }
  auto to_vector = [&](const std::vector<int>& x) {
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) out[j] = x[j];
    out[z] = evaluate_one_stage(inst, x, u);
    return out;
  };

  milp::MilpOptions mo;
  mo.time_limit = options.time_limit;
  mo.max_nodes = options.max_nodes;
  mo.initial_solution = to_vector(start);
  mo.heuristic = [&](const std::vector<double>& lpx) -> std::optional<std::vector<double>> {
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = 1.0 - lpx[j];
    if (inst.kind == ProblemKind::kSelection) return to_vector(cheapest_p(w, inst.p));
    std::vector<int> x(n, 0);
    for (std::size_t j = 0; j < n; ++j) x[j] = lpx[j] > 0.5 ? 1 : 0;
    return to_vector(greedy_dominating(nbh, avg, std::move(x)));
  };
  const milp::MilpSolution sol = milp::solve_milp(mp, mo);
  if (!sol.has_incumbent()) {
    throw Error(sol.status == milp::MilpStatus::kLimitNoIncumbent ? ErrorCode::kTimeLimit
                                                                  : ErrorCode::kSolver,
                std::string("robust MILP ended ") + milp::to_string(sol.status));
  }
  RobustSolution out;
  out.x.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) out.x[j] = sol.x[j] > 0.5 ? 1 : 0;
  out.exact = sol.status == milp::MilpStatus::kOptimal;
  for (const Scenario& c : u) out.per_scenario.push_back(dot(c, out.x));
  out.value = *std::max_element(out.per_scenario.begin(), out.per_scenario.end());
  return out;
}

Recourse second_stage_selection(const std::vector<int>& x, const Scenario& c, int p) {
  const int chosen = std::accumulate(x.begin(), x.end(), 0);
  if (chosen > p) throw Error(ErrorCode::kValidation, "first stage already exceeds p items");
  const int need = p - chosen;
  if (static_cast<std::size_t>(p) > x.size()) {
    throw Error(ErrorCode::kValidation, "fewer than p items available");
  }
  std::vector<int> free;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!x[j]) free.push_back(static_cast<int>(j));
  }
  std::stable_sort(free.begin(), free.end(), [&](int a, int b) {
    return c[static_cast<std::size_t>(a)] < c[static_cast<std::size_t>(b)];
  });
  Recourse r;
  r.y.assign(x.size(), 0);
  for (int q = 0; q < need; ++q) {
    r.y[static_cast<std::size_t>(free[static_cast<std::size_t>(q)])] = 1;
    r.value += c[static_cast<std::size_t>(free[static_cast<std::size_t>(q)])];
  }
  return r;
}

Recourse second_stage_vertex_cover(const RobustInstance& inst, const std::vector<int>& x,
                                   const Scenario& c) {
  const auto nbh = inst.closed_neighborhoods();
  const std::size_t n = nbh.size();
  Recourse r;
  r.y.assign(n, 0);
  std::vector<std::size_t> open;
  for (std::size_t v = 0; v < n; ++v) {
    bool hit = false;
    for (int u : nbh[v]) hit = hit || x[static_cast<std::size_t>(u)];
    if (!hit) open.push_back(v);
  }
  if (open.empty()) return r;
  milp::MilpProblem mp;
  lp::LpProblem& p = mp.lp;
  p.sense = lp::Sense::kMinimize;
  for (std::size_t u = 0; u < n; ++u) {
    // Nodes already bought in the first stage are not available again.
    mp.binaries.push_back(p.add_variable(c[u], 0.0, x[u] ? 0.0 : 1.0));
  }
  for (std::size_t v : open) {
    std::vector<double> row(n, 0.0);
    for (int u : nbh[v]) row[static_cast<std::size_t>(u)] = 1.0;
    p.add_row(std::move(row), lp::RowSense::kGreaterEqual, 1.0);
  }
  milp::MilpOptions mo;
  mo.time_limit = 1e9;
  mo.initial_solution = [&] {
    std::vector<int> full = greedy_dominating(nbh, c.values(), x);
    std::vector<double> y(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) y[u] = full[u] && !x[u] ? 1.0 : 0.0;
    return y;
  }();
  const milp::MilpSolution sol = milp::solve_milp(mp, mo);
  if (!sol.has_incumbent()) throw Error(ErrorCode::kSolver, "recourse MILP failed");
  for (std::size_t u = 0; u < n; ++u) {
    r.y[u] = sol.x[u] > 0.5 ? 1 : 0;
    if (r.y[u]) r.value += c[u];
  }
  return r;
}

namespace {

void check_two_stage(const RobustInstance& inst) {
  if (inst.first_stage_costs.size() != static_cast<std::size_t>(inst.n)) {
    throw Error(ErrorCode::kValidation, "two-stage instance needs n first-stage costs");
  }
}

double first_stage_cost(const RobustInstance& inst, const std::vector<int>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j]) s += inst.first_stage_costs[j];
  }
  return s;
}

std::vector<double> two_stage_values(const RobustInstance& inst, const std::vector<int>& x,
                                     const UncertaintySet& u) {
  const double base = first_stage_cost(inst, x);
  std::vector<double> out;
  for (const Scenario& c : u) {
    const Recourse r = inst.kind == ProblemKind::kSelection
                           ? second_stage_selection(x, c, inst.p)
                           : second_stage_vertex_cover(inst, x, c);
    out.push_back(base + r.value);
  }
  return out;
}

struct TwoStageSearch {
  const RobustInstance& inst;
  const UncertaintySet& u;
  Clock::time_point start;
  double time_limit;
  std::vector<std::vector<int>> nbh;
  std::vector<int> x;       // decided prefix (1 = first stage)
  std::vector<int> best_x;
  double best = kInf;
  bool timed_out = false;
  long nodes = 0;

  void offer(const std::vector<int>& cand) {
    const auto vals = two_stage_values(inst, cand, u);
    const double v = *std::max_element(vals.begin(), vals.end());
    if (v < best - 1e-9) {
      best = v;
      best_x = cand;
    }
  }

  // Selection: per scenario, the open picks are filled from the cheapest of
  // min(C_j, c_j) over undecided items and c_j over excluded ones.
  double selection_bound(std::size_t depth, int chosen, double base) const {
    const std::size_t n = x.size();
    const int need = inst.p - chosen;
    double lb = base;
    std::vector<double> pool;
    for (const Scenario& c : u) {
      pool.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j < depth) {
          if (!x[j]) pool.push_back(c[j]);
        } else {
          pool.push_back(std::min(c[j], inst.first_stage_costs[j]));
        }
      }
      std::nth_element(pool.begin(), pool.begin() + need, pool.end());
      double s = 0.0;
      for (int q = 0; q < need; ++q) s += pool[static_cast<std::size_t>(q)];
      lb = std::max(lb, base + s);
    }
    return lb;
  }

  // Vertex cover: LP relaxation of the remaining domination problem, undecided
  // nodes priced at the cheaper of both stages.
  double cover_bound(std::size_t depth, double base) const {
    const std::size_t n = x.size();
    std::vector<std::size_t> open;
    for (std::size_t v = 0; v < n; ++v) {
      bool hit = false;
      for (int w : nbh[v]) hit = hit || (static_cast<std::size_t>(w) < depth && x[static_cast<std::size_t>(w)]);
      if (!hit) open.push_back(v);
    }
    if (open.empty()) return base;
    double lb = base;
    for (const Scenario& c : u) {
      lp::LpProblem p;
      p.sense = lp::Sense::kMinimize;
      for (std::size_t w = 0; w < n; ++w) {
        const bool fixed_in = w < depth && x[w];
        const double cost = w < depth ? c[w] : std::min(c[w], inst.first_stage_costs[w]);
        p.add_variable(cost, 0.0, fixed_in ? 0.0 : 1.0);
      }
      for (std::size_t v : open) {
        std::vector<double> row(n, 0.0);
        for (int w : nbh[v]) row[static_cast<std::size_t>(w)] = 1.0;
        p.add_row(std::move(row), lp::RowSense::kGreaterEqual, 1.0);
      }
      const lp::LpSolution sol = lp::solve_lp(p);
      if (sol.status != lp::LpStatus::kOptimal) throw Error(ErrorCode::kSolver, "bound LP failed");
      lb = std::max(lb, base + sol.objective);
    }
    return lb;
  }

  void dfs(std::size_t depth, int chosen, double base) {
    if (timed_out) return;
    if (++nodes % 64 == 0 && remaining_seconds(start, time_limit) <= 0.0) {
      timed_out = true;
      return;
    }
    const std::size_t n = x.size();
    const bool selection = inst.kind == ProblemKind::kSelection;
    if (depth == n || (selection && chosen == inst.p)) {
      std::vector<int> cand = x;
      for (std::size_t j = depth; j < n; ++j) cand[j] = 0;
      offer(cand);
      return;
    }
    const double lb = selection ? selection_bound(depth, chosen, base) : cover_bound(depth, base);
    if (lb >= best - 1e-9) return;
    x[depth] = 1;
    dfs(depth + 1, chosen + 1, base + inst.first_stage_costs[depth]);
    x[depth] = 0;
    dfs(depth + 1, chosen, base);
  }
};

}  // namespace

double evaluate_two_stage(const RobustInstance& inst, const std::vector<int>& x,
                          const UncertaintySet& u) {
  check_inputs(inst, u);
  check_two_stage(inst);
  check_binary(x, inst.n);
  const auto vals = two_stage_values(inst, x, u);
  return *std::max_element(vals.begin(), vals.end());
}

RobustSolution solve_two_stage(const RobustInstance& inst, const UncertaintySet& u,
                               const RobustOptions& options) {
  check_inputs(inst, u);
  check_two_stage(inst);
  const std::size_t n = static_cast<std::size_t>(inst.n);
  TwoStageSearch s{inst, u, Clock::now(), options.time_limit, {}, std::vector<int>(n, 0), {}, kInf,
                   false, 0};
  if (inst.kind == ProblemKind::kVertexCover) s.nbh = inst.closed_neighborhoods();
  s.offer(std::vector<int>(n, 0));
  s.dfs(0, 0, 0.0);
  RobustSolution out;
  out.x = s.best_x;
  out.per_scenario = two_stage_values(inst, out.x, u);
  out.value = *std::max_element(out.per_scenario.begin(), out.per_scenario.end());
  out.exact = !s.timed_out;
  return out;
}

RobustSolution solve_robust(const RobustInstance& inst, const UncertaintySet& u,
                            const RobustOptions& options) {
  return inst.stages == 1 ? solve_one_stage(inst, u, options) : solve_two_stage(inst, u, options);
}

double evaluate_robust(const RobustInstance& inst, const std::vector<int>& x,
                       const UncertaintySet& u) {
  return inst.stages == 1 ? evaluate_one_stage(inst, x, u) : evaluate_two_stage(inst, x, u);
}

std::string save_robust_solution(const RobustSolution& s) {
  nlohmann::json doc;
  doc["x"] = s.x;
  doc["value"] = s.value;
  doc["per_scenario"] = s.per_scenario;
  doc["exact"] = s.exact;
  return doc.dump() + "\n";
}

}  // namespace scenred
