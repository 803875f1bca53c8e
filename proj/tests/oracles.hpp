#pragma once

// Reference implementations used only by the tests. They deliberately avoid
// the code paths under test: enumeration instead of branch-and-bound, grid
// search instead of LPs, vertex enumeration instead of simplex.

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "scenred/linprog.hpp"
#include "scenred/model.hpp"

namespace oracle {

using scenred::Matrix;
using scenred::Scenario;
using scenred::UncertaintySet;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// min s such that target <= s * gen componentwise.
inline double scale(const std::vector<double>& target, const std::vector<double>& gen) {
  double s = 0.0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    if (target[j] == 0.0) continue;
    if (gen[j] == 0.0) return kInf;
    s = std::max(s, target[j] / gen[j]);
  }
  return s;
}

/// Best cover factor of `target` by conv(a, b), by grid search over the weight.
inline double cover_two(const std::vector<double>& target, const std::vector<double>& a,
                        const std::vector<double>& b, int steps = 20000) {
  double best = kInf;
  for (int q = 0; q <= steps; ++q) {
    const double w = static_cast<double>(q) / steps;
    std::vector<double> m(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) m[j] = w * a[j] + (1 - w) * b[j];
    best = std::min(best, scale(target, m));
  }
  return best;
}

/// d[i][l] straight from the definition.
inline Matrix d_matrix(const UncertaintySet& u) {
  const std::size_t n_scen = u.size();
  Matrix d(n_scen, std::vector<double>(n_scen, kInf));
  for (std::size_t i = 0; i < n_scen; ++i)
    for (std::size_t l = 0; l < n_scen; ++l) {
      double v = kInf;
      for (std::size_t j = 0; j < u.dimension(); ++j)
        if (u[i][j] > 0) v = std::min(v, u[l][j] / u[i][j]);
      d[i][l] = v;
    }
  return d;
}

/// Calls fn on every k-subset of [0, n).
inline void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    int q = k - 1;
    while (q >= 0 && idx[static_cast<std::size_t>(q)] == n - k + q) --q;
    if (q < 0) return;
    ++idx[static_cast<std::size_t>(q)];
    for (int r = q + 1; r < k; ++r) idx[static_cast<std::size_t>(r)] = idx[static_cast<std::size_t>(r - 1)] + 1;
  }
}

inline double two_stage_brute(const UncertaintySet& u, int k) {
  const Matrix d = d_matrix(u);
  double best = 0.0;
  for_each_subset(static_cast<int>(u.size()), k, [&](const std::vector<int>& s) {
    double worst = kInf;
    for (const auto& row : d) {
      double b = 0.0;
      for (int l : s) b = std::max(b, row[static_cast<std::size_t>(l)]);
      worst = std::min(worst, b);
    }
    best = std::max(best, std::min(worst, 1.0));
  });
  return best;
}

/// max c^T x s.t. A x <= b, x >= 0 by enumerating all vertices (tiny problems).
inline std::optional<double> lp_vertex_max(const std::vector<double>& c, const Matrix& a,
                                           const std::vector<double>& b) {
  const std::size_t n = c.size();
  const std::size_t m = a.size();
  // Constraint pool: rows of A, then -x_j <= 0.
  Matrix pool = a;
  std::vector<double> rhs = b;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> row(n, 0.0);
    row[j] = -1.0;
    pool.push_back(row);
    rhs.push_back(0.0);
  }
  std::optional<double> best;
  std::vector<int> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == n) {
      Matrix g(n, std::vector<double>(n + 1));
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < n; ++j) g[r][j] = pool[static_cast<std::size_t>(pick[r])][j];
        g[r][n] = rhs[static_cast<std::size_t>(pick[r])];
      }
      for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col; r < n; ++r)
          if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
        if (std::abs(g[piv][col]) < 1e-12) return;
        std::swap(g[piv], g[col]);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == col) continue;
          const double f = g[r][col] / g[col][col];
          for (std::size_t j = col; j <= n; ++j) g[r][j] -= f * g[col][j];
        }
      }
      std::vector<double> x(n);
      for (std::size_t j = 0; j < n; ++j) x[j] = g[j][n] / g[j][j];
      for (std::size_t r = 0; r < pool.size(); ++r) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) lhs += pool[r][j] * x[j];
        if (lhs > rhs[r] + 1e-9) return;
      }
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v += c[j] * x[j];
      if (!best || v > *best) best = v;
      return;
    }
    for (std::size_t r = start; r < m + n; ++r) {
      pick[depth] = static_cast<int>(r);
      rec(r + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// Pure-binary program optimum by enumeration; nothing if infeasible.
inline std::optional<double> binary_enumeration(const scenred::lp::LpProblem& p) {
  const std::size_t n = p.num_vars();
  std::optional<double> best;
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    bool ok = true;
    for (std::size_t r = 0; r < p.num_rows() && ok; ++r) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (mask >> j & 1) lhs += p.rows[r][j];
      switch (p.row_senses[r]) {
        case scenred::lp::RowSense::kLessEqual: ok = lhs <= p.rhs[r] + 1e-9; break;
        case scenred::lp::RowSense::kGreaterEqual: ok = lhs >= p.rhs[r] - 1e-9; break;
        case scenred::lp::RowSense::kEqual: ok = std::abs(lhs - p.rhs[r]) <= 1e-9; break;
      }
    }
    if (!ok) continue;
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (mask >> j & 1) v += p.objective[j];
    const bool better = !best || (p.sense == scenred::lp::Sense::kMaximize ? v > *best : v < *best);
    if (better) best = v;
  }
  return best;
}

/// Closed neighbourhoods of a simple graph.
inline std::vector<std::vector<int>> neighbourhoods(int n, const std::vector<std::pair<int, int>>& e) {
  std::vector<std::vector<int>> nb(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) nb[static_cast<std::size_t>(v)].push_back(v);
  for (auto [a, b] : e) {
    nb[static_cast<std::size_t>(a)].push_back(b);
    nb[static_cast<std::size_t>(b)].push_back(a);
  }
  return nb;
}

inline bool dominating(const std::vector<std::vector<int>>& nb, unsigned mask) {
  for (const auto& nv : nb) {
    bool hit = false;
    for (int u : nv) hit = hit || (mask >> u & 1);
    if (!hit) return false;
  }
  return true;
}

/// Is there a dominating set of size <= k?
inline bool has_dominating_set(int n, const std::vector<std::pair<int, int>>& e, int k) {
  const auto nb = neighbourhoods(n, e);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) <= k && dominating(nb, mask)) return true;
  }
  return false;
}

inline double dot(const Scenario& c, unsigned mask) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.dimension(); ++j)
    if (mask >> j & 1) s += c[j];
  return s;
}

/// One-stage robust optimum by enumeration.
inline double robust_one_stage(const scenred::RobustInstance& inst, const UncertaintySet& u) {
  const auto nb = neighbourhoods(inst.n, inst.edges);
  double best = kInf;
  for (unsigned mask = 0; mask < (1u << inst.n); ++mask) {
    const bool feasible = inst.kind == scenred::ProblemKind::kSelection
                              ? std::popcount(mask) == inst.p
                              : dominating(nb, mask);
    if (!feasible) continue;
    double worst = 0.0;
    for (const Scenario& c : u) worst = std::max(worst, dot(c, mask));
    best = std::min(best, worst);
  }
  return best;
}

/// Worst-case two-stage value of first-stage mask x, recourse by enumeration.
inline double two_stage_value(const scenred::RobustInstance& inst, const UncertaintySet& u,
                              unsigned x) {
  const auto nb = neighbourhoods(inst.n, inst.edges);
  double first = 0.0;
  for (int j = 0; j < inst.n; ++j)
    if (x >> j & 1) first += inst.first_stage_costs[static_cast<std::size_t>(j)];
  double worst = 0.0;
  for (const Scenario& c : u) {
    double rec = kInf;
    for (unsigned y = 0; y < (1u << inst.n); ++y) {
      if (y & x) continue;
      const bool ok = inst.kind == scenred::ProblemKind::kSelection
                          ? std::popcount(x | y) == inst.p
                          : dominating(nb, x | y);
      if (ok) rec = std::min(rec, dot(c, y));
    }
    worst = std::max(worst, first + rec);
  }
  return worst;
}

inline double robust_two_stage(const scenred::RobustInstance& inst, const UncertaintySet& u) {
  double best = kInf;
  for (unsigned x = 0; x < (1u << inst.n); ++x) {
    if (inst.kind == scenred::ProblemKind::kSelection && std::popcount(x) > inst.p) continue;
    best = std::min(best, two_stage_value(inst, u, x));
  }
  return best;
}

}  // namespace oracle
