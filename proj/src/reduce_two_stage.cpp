#include "scenred/reduce_two_stage.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "scenred/milp.hpp"

namespace scenred {

namespace {

void check_k(const UncertaintySet& u, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > u.size()) {
    throw Error(ErrorCode::kValidation,
                "K must satisfy 1 <= K <= N (K = " + std::to_string(k) +
                    ", N = " + std::to_string(u.size()) + ")");
  }
}

using Bits = std::vector<std::uint64_t>;

bool any(const Bits& b) {
  for (auto w : b) if (w) return true;
  return false;
}

int popcount(const Bits& b) {
  int c = 0;
  for (auto w : b) c += std::popcount(w);
  return c;
}

int popcount_and(const Bits& a, const Bits& b) {
  int c = 0;
  for (std::size_t w = 0; w < a.size(); ++w) c += std::popcount(a[w] & b[w]);
  return c;
}

bool subset_of(const Bits& a, const Bits& b) {
  for (std::size_t w = 0; w < a.size(); ++w) if (a[w] & ~b[w]) return false;
  return true;
}

struct CoverSearch {
  std::vector<Bits> cols;      // rows covered by each surviving column
  std::vector<int> col_id;     // original column index
  std::vector<std::vector<int>> by_row;  // surviving columns covering each row
  std::vector<int> chosen;

  bool dfs(const Bits& uncovered, int budget) {
    if (!any(uncovered)) return true;
    if (budget == 0) return false;
    // Branch on the uncovered row with the fewest candidate columns.
    int row = -1;
    std::size_t fewest = 0;
    int max_gain = 0;
    for (std::size_t w = 0; w < uncovered.size(); ++w) {
      std::uint64_t bits = uncovered[w];
      while (bits) {
        const int r = static_cast<int>(w * 64 + std::countr_zero(bits));
        bits &= bits - 1;
        const std::size_t c = by_row[static_cast<std::size_t>(r)].size();
        if (row < 0 || c < fewest) {
          row = r;
          fewest = c;
        }
      }
    }
    if (fewest == 0) return false;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      max_gain = std::max(max_gain, popcount_and(cols[c], uncovered));
    }
    const int left = popcount(uncovered);
    if (max_gain == 0 || (left + max_gain - 1) / max_gain > budget) return false;

    std::vector<std::pair<int, int>> order;
    for (int c : by_row[static_cast<std::size_t>(row)]) {
      order.emplace_back(-popcount_and(cols[static_cast<std::size_t>(c)], uncovered), c);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [neg_gain, c] : order) {
      Bits next = uncovered;
      for (std::size_t w = 0; w < next.size(); ++w) next[w] &= ~cols[static_cast<std::size_t>(c)][w];
      chosen.push_back(col_id[static_cast<std::size_t>(c)]);
      if (dfs(next, budget - 1)) return true;
      chosen.pop_back();
    }
    return false;
  }
};

}  // namespace

double two_stage_value(const DMatrix& d, std::span<const int> subset) {
  double value = kInf;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double best = 0.0;
    for (int l : subset) best = std::max(best, d(i, static_cast<std::size_t>(l)));
    value = std::min(value, best);
  }
  return value;
}

std::optional<std::vector<int>> threshold_cover(const DMatrix& d, double tau, int k) {
  const std::size_t n_scen = d.size();
  std::vector<std::size_t> live_rows;
  for (std::size_t i = 0; i < n_scen; ++i) {
    if (!std::isinf(d(i, 0))) live_rows.push_back(i);
  }
  if (live_rows.empty()) return std::vector<int>{};
  const std::size_t words = (live_rows.size() + 63) / 64;
  std::vector<Bits> masks(n_scen, Bits(words, 0));
  for (std::size_t l = 0; l < n_scen; ++l) {
    for (std::size_t r = 0; r < live_rows.size(); ++r) {
      if (d(live_rows[r], l) >= tau) masks[l][r / 64] |= std::uint64_t{1} << (r % 64);
    }
  }
  CoverSearch s;
  for (std::size_t a = 0; a < n_scen; ++a) {
    if (!any(masks[a])) continue;
    bool dominated = false;
    for (std::size_t b = 0; b < n_scen && !dominated; ++b) {
      if (a == b || !subset_of(masks[a], masks[b])) continue;
      // Equal masks: keep the lowest index.
      dominated = !subset_of(masks[b], masks[a]) || b < a;
    }
    if (dominated) continue;
    s.col_id.push_back(static_cast<int>(a));
    s.cols.push_back(masks[a]);
  }
  s.by_row.assign(live_rows.size(), {});
  for (std::size_t c = 0; c < s.cols.size(); ++c) {
    for (std::size_t r = 0; r < live_rows.size(); ++r) {
      if (s.cols[c][r / 64] >> (r % 64) & 1) s.by_row[r].push_back(static_cast<int>(c));
    }
  }
  Bits all(words, 0);
  for (std::size_t r = 0; r < live_rows.size(); ++r) all[r / 64] |= std::uint64_t{1} << (r % 64);
  if (!s.dfs(all, k)) return std::nullopt;
  std::sort(s.chosen.begin(), s.chosen.end());
  return s.chosen;
}

ReductionResult two_stage_result(const UncertaintySet& u, const DMatrix& d,
                                 std::vector<int> subset, Method method) {
  std::sort(subset.begin(), subset.end());
  const std::size_t n_scen = u.size();
  ReductionResult r;
  r.method = method;
  r.stage = 2;
  r.lambda.assign(subset.size(), std::vector<double>(n_scen, 0.0));
  for (std::size_t q = 0; q < subset.size(); ++q) {
    r.reduced.push_back(u[static_cast<std::size_t>(subset[q])]);
    r.lambda[q][static_cast<std::size_t>(subset[q])] = 1.0;
  }
  r.mu.assign(n_scen, std::vector<double>(subset.size(), 0.0));
  for (std::size_t i = 0; i < n_scen; ++i) {
    std::size_t best = 0;
    for (std::size_t q = 1; q < subset.size(); ++q) {
      if (d(i, static_cast<std::size_t>(subset[q])) > d(i, static_cast<std::size_t>(subset[best]))) best = q;
    }
    r.mu[i][best] = 1.0;
  }
  r.t = std::clamp(two_stage_value(d, subset), 0.0, 1.0);
  r.guarantee = guarantee_from_t(r.t);
  return r;
}

namespace {

std::vector<int> pad_subset(std::vector<int> subset, std::size_t n_scen, int k) {
  std::vector<bool> in(n_scen, false);
  for (int l : subset) in[static_cast<std::size_t>(l)] = true;
  for (std::size_t l = 0; l < n_scen && subset.size() < static_cast<std::size_t>(k); ++l) {
    if (!in[l]) subset.push_back(static_cast<int>(l));
  }
  return subset;
}

std::vector<int> milp_subset(const DMatrix& d, int k, const TwoStageOptions& options,
                             bool& exact, double& gap) {
  const std::size_t n_scen = d.size();
  milp::MilpProblem mp;
  lp::LpProblem& p = mp.lp;
  p.add_variable(1.0, 0.0, 1.0);
  for (std::size_t l = 0; l < n_scen; ++l) {
    mp.binaries.push_back(p.add_variable(0.0, 0.0, 1.0));
  }
  auto mu_of = [&](std::size_t i, std::size_t l) { return 1 + n_scen + i * n_scen + l; };
  for (std::size_t q = 0; q < n_scen * n_scen; ++q) p.add_variable(0.0);
  const std::size_t nv = p.num_vars();
  for (std::size_t i = 0; i < n_scen; ++i) {
    std::vector<double> sum(nv, 0.0);
    for (std::size_t l = 0; l < n_scen; ++l) {
      std::vector<double> link(nv, 0.0);
      link[mu_of(i, l)] = 1.0;
      link[1 + l] = -1.0;
      p.add_row(std::move(link), lp::RowSense::kLessEqual, 0.0);
      sum[mu_of(i, l)] = 1.0;
    }
    p.add_row(std::move(sum), lp::RowSense::kEqual, 1.0);
    if (std::isinf(d(i, 0))) continue;
    std::vector<double> row(nv, 0.0);
    row[0] = 1.0;
    for (std::size_t l = 0; l < n_scen; ++l) row[mu_of(i, l)] = -std::min(d(i, l), 1.0);
    p.add_row(std::move(row), lp::RowSense::kLessEqual, 0.0);
  }
  std::vector<double> card(nv, 0.0);
  for (std::size_t l = 0; l < n_scen; ++l) card[1 + l] = 1.0;
  p.add_row(std::move(card), lp::RowSense::kEqual, static_cast<double>(k));

  milp::MilpOptions mo;
  mo.time_limit = options.time_limit;
  mo.max_nodes = options.max_nodes;
  const milp::MilpSolution sol = milp::solve_milp(mp, mo);
  if (!sol.has_incumbent()) {
    throw Error(sol.status == milp::MilpStatus::kLimitNoIncumbent ? ErrorCode::kTimeLimit
                                                                  : ErrorCode::kSolver,
                std::string("IP ended ") + milp::to_string(sol.status));
  }
  exact = sol.status == milp::MilpStatus::kOptimal;
  gap = sol.gap;
  std::vector<int> subset;
  for (std::size_t l = 0; l < n_scen; ++l) {
    if (sol.x[1 + l] > 0.5) subset.push_back(static_cast<int>(l));
  }
  return subset;
}

}  // namespace

ReductionResult ip_two_stage(const UncertaintySet& u, int k, const TwoStageOptions& options) {
  check_k(u, k);
  const DMatrix d = d_matrix(u);
  const std::size_t n_scen = u.size();
  if (options.use_milp) {
    bool exact = true;
    double gap = 0.0;
    std::vector<int> subset = milp_subset(d, k, options, exact, gap);
    ReductionResult r = two_stage_result(u, d, std::move(subset), Method::kIp2);
    r.exact = exact;
    r.gap = gap;
    return r;
  }
  std::vector<double> values;
  for (std::size_t i = 0; i < n_scen; ++i) {
    for (std::size_t l = 0; l < n_scen; ++l) {
      const double v = d(i, l);
      if (std::isfinite(v) && v <= 1.0) values.push_back(v);
    }
  }
  values.push_back(0.0);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // values[0] = 0 is always coverable.
  std::vector<int> best = *threshold_cover(d, 0.0, k);
  std::size_t lo = 0;
  std::size_t hi = values.size();
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (auto cover = threshold_cover(d, values[mid], k)) {
      best = std::move(*cover);
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return two_stage_result(u, d, pad_subset(std::move(best), n_scen, k), Method::kIp2);
}

ReductionResult greedy_two_stage(const UncertaintySet& u, int k) {
  check_k(u, k);
  const DMatrix d = d_matrix(u);
  const std::size_t n_scen = u.size();
  std::vector<double> row_best(n_scen, 0.0);
  std::vector<bool> in(n_scen, false);
  std::vector<int> chosen;
  for (int step = 0; step < k; ++step) {
    int pick = -1;
    double pick_value = -1.0;
    double pick_sum = -1.0;
    for (std::size_t l = 0; l < n_scen; ++l) {
      if (in[l]) continue;
      double value = kInf;
      double sum = 0.0;
      for (std::size_t i = 0; i < n_scen; ++i) {
        const double b = std::max(row_best[i], d(i, l));
        value = std::min(value, b);
        sum += std::min(b, 1.0);
      }
      value = std::min(value, 1.0);
      if (value > pick_value || (value == pick_value && sum > pick_sum + 1e-12)) {
        pick = static_cast<int>(l);
        pick_value = value;
        pick_sum = sum;
      }
    }
    in[static_cast<std::size_t>(pick)] = true;
    chosen.push_back(pick);
    for (std::size_t i = 0; i < n_scen; ++i) {
      row_best[i] = std::max(row_best[i], d(i, static_cast<std::size_t>(pick)));
    }
  }
  ReductionResult r = two_stage_result(u, d, std::move(chosen), Method::kGreedy2);
  r.exact = false;
  return r;
}

double brute_two_stage(const UncertaintySet& u, int k) {
  check_k(u, k);
  const int n_scen = static_cast<int>(u.size());
  double count = 1.0;
  for (int q = 0; q < k; ++q) count = count * (n_scen - q) / (q + 1);
  if (count > 1e6 + 0.5) throw Error(ErrorCode::kSizeGuard, "C(N, K) exceeds 1e6 subsets");
  const DMatrix d = d_matrix(u);
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  double best = 0.0;
  while (true) {
    best = std::max(best, std::min(two_stage_value(d, idx), 1.0));
    int q = k - 1;
    while (q >= 0 && idx[static_cast<std::size_t>(q)] == n_scen - k + q) --q;
    if (q < 0) break;
    ++idx[static_cast<std::size_t>(q)];
    for (int r = q + 1; r < k; ++r) idx[static_cast<std::size_t>(r)] = idx[static_cast<std::size_t>(r - 1)] + 1;
  }
  return best;
}

}  // namespace scenred
