#include "scenred/reduce_one_stage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scenred/guarantee.hpp"
#include "scenred/linprog.hpp"
#include "scenred/milp.hpp"
#include "scenred/random.hpp"

namespace scenred {

std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int q = 0; q < k; ++q) {
    std::uniform_int_distribution<int> pick(q, n - 1);
    std::swap(pool[static_cast<std::size_t>(q)],
              pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

namespace {

void check_k(const UncertaintySet& u, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > u.size()) {
    throw Error(ErrorCode::kValidation,
                "K must satisfy 1 <= K <= N (K = " + std::to_string(k) +
                    ", N = " + std::to_string(u.size()) + ")");
  }
}

lp::LpSolution solve_or_throw(const lp::LpProblem& p, const char* what) {
  lp::LpSolution sol = lp::solve_lp(p);
  if (sol.status != lp::LpStatus::kOptimal) {
    throw Error(ErrorCode::kSolver, std::string(what) + " LP ended " +
                                        lp::to_string(sol.status));
  }
  return sol;
}

double sq_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

Scenario combine(const UncertaintySet& u, const std::vector<double>& weights) {
  std::vector<double> c(u.dimension(), 0.0);
  for (std::size_t l = 0; l < u.size(); ++l) {
    if (weights[l] == 0.0) continue;
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += weights[l] * u[l][j];
  }
  for (double& v : c) v = std::max(v, 0.0);
  return Scenario(std::move(c));
}

// Clean tiny negatives and renormalise a convex weight vector.
void tidy_weights(std::vector<double>& w) {
  double sum = 0.0;
  for (double& v : w) {
    if (v < 1e-12) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0) {
    std::fill(w.begin(), w.end(), 0.0);
    w[0] = 1.0;
    return;
  }
  for (double& v : w) v /= sum;
}

std::vector<Scenario> pick(const UncertaintySet& u, std::span<const int> idx) {
  std::vector<Scenario> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(u[static_cast<std::size_t>(i)]);
  return out;
}

Matrix unit_rows(std::size_t n_scen, std::span<const int> idx) {
  Matrix lambda(idx.size(), std::vector<double>(n_scen, 0.0));
  for (std::size_t q = 0; q < idx.size(); ++q) {
    lambda[q][static_cast<std::size_t>(idx[q])] = 1.0;
  }
  return lambda;
}

std::vector<Scenario> cluster_midpoints(const UncertaintySet& u,
                                        const std::vector<std::vector<int>>& clusters) {
  std::vector<Scenario> out;
  for (const auto& members : clusters) {
    std::vector<double> w(u.size(), 0.0);
    for (int i : members) w[static_cast<std::size_t>(i)] = 1.0 / static_cast<double>(members.size());
    out.push_back(combine(u, w));
  }
  return out;
}

}  // namespace

MuStep mu_step(const UncertaintySet& u, std::span<const Scenario> reduced) {
  if (reduced.empty()) throw Error(ErrorCode::kValidation, "reduced set is empty");
  for (const Scenario& c : reduced) {
    if (c.dimension() != u.dimension()) {
      throw Error(ErrorCode::kDimension, "reduced scenario dimension mismatch");
    }
  }
  const std::size_t n_scen = u.size();
  const std::size_t k = reduced.size();
  const std::size_t n = u.dimension();
  double scale = u.max_entry();
  for (const Scenario& c : reduced) scale = std::max(scale, c.max_entry());
  if (scale <= 0.0) scale = 1.0;

  MuStep out;
  out.mu.assign(n_scen, std::vector<double>(k, 0.0));
  out.t_i.assign(n_scen, kInf);
  out.t = kInf;
  for (std::size_t i = 0; i < n_scen; ++i) {
    const Scenario& c = u[i];
    if (c.is_zero()) {
      out.mu[i][0] = 1.0;
      continue;
    }
    if (k == 1) {
      const double s = dominating_scale(c.costs(), reduced[0].costs());
      out.mu[i][0] = 1.0;
      out.t_i[i] = std::isinf(s) ? 0.0 : 1.0 / s;
    } else {
      lp::LpProblem p;
      p.add_variable(1.0);
      for (std::size_t q = 0; q < k; ++q) p.add_variable(0.0);
      for (std::size_t j = 0; j < n; ++j) {
        if (c[j] <= 0.0) continue;
        std::vector<double> row(k + 1);
        row[0] = c[j] / scale;
        for (std::size_t q = 0; q < k; ++q) row[q + 1] = -reduced[q][j] / scale;
        p.add_row(std::move(row), lp::RowSense::kLessEqual, 0.0);
      }
      std::vector<double> ones(k + 1, 1.0);
      ones[0] = 0.0;
      p.add_row(std::move(ones), lp::RowSense::kLessEqual, 1.0);
      const lp::LpSolution sol = solve_or_throw(p, "mu-step");
      std::vector<double> w(sol.x.begin() + 1, sol.x.end());
      tidy_weights(w);
      out.mu[i] = std::move(w);
      out.t_i[i] = std::max(0.0, sol.x[0]);
    }
    out.t = std::min(out.t, out.t_i[i]);
  }
  return out;
}

LambdaStep lambda_step(const UncertaintySet& u, const Matrix& mu, const LambdaBasis* warm) {
  const std::size_t n_scen = u.size();
  const std::size_t n = u.dimension();
  if (mu.size() != n_scen || mu.empty() || mu[0].empty()) {
    throw Error(ErrorCode::kDimension, "mu must be N x K");
  }
  const std::size_t k = mu[0].size();
  const UncertaintySet un = u.normalized();

  std::vector<bool> live(k, false);
  for (std::size_t q = 0; q < k; ++q) {
    double mass = 0.0;
    for (std::size_t i = 0; i < n_scen; ++i) mass += mu[i][q];
    live[q] = mass > 1e-12;
  }

  // Restricted master: columns (cluster, scenario) and rows (scenario, item)
  // are added on demand until neither primal rows nor reduced costs are violated.
  std::vector<std::vector<bool>> has_col(k, std::vector<bool>(n_scen, false));
  std::vector<std::pair<std::size_t, std::size_t>> cols;
  Matrix guess(k, std::vector<double>(n, 0.0));
  for (std::size_t q = 0; q < k; ++q) {
    if (!live[q]) continue;
    double mass = 0.0;
    for (std::size_t l = 0; l < n_scen; ++l) {
      const double top = *std::max_element(mu[l].begin(), mu[l].end());
      if (mu[l][q] > 1e-9 && mu[l][q] >= top - 1e-12) {
        has_col[q][l] = true;
        cols.emplace_back(q, l);
      }
      mass += mu[l][q];
      for (std::size_t j = 0; j < n; ++j) guess[q][j] += mu[l][q] * un[l][j];
    }
    if (mass > 0.0) for (double& v : guess[q]) v /= mass;
  }
  for (std::size_t q = 0; q < k; ++q) {
    if (!live[q]) continue;
    bool any = false;
    std::size_t heaviest = 0;
    for (std::size_t l = 0; l < n_scen; ++l) {
      any = any || has_col[q][l];
      if (mu[l][q] > mu[heaviest][q]) heaviest = l;
    }
    if (!any) {
      has_col[q][heaviest] = true;
      cols.emplace_back(q, heaviest);
    }
  }

  std::vector<std::vector<bool>> has_row(n_scen, std::vector<bool>(n, false));
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  auto cover_of = [&](std::size_t i, std::size_t j, const Matrix& centers) {
    double v = 0.0;
    for (std::size_t q = 0; q < k; ++q) {
      if (live[q]) v += mu[i][q] * centers[q][j];
    }
    return v;
  };
  for (std::size_t i = 0; i < n_scen; ++i) {
    std::size_t best = n;
    double best_ratio = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (un[i][j] <= 0.0) continue;
      const double r = cover_of(i, j, guess) / un[i][j];
      if (best == n || r < best_ratio) {
        best = j;
        best_ratio = r;
      }
    }
    if (best < n) {
      has_row[i][best] = true;
      rows.emplace_back(i, best);
    }
  }

  if (warm) {
    for (const auto& [i, j] : warm->rows) {
      if (i < n_scen && j < n && un[i][j] > 0.0 && !has_row[i][j]) {
        has_row[i][j] = true;
        rows.emplace_back(i, j);
      }
    }
    for (const auto& [q, l] : warm->cols) {
      if (q < k && l < n_scen && live[q] && !has_col[q][l]) {
        has_col[q][l] = true;
        cols.emplace_back(q, l);
      }
    }
  }

  std::vector<double> x;
  std::vector<double> duals;
  Matrix centers(k, std::vector<double>(n, 0.0));
  double t = 0.0;
  const int max_rounds = 500;
  for (int round = 0;; ++round) {
    if (round == max_rounds) {
      // Fall back to the complete model.
      rows.clear();
      cols.clear();
      for (std::size_t i = 0; i < n_scen; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (un[i][j] > 0.0) rows.emplace_back(i, j);
      for (std::size_t q = 0; q < k; ++q)
        if (live[q])
          for (std::size_t l = 0; l < n_scen; ++l) cols.emplace_back(q, l);
    }
    lp::LpProblem p;
    p.add_variable(1.0, 0.0, 1.0);
    for (std::size_t c = 0; c < cols.size(); ++c) p.add_variable(0.0);
    for (const auto& [i, j] : rows) {
      std::vector<double> row(cols.size() + 1, 0.0);
      row[0] = un[i][j];
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto [q, l] = cols[c];
        row[c + 1] = -mu[i][q] * un[l][j];
      }
      p.add_row(std::move(row), lp::RowSense::kLessEqual, 0.0);
    }
    std::vector<std::size_t> eq_row(k, 0);
    for (std::size_t q = 0; q < k; ++q) {
      if (!live[q]) continue;
      std::vector<double> row(cols.size() + 1, 0.0);
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c].first == q) row[c + 1] = 1.0;
      }
      eq_row[q] = p.num_rows();
      p.add_row(std::move(row), lp::RowSense::kLessEqual, 1.0);
    }
    const lp::LpSolution sol = solve_or_throw(p, "lambda-step");
    x = sol.x;
    duals = sol.duals;
    t = std::clamp(x[0], 0.0, 1.0);
    for (auto& c : centers) std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto [q, l] = cols[c];
      if (x[c + 1] == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) centers[q][j] += x[c + 1] * un[l][j];
    }
    if (round >= max_rounds) break;

    const std::size_t lp_rows = rows.size();
    bool added = false;
    for (std::size_t i = 0; i < n_scen; ++i) {
      std::size_t worst = n;
      double worst_v = 1e-9;
      for (std::size_t j = 0; j < n; ++j) {
        if (un[i][j] <= 0.0 || has_row[i][j]) continue;
        const double v = t * un[i][j] - cover_of(i, j, centers);
        if (v > worst_v) {
          worst = j;
          worst_v = v;
        }
      }
      if (worst < n) {
        has_row[i][worst] = true;
        rows.emplace_back(i, worst);
        added = true;
      }
    }
    for (std::size_t q = 0; q < k; ++q) {
      if (!live[q]) continue;
      const double w = sol.duals[eq_row[q]];
      std::vector<std::pair<double, std::size_t>> gains;
      for (std::size_t l = 0; l < n_scen; ++l) {
        if (has_col[q][l]) continue;
        double rc = -w;
        for (std::size_t r = 0; r < lp_rows; ++r) {
          const auto [i, j] = rows[r];
          rc += sol.duals[r] * mu[i][q] * un[l][j];
        }
        if (rc > 1e-9) gains.emplace_back(-rc, l);
      }
      std::sort(gains.begin(), gains.end());
      for (std::size_t g = 0; g < gains.size() && g < 8; ++g) {
        has_col[q][gains[g].second] = true;
        cols.emplace_back(q, gains[g].second);
        added = true;
      }
    }
    if (!added) break;
  }

  LambdaStep out;
  out.t = t;
  for (std::size_t r = 0; r < rows.size() && r < duals.size(); ++r) {
    if (duals[r] > 1e-12) out.active.rows.push_back(rows[r]);
  }
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (x[c + 1] > 1e-12) out.active.cols.push_back(cols[c]);
  }
  out.lambda.assign(k, std::vector<double>(n_scen, 0.0));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto [q, l] = cols[c];
    out.lambda[q][l] += x[c + 1];
  }
  std::vector<std::vector<double>> placed;
  for (std::size_t q = 0; q < k; ++q) {
    if (live[q]) {
      tidy_weights(out.lambda[q]);
      placed.push_back(combine(un, out.lambda[q]).values());
    }
  }
  for (std::size_t q = 0; q < k; ++q) {
    if (live[q]) continue;
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t l = 0; l < n_scen; ++l) {
      double dmin = kInf;
      for (const auto& c : placed) dmin = std::min(dmin, sq_distance(un[l].costs(), c));
      if (dmin > far_d) {
        far = l;
        far_d = dmin;
      }
    }
    out.lambda[q][far] = 1.0;
    placed.push_back(un[far].values());
  }
  for (std::size_t q = 0; q < k; ++q) out.reduced.push_back(combine(u, out.lambda[q]));
  return out;
}

ContRun cont_run(const UncertaintySet& u, std::vector<Scenario> start, int max_iters) {
  ContRun run;
  std::vector<Scenario> current = std::move(start);
  Matrix lambda;
  LambdaBasis basis;
  double t_prev = -kInf;
  for (int it = 0; it < max_iters; ++it) {
    const MuStep ms = mu_step(u, current);
    run.history.push_back(std::min(ms.t, 1.0));
    LambdaStep ls = lambda_step(u, ms.mu, it > 0 ? &basis : nullptr);
    basis = std::move(ls.active);
    run.history.push_back(ls.t);
    current = std::move(ls.reduced);
    lambda = std::move(ls.lambda);
    const bool stalled = ls.t - t_prev < 1e-7 * std::max(std::abs(t_prev), 1e-12);
    t_prev = ls.t;
    if (stalled) break;
  }
  const MuStep final_mu = mu_step(u, current);
  ReductionResult& r = run.result;
  r.method = Method::kCont;
  r.stage = 1;
  r.reduced = std::move(current);
  r.lambda = std::move(lambda);
  r.mu = final_mu.mu;
  r.t = std::clamp(final_mu.t, 0.0, 1.0);
  r.guarantee = guarantee_from_t(r.t);
  r.exact = false;
  run.history.push_back(r.t);
  return run;
}

std::vector<std::vector<int>> balanced_partition(int n_scenarios, int k) {
  std::vector<std::vector<int>> clusters(static_cast<std::size_t>(k));
  for (int i = 0; i < n_scenarios; ++i) clusters[static_cast<std::size_t>(i % k)].push_back(i);
  return clusters;
}

ReductionResult cont(const UncertaintySet& u, int k, const ContOptions& options) {
  check_k(u, k);
  if (options.reps < 1 || options.max_iters < 1) {
    throw Error(ErrorCode::kValidation, "cont needs reps >= 1 and max_iters >= 1");
  }
  const int n_scen = static_cast<int>(u.size());
  std::optional<ReductionResult> best;
  auto consider = [&](std::vector<Scenario> start) {
    ContRun run = cont_run(u, std::move(start), options.max_iters);
    if (!best || run.result.t > best->t) best = std::move(run.result);
  };
  for (int rep = 0; rep < options.reps; ++rep) {
    if (rep == 0) {
      consider(cluster_midpoints(u, balanced_partition(n_scen, k)));
      continue;
    }
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(rep)));
    const std::vector<int> idx = sample_without_replacement(n_scen, k, rng);
    consider(pick(u, idx));
  }
  if (options.initial_subset) {
    const auto& s = *options.initial_subset;
    if (s.size() != static_cast<std::size_t>(k)) {
      throw Error(ErrorCode::kValidation, "initial subset must have K entries");
    }
    for (int i : s) {
      if (i < 0 || i >= n_scen) throw Error(ErrorCode::kValidation, "initial subset index out of range");
    }
    consider(pick(u, s));
  }
  return std::move(*best);
}

ClusterFit fit_cluster(const UncertaintySet& u, std::span<const int> members) {
  const std::size_t n_scen = u.size();
  const UncertaintySet un = u.normalized();
  ClusterFit out;
  out.lambda.assign(n_scen, 0.0);
  if (members.empty()) {
    out.lambda[0] = 1.0;
    out.t = 1.0;
    return out;
  }
  if (members.size() == 1) {
    out.lambda[static_cast<std::size_t>(members[0])] = 1.0;
    out.t = 1.0;
    return out;
  }
  lp::LpProblem p;
  p.add_variable(1.0, 0.0, 1.0);
  for (std::size_t l = 0; l < n_scen; ++l) p.add_variable(0.0);
  for (int i : members) {
    const Scenario& c = un[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < u.dimension(); ++j) {
      if (c[j] <= 0.0) continue;
      std::vector<double> row(n_scen + 1);
      row[0] = c[j];
      for (std::size_t l = 0; l < n_scen; ++l) row[l + 1] = -un[l][j];
      p.add_row(std::move(row), lp::RowSense::kLessEqual, 0.0);
    }
  }
  std::vector<double> ones(n_scen + 1, 1.0);
  ones[0] = 0.0;
  p.add_row(std::move(ones), lp::RowSense::kLessEqual, 1.0);
  const lp::LpSolution sol = solve_or_throw(p, "cluster");
  out.lambda.assign(sol.x.begin() + 1, sol.x.end());
  tidy_weights(out.lambda);
  out.t = std::clamp(sol.x[0], 0.0, 1.0);
  return out;
}

namespace {

// Finishes a one-stage result from its reduced set: mu and t from the
// mu-step, guarantee 1 / t.
void finish_with_mu_step(const UncertaintySet& u, ReductionResult& r) {
  const MuStep ms = mu_step(u, r.reduced);
  r.mu = ms.mu;
  r.t = std::clamp(ms.t, 0.0, 1.0);
  r.guarantee = guarantee_from_t(r.t);
}

struct PartitionPoint {
  std::vector<int> assign;
  std::vector<ClusterFit> fits;
  double t = 0.0;
};

PartitionPoint evaluate_partition(const UncertaintySet& u, int k, std::vector<int> assign) {
  PartitionPoint pp;
  pp.assign = std::move(assign);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < pp.assign.size(); ++i) {
    members[static_cast<std::size_t>(pp.assign[i])].push_back(static_cast<int>(i));
  }
  pp.t = 1.0;
  for (int q = 0; q < k; ++q) {
    pp.fits.push_back(fit_cluster(u, members[static_cast<std::size_t>(q)]));
    if (!members[static_cast<std::size_t>(q)].empty()) pp.t = std::min(pp.t, pp.fits.back().t);
  }
  return pp;
}

// Relabel clusters by first appearance so that label(i) <= i.
std::vector<int> canonical_labels(const std::vector<int>& assign) {
  std::vector<int> map(assign.size(), -1);
  std::vector<int> out(assign.size());
  int next = 0;
  for (std::size_t i = 0; i < assign.size(); ++i) {
    int& m = map[static_cast<std::size_t>(assign[i])];
    if (m < 0) m = next++;
    out[i] = m;
  }
  return out;
}

}  // namespace

ReductionResult ip_mu(const UncertaintySet& u, int k, const MilpReduceOptions& options) {
  check_k(u, k);
  const std::size_t n_scen = u.size();
  const std::size_t n = u.dimension();
  const std::size_t kk = static_cast<std::size_t>(k);
  const UncertaintySet un = u.normalized();
  const double big_m = std::max(un.max_entry(), 1e-12);

  // Variable layout: t, mu_ik (k <= i), lambda_kl.
  milp::MilpProblem mp;
  lp::LpProblem& p = mp.lp;
  p.add_variable(1.0, 0.0, 1.0);
  std::vector<std::vector<long>> mu_var(n_scen, std::vector<long>(kk, -1));
  for (std::size_t i = 0; i < n_scen; ++i) {
    for (std::size_t q = 0; q < kk && q <= i; ++q) {
      mu_var[i][q] = static_cast<long>(p.add_variable(0.0, 0.0, 1.0));
      mp.binaries.push_back(static_cast<std::size_t>(mu_var[i][q]));
    }
  }
  std::vector<std::vector<std::size_t>> lam_var(kk, std::vector<std::size_t>(n_scen));
  for (std::size_t q = 0; q < kk; ++q)
    for (std::size_t l = 0; l < n_scen; ++l) lam_var[q][l] = p.add_variable(0.0);
  const std::size_t nv = p.num_vars();

  for (std::size_t i = 0; i < n_scen; ++i) {
    std::vector<double> row(nv, 0.0);
    for (std::size_t q = 0; q < kk; ++q)
      if (mu_var[i][q] >= 0) row[static_cast<std::size_t>(mu_var[i][q])] = 1.0;
    p.add_row(std::move(row), lp::RowSense::kEqual, 1.0);
  }
  for (std::size_t q = 0; q < kk; ++q) {
    std::vector<double> row(nv, 0.0);
    for (std::size_t l = 0; l < n_scen; ++l) row[lam_var[q][l]] = 1.0;
    p.add_row(std::move(row), lp::RowSense::kEqual, 1.0);
  }
  for (std::size_t i = 0; i < n_scen; ++i) {
    for (std::size_t q = 0; q < kk; ++q) {
      if (mu_var[i][q] < 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (un[i][j] <= 0.0) continue;
        std::vector<double> row(nv, 0.0);
        row[0] = un[i][j];
        for (std::size_t l = 0; l < n_scen; ++l) row[lam_var[q][l]] = -un[l][j];
        row[static_cast<std::size_t>(mu_var[i][q])] = big_m;
        p.add_row(std::move(row), lp::RowSense::kLessEqual, big_m);
      }
    }
  }

  auto to_vector = [&](const PartitionPoint& pp) {
    std::vector<double> x(nv, 0.0);
    x[0] = std::max(0.0, pp.t - 1e-9);
    for (std::size_t i = 0; i < n_scen; ++i) {
      x[static_cast<std::size_t>(mu_var[i][static_cast<std::size_t>(pp.assign[i])])] = 1.0;
    }
    for (std::size_t q = 0; q < kk; ++q)
      for (std::size_t l = 0; l < n_scen; ++l) x[lam_var[q][l]] = pp.fits[q].lambda[l];
    return x;
  };

  std::vector<int> balanced(n_scen);
  for (std::size_t i = 0; i < n_scen; ++i) balanced[i] = static_cast<int>(i % kk);
  PartitionPoint seed = evaluate_partition(u, k, balanced);
  const KMeansFit km = kmeans_clusters(u, k, 50, 0x5eedULL);
  PartitionPoint km_point = evaluate_partition(u, k, canonical_labels(km.assignment));
  if (km_point.t > seed.t) seed = std::move(km_point);

  milp::MilpOptions mo;
  mo.time_limit = options.time_limit;
  mo.max_nodes = options.max_nodes;
  mo.initial_solution = to_vector(seed);
  mo.heuristic = [&](const std::vector<double>& x) -> std::optional<std::vector<double>> {
    std::vector<int> assign(n_scen, 0);
    for (std::size_t i = 0; i < n_scen; ++i) {
      double best = -1.0;
      for (std::size_t q = 0; q < kk; ++q) {
        if (mu_var[i][q] < 0) continue;
        const double v = x[static_cast<std::size_t>(mu_var[i][q])];
        if (v > best + 1e-12) {
          best = v;
          assign[i] = static_cast<int>(q);
        }
      }
    }
    return to_vector(evaluate_partition(u, k, assign));
  };
  const milp::MilpSolution sol = milp::solve_milp(mp, mo);
  if (!sol.has_incumbent()) {
    throw Error(sol.status == milp::MilpStatus::kLimitNoIncumbent ? ErrorCode::kTimeLimit
                                                                  : ErrorCode::kSolver,
                std::string("IP-mu ended ") + milp::to_string(sol.status));
  }

  ReductionResult r;
  r.method = Method::kIpMu;
  r.stage = 1;
  r.lambda.assign(kk, std::vector<double>(n_scen, 0.0));
  for (std::size_t q = 0; q < kk; ++q) {
    for (std::size_t l = 0; l < n_scen; ++l) r.lambda[q][l] = sol.x[lam_var[q][l]];
    tidy_weights(r.lambda[q]);
    r.reduced.push_back(combine(u, r.lambda[q]));
  }
  finish_with_mu_step(u, r);
  r.exact = sol.status == milp::MilpStatus::kOptimal;
  r.gap = sol.gap;
  return r;
}

double subset_t(const UncertaintySet& u, std::span<const int> subset) {
  const std::vector<Scenario> s = pick(u, subset);
  return std::clamp(mu_step(u, s).t, 0.0, 1.0);
}

namespace {

// Lexicographic score (worst t, sum of capped t_i) of a subset.
std::pair<double, double> subset_score(const UncertaintySet& u, std::span<const int> subset) {
  const MuStep ms = mu_step(u, pick(u, subset));
  double sum = 0.0;
  for (double v : ms.t_i) sum += std::min(v, 1.0);
  return {std::min(ms.t, 1.0), sum};
}

std::vector<int> greedy_swap_subset(const UncertaintySet& u, int k) {
  const int n_scen = static_cast<int>(u.size());
  std::vector<int> chosen;
  std::vector<bool> in(static_cast<std::size_t>(n_scen), false);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    std::pair<double, double> best_score{-1.0, -1.0};
    for (int l = 0; l < n_scen; ++l) {
      if (in[static_cast<std::size_t>(l)]) continue;
      chosen.push_back(l);
      const auto s = subset_score(u, chosen);
      chosen.pop_back();
      if (s > best_score) {
        best_score = s;
        best = l;
      }
    }
    chosen.push_back(best);
    in[static_cast<std::size_t>(best)] = true;
  }
  auto score = subset_score(u, chosen);
  for (int pass = 0; pass < 50; ++pass) {
    bool improved = false;
    for (std::size_t q = 0; q < chosen.size() && !improved; ++q) {
      for (int l = 0; l < n_scen && !improved; ++l) {
        if (in[static_cast<std::size_t>(l)]) continue;
        const int old = chosen[q];
        chosen[q] = l;
        const auto s = subset_score(u, chosen);
        if (s.first > score.first + 1e-12 ||
            (s.first >= score.first - 1e-12 && s.second > score.second + 1e-9)) {
          score = s;
          in[static_cast<std::size_t>(old)] = false;
          in[static_cast<std::size_t>(l)] = true;
          improved = true;
        } else {
          chosen[q] = old;
        }
      }
    }
    if (!improved) break;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

ReductionResult subset_result(const UncertaintySet& u, std::vector<int> subset, Method m) {
  std::sort(subset.begin(), subset.end());
  ReductionResult r;
  r.method = m;
  r.stage = 1;
  r.reduced = pick(u, subset);
  r.lambda = unit_rows(u.size(), subset);
  finish_with_mu_step(u, r);
  return r;
}

}  // namespace

ReductionResult ip_lambda(const UncertaintySet& u, int k, const MilpReduceOptions& options) {
  check_k(u, k);
  const std::size_t n_scen = u.size();
  const std::size_t n = u.dimension();
  if (static_cast<int>(n_scen) > options.exact_max_scenarios) {
    ReductionResult r = subset_result(u, greedy_swap_subset(u, k), Method::kIpLambda);
    r.exact = false;
    r.gap = kInf;
    return r;
  }
  const UncertaintySet un = u.normalized();

  // Layout: t, lambda_l, mu_il.
  milp::MilpProblem mp;
  lp::LpProblem& p = mp.lp;
  p.add_variable(1.0, 0.0, 1.0);
  std::vector<std::size_t> lam(n_scen);
  for (std::size_t l = 0; l < n_scen; ++l) {
    lam[l] = p.add_variable(0.0, 0.0, 1.0);
    mp.binaries.push_back(lam[l]);
  }
  auto mu_of = [&](std::size_t i, std::size_t l) { return 1 + n_scen + i * n_scen + l; };
  for (std::size_t i = 0; i < n_scen * n_scen; ++i) p.add_variable(0.0);
  const std::size_t nv = p.num_vars();

  for (std::size_t i = 0; i < n_scen; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (un[i][j] <= 0.0) continue;
      std::vector<double> row(nv, 0.0);
      row[0] = un[i][j];
      for (std::size_t l = 0; l < n_scen; ++l) row[mu_of(i, l)] = -un[l][j];
      p.add_row(std::move(row), lp::RowSense::kLessEqual, 0.0);
    }
  }
  for (std::size_t i = 0; i < n_scen; ++i) {
    for (std::size_t l = 0; l < n_scen; ++l) {
      std::vector<double> row(nv, 0.0);
      row[mu_of(i, l)] = 1.0;
      row[lam[l]] = -1.0;
      p.add_row(std::move(row), lp::RowSense::kLessEqual, 0.0);
    }
  }
  {
    std::vector<double> row(nv, 0.0);
    for (std::size_t l = 0; l < n_scen; ++l) row[lam[l]] = 1.0;
    p.add_row(std::move(row), lp::RowSense::kEqual, static_cast<double>(k));
  }
  for (std::size_t i = 0; i < n_scen; ++i) {
    std::vector<double> row(nv, 0.0);
    for (std::size_t l = 0; l < n_scen; ++l) row[mu_of(i, l)] = 1.0;
    p.add_row(std::move(row), lp::RowSense::kEqual, 1.0);
  }

  auto to_vector = [&](const std::vector<int>& subset) {
    std::vector<double> x(nv, 0.0);
    const MuStep ms = mu_step(un, pick(un, subset));
    x[0] = std::max(0.0, std::min(ms.t, 1.0) - 1e-9);
    for (std::size_t q = 0; q < subset.size(); ++q) {
      const std::size_t l = static_cast<std::size_t>(subset[q]);
      x[lam[l]] = 1.0;
      for (std::size_t i = 0; i < n_scen; ++i) x[mu_of(i, l)] = ms.mu[i][q];
    }
    return x;
  };

  milp::MilpOptions mo;
  mo.time_limit = options.time_limit;
  mo.max_nodes = options.max_nodes;
  mo.initial_solution = to_vector(greedy_swap_subset(u, k));
  mo.heuristic = [&](const std::vector<double>& x) -> std::optional<std::vector<double>> {
    std::vector<int> order(n_scen);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return x[lam[static_cast<std::size_t>(a)]] > x[lam[static_cast<std::size_t>(b)]];
    });
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    return to_vector(order);
  };
  const milp::MilpSolution sol = milp::solve_milp(mp, mo);
  if (!sol.has_incumbent()) {
    throw Error(sol.status == milp::MilpStatus::kLimitNoIncumbent ? ErrorCode::kTimeLimit
                                                                  : ErrorCode::kSolver,
                std::string("IP-lambda ended ") + milp::to_string(sol.status));
  }
  std::vector<int> subset;
  for (std::size_t l = 0; l < n_scen; ++l) {
    if (sol.x[lam[l]] > 0.5) subset.push_back(static_cast<int>(l));
  }
  ReductionResult r = subset_result(u, subset, Method::kIpLambda);
  r.exact = sol.status == milp::MilpStatus::kOptimal;
  r.gap = sol.gap;
  return r;
}

double brute_subset_oracle(const UncertaintySet& u, int k) {
  check_k(u, k);
  const int n_scen = static_cast<int>(u.size());
  double count = 1.0;
  for (int q = 0; q < k; ++q) count = count * (n_scen - q) / (q + 1);
  if (count > 1e5 + 0.5) {
    throw Error(ErrorCode::kSizeGuard, "C(N, K) exceeds 1e5 subsets");
  }
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  double best = 0.0;
  while (true) {
    best = std::max(best, subset_t(u, idx));
    int q = k - 1;
    while (q >= 0 && idx[static_cast<std::size_t>(q)] == n_scen - k + q) --q;
    if (q < 0) break;
    ++idx[static_cast<std::size_t>(q)];
    for (int r = q + 1; r < k; ++r) idx[static_cast<std::size_t>(r)] = idx[static_cast<std::size_t>(r - 1)] + 1;
  }
  return best;
}

KMeansFit kmeans_clusters(const UncertaintySet& u, int k, int reps, std::uint64_t seed) {
  check_k(u, k);
  if (reps < 1) throw Error(ErrorCode::kValidation, "kmeans needs reps >= 1");
  const std::size_t n_scen = u.size();
  const std::size_t n = u.dimension();
  const std::size_t kk = static_cast<std::size_t>(k);
  KMeansFit best;
  best.distortion = kInf;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
    const std::vector<int> init = sample_without_replacement(static_cast<int>(n_scen), k, rng);
    Matrix centers;
    for (int i : init) centers.push_back(u[static_cast<std::size_t>(i)].values());
    std::vector<int> assign(n_scen, -1);
    for (int iter = 0; iter < 500; ++iter) {
      std::vector<int> next(n_scen, 0);
      for (std::size_t i = 0; i < n_scen; ++i) {
        double dbest = kInf;
        for (std::size_t q = 0; q < kk; ++q) {
          const double d = sq_distance(u[i].costs(), centers[q]);
          if (d < dbest) {
            dbest = d;
            next[i] = static_cast<int>(q);
          }
        }
      }
      std::vector<int> size(kk, 0);
      for (int a : next) ++size[static_cast<std::size_t>(a)];
      for (std::size_t q = 0; q < kk; ++q) {
        if (size[q] > 0) continue;
        std::size_t far = n_scen;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n_scen; ++i) {
          const std::size_t a = static_cast<std::size_t>(next[i]);
          if (size[a] <= 1) continue;
          const double d = sq_distance(u[i].costs(), centers[a]);
          if (d > far_d) {
            far = i;
            far_d = d;
          }
        }
        if (far == n_scen) continue;
        --size[static_cast<std::size_t>(next[far])];
        next[far] = static_cast<int>(q);
        size[q] = 1;
      }
      for (auto& c : centers) std::fill(c.begin(), c.end(), 0.0);
      for (std::size_t i = 0; i < n_scen; ++i) {
        auto& c = centers[static_cast<std::size_t>(next[i])];
        for (std::size_t j = 0; j < n; ++j) c[j] += u[i][j];
      }
      for (std::size_t q = 0; q < kk; ++q) {
        for (double& v : centers[q]) v /= static_cast<double>(size[q]);
      }
      const bool stable = next == assign;
      assign = std::move(next);
      if (stable) break;
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < n_scen; ++i) {
      dist += sq_distance(u[i].costs(), centers[static_cast<std::size_t>(assign[i])]);
    }
    if (dist < best.distortion) {
      best.distortion = dist;
      best.assignment = assign;
    }
  }
  return best;
}

void certify_one_stage(const UncertaintySet& u, ReductionResult& r) {
  const CoverFactor a = alpha_one_stage(u, r.reduced);
  r.t = std::isinf(a.factor) ? 0.0 : (a.factor <= 1.0 ? 1.0 : 1.0 / a.factor);
  r.guarantee = guarantee_from_t(r.t);
}

ReductionResult kmeans(const UncertaintySet& u, int k, int reps, std::uint64_t seed) {
  const KMeansFit fit = kmeans_clusters(u, k, reps, seed);
  const std::size_t n_scen = u.size();
  const std::size_t kk = static_cast<std::size_t>(k);
  ReductionResult r;
  r.method = Method::kKMeans;
  r.stage = 1;
  r.exact = false;
  std::vector<int> size(kk, 0);
  for (int a : fit.assignment) ++size[static_cast<std::size_t>(a)];
  r.lambda.assign(kk, std::vector<double>(n_scen, 0.0));
  r.mu.assign(n_scen, std::vector<double>(kk, 0.0));
  for (std::size_t i = 0; i < n_scen; ++i) {
    const std::size_t a = static_cast<std::size_t>(fit.assignment[i]);
    r.lambda[a][i] = 1.0 / static_cast<double>(size[a]);
    r.mu[i][a] = 1.0;
  }
  for (std::size_t q = 0; q < kk; ++q) r.reduced.push_back(combine(u, r.lambda[q]));
  certify_one_stage(u, r);
  return r;
}

Scenario midpoint(const UncertaintySet& u) {
  return combine(u, std::vector<double>(u.size(), 1.0 / static_cast<double>(u.size())));
}

ReductionResult midpoint_reduction(const UncertaintySet& u) {
  ReductionResult r;
  r.method = Method::kMidpoint;
  r.stage = 1;
  r.exact = false;
  r.reduced = {midpoint(u)};
  r.lambda = {std::vector<double>(u.size(), 1.0 / static_cast<double>(u.size()))};
  r.mu.assign(u.size(), std::vector<double>{1.0});
  certify_one_stage(u, r);
  return r;
}

}  // namespace scenred
