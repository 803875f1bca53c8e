#include "scenred/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "scenred/random.hpp"
#include "scenred/reduce_one_stage.hpp"
#include "scenred/reduce_two_stage.hpp"
#include "scenred/robust.hpp"

namespace scenred {

namespace {

void check_size(int n, int n_scenarios) {
  if (n < 1 || n_scenarios < 1) {
    throw Error(ErrorCode::kValidation, "generators need n >= 1 and N >= 1");
  }
}

Matrix uniform_rows(int n, int n_scenarios, int lo, int hi, Rng& rng) {
  std::uniform_int_distribution<int> dist(lo, hi);
  Matrix rows(static_cast<std::size_t>(n_scenarios), std::vector<double>(static_cast<std::size_t>(n)));
  for (auto& row : rows)
    for (double& v : row) v = dist(rng);
  return rows;
}

// Runs fn(0..count-1) on `jobs` threads; the first exception is rethrown.
template <typename Fn>
void run_indexed(int count, int jobs, Fn fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(jobs, count); ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

UncertaintySet gen_uniform(int n, int n_scenarios, int lo, int hi, std::uint64_t seed) {
  check_size(n, n_scenarios);
  if (lo > hi) throw Error(ErrorCode::kValidation, "gen_uniform needs lo <= hi");
  if (lo < 0) throw Error(ErrorCode::kNegativity, "gen_uniform needs lo >= 0");
  Rng rng(seed);
  return UncertaintySet::from_rows(uniform_rows(n, n_scenarios, lo, hi, rng));
}

UncertaintySet gen_u2(int n, int n_scenarios, std::uint64_t seed, double prob) {
  check_size(n, n_scenarios);
  Rng rng(seed);
  Matrix rows = uniform_rows(n, n_scenarios, 1, 100, rng);
  std::bernoulli_distribution doubled(std::clamp(prob, 0.0, 1.0));
  for (auto& row : rows) {
    if (!doubled(rng)) continue;
    for (double& v : row) v *= 2.0;
  }
  return UncertaintySet::from_rows(rows);
}

UncertaintySet gen_u3(int n, int n_scenarios, std::uint64_t seed, int dev_hi) {
  check_size(n, n_scenarios);
  if (n < 3) throw Error(ErrorCode::kValidation, "gen_u3 needs n >= 3");
  if (dev_hi < 0) throw Error(ErrorCode::kNegativity, "deviations must be non-negative");
  Rng rng(seed);
  std::uniform_int_distribution<int> cost(1, 100);
  std::uniform_int_distribution<int> dev(std::min(1, dev_hi), dev_hi);
  std::vector<double> nominal(static_cast<std::size_t>(n));
  std::vector<double> deviation(static_cast<std::size_t>(n));
  for (double& v : nominal) v = cost(rng);
  for (double& v : deviation) v = dev(rng);
  Matrix rows;
  for (int i = 0; i < n_scenarios; ++i) {
    std::vector<double> row = nominal;
    for (int j : sample_without_replacement(n, 3, rng)) {
      row[static_cast<std::size_t>(j)] += deviation[static_cast<std::size_t>(j)];
    }
    rows.push_back(std::move(row));
  }
  return UncertaintySet::from_rows(rows);
}

UncertaintySet gen_u4(int n, int n_scenarios, std::uint64_t seed, double scale_lo,
                      double scale_hi) {
  check_size(n, n_scenarios);
  if (!(scale_lo > 0.0) || scale_hi < scale_lo) {
    throw Error(ErrorCode::kValidation, "gen_u4 needs 0 < scale_lo <= scale_hi");
  }
  Rng rng(seed);
  Matrix rows = uniform_rows(n, n_scenarios, 1, 100, rng);
  std::uniform_real_distribution<double> scale(scale_lo, scale_hi);
  for (auto& row : rows) {
    double norm = 0.0;
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
    const double s = scale_lo == scale_hi ? scale_lo : scale(rng);
    for (double& v : row) v = v / norm * s;
  }
  return UncertaintySet::from_rows(rows);
}

UncertaintySet gen_truncnormal(int n, int n_scenarios, std::uint64_t seed, double mean,
                               double stddev) {
  check_size(n, n_scenarios);
  if (!(stddev > 0.0)) throw Error(ErrorCode::kValidation, "stddev must be positive");
  if (mean + 50.0 * stddev < 1.0 || mean - 50.0 * stddev > 100.0) {
    throw Error(ErrorCode::kValidation, "truncation interval [1, 100] is unreachable");
  }
  Rng rng(seed);
  std::normal_distribution<double> dist(mean, stddev);
  Matrix rows(static_cast<std::size_t>(n_scenarios), std::vector<double>(static_cast<std::size_t>(n)));
  for (auto& row : rows) {
    for (double& v : row) {
      do {
        v = dist(rng);
      } while (v < 1.0 || v > 100.0);
    }
  }
  return UncertaintySet::from_rows(rows);
}

Edges gen_graph(int n, std::uint64_t seed, double degree) {
  if (n < 2) throw Error(ErrorCode::kValidation, "gen_graph needs n >= 2");
  Rng rng(seed);
  std::bernoulli_distribution edge(std::min(1.0, degree / n));
  Edges out;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (edge(rng)) out.emplace_back(a, b);
  return out;
}

UncertaintySet hardness_instance(int n, const Edges& edges) {
  RobustInstance g;
  g.kind = ProblemKind::kVertexCover;
  g.n = n;
  g.edges = edges;
  g.validate();
  const auto nbh = g.closed_neighborhoods();
  Matrix rows;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(static_cast<std::size_t>(n), 0.0);
    row[static_cast<std::size_t>(i)] = 16.0;
    rows.push_back(std::move(row));
  }
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(static_cast<std::size_t>(n), 9.0);
    for (int v : nbh[static_cast<std::size_t>(i)]) row[static_cast<std::size_t>(v)] = 12.0;
    rows.push_back(std::move(row));
  }
  return UncertaintySet::from_rows(rows);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw Error(ErrorCode::kValidation, "pearson needs two equal-length samples of size >= 2");
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw Error(ErrorCode::kValidation, "correlation undefined for a constant sample");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string to_string(Family f) {
  switch (f) {
    case Family::kU1: return "U1";
    case Family::kU2: return "U2";
    case Family::kU3: return "U3";
    case Family::kU4: return "U4";
  }
  return "?";
}

UncertaintySet gen_family(Family f, int n, int n_scenarios, std::uint64_t seed) {
  switch (f) {
    case Family::kU1: return gen_uniform(n, n_scenarios, 1, 100, seed);
    case Family::kU2: return gen_u2(n, n_scenarios, seed);
    case Family::kU3: return gen_u3(n, n_scenarios, seed);
    case Family::kU4: return gen_u4(n, n_scenarios, seed);
  }
  throw Error(ErrorCode::kValidation, "unknown family");
}

void Experiment1Config::validate() const {
  if (n < 1 || n_scenarios < 1 || sets < 1 || points < 2 || cont_reps < 1 || cont_iters < 1 ||
      kmeans_reps < 1 || jobs < 1 || families.empty()) {
    throw Error(ErrorCode::kValidation, "experiment 1 needs positive counts");
  }
  if (k < 1 || k > n_scenarios) throw Error(ErrorCode::kValidation, "experiment 1 needs 1 <= K <= N");
}

Experiment1Report experiment1(const Experiment1Config& cfg) {
  cfg.validate();
  Experiment1Report report;
  const int sets = cfg.sets;
  for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
    const Family fam = cfg.families[fi];
    std::vector<std::vector<Experiment1Point>> per_set(static_cast<std::size_t>(sets));
    run_indexed(sets, cfg.jobs, [&](int s) {
      const std::uint64_t seed = instance_seed(cfg.seed, static_cast<int>(fi) * sets + s);
      const UncertaintySet u = gen_family(fam, cfg.n, cfg.n_scenarios, seed);
      ContOptions co;
      co.reps = cfg.cont_reps;
      co.max_iters = cfg.cont_iters;
      co.seed = derive_seed(seed, 1);
      const ReductionResult rc = cont(u, cfg.k, co);
      const ReductionResult rk = kmeans(u, cfg.k, cfg.kmeans_reps, derive_seed(seed, 2));
      Rng rng(derive_seed(seed, 3));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      auto worst = [](const std::vector<Scenario>& set, const std::vector<double>& x) {
        double v = 0.0;
        for (const Scenario& c : set) {
          double s = 0.0;
          for (std::size_t j = 0; j < x.size(); ++j) s += c[j] * x[j];
          v = std::max(v, s);
        }
        return v;
      };
      auto& out = per_set[static_cast<std::size_t>(s)];
      for (int pt = 0; pt < cfg.points; ++pt) {
        std::vector<double> x(static_cast<std::size_t>(cfg.n));
        for (double& v : x) v = unit(rng);
        out.push_back({fam, s, pt, worst(u.scenarios(), x), worst(rc.reduced, x),
                       worst(rk.reduced, x)});
      }
    });
    std::vector<double> full, vc, vk;
    for (const auto& set : per_set) {
      for (const auto& p : set) {
        report.points.push_back(p);
        full.push_back(p.full_value);
        vc.push_back(p.cont_value);
        vk.push_back(p.km_value);
      }
    }
    report.summary.push_back({fam, pearson(full, vc), pearson(full, vk)});
  }
  return report;
}

std::string experiment1_raw_csv(const Experiment1Report& r) {
  std::ostringstream os;
  os << "family,set_id,point_id,full_value,cont_value,km_value\n";
  for (const auto& p : r.points) {
    os << to_string(p.family) << ',' << p.set_id << ',' << p.point_id << ','
       << csv_number(p.full_value) << ',' << csv_number(p.cont_value) << ','
       << csv_number(p.km_value) << '\n';
  }
  return os.str();
}

std::string experiment1_summary_csv(const Experiment1Report& r) {
  std::ostringstream os;
  os << "family,method,rho\n";
  for (const auto& s : r.summary) {
    os << to_string(s.family) << ",cont," << csv_number(s.rho_cont) << '\n';
    os << to_string(s.family) << ",kmeans," << csv_number(s.rho_km) << '\n';
  }
  return os.str();
}

std::string experiment1_metadata(const Experiment1Config& cfg) {
  nlohmann::json doc;
  doc["experiment"] = 1;
  doc["n"] = cfg.n;
  doc["N"] = cfg.n_scenarios;
  doc["K"] = cfg.k;
  doc["sets"] = cfg.sets;
  doc["points"] = cfg.points;
  doc["cont_reps"] = cfg.cont_reps;
  doc["cont_iters"] = cfg.cont_iters;
  doc["kmeans_reps"] = cfg.kmeans_reps;
  doc["seed"] = cfg.seed;
  doc["jobs"] = cfg.jobs;
  std::vector<std::string> fams;
  for (Family f : cfg.families) fams.push_back(to_string(f));
  doc["families"] = fams;
  doc["seed_derivation"] =
      "set s of the f-th listed family uses seed + f * sets + s; within a set, splitmix64 "
      "streams 1, 2, 3 of that seed drive cont, kmeans and the sampled x points";
  doc["generators"] = {
      {"U1", "uniform integers 1..100"},
      {"U2", "U1, then each scenario doubled with probability 0.05"},
      {"U3", "nominal + deviation (both uniform 1..100) on 3 random items per scenario"},
      {"U4", "U1 normalised to unit 2-norm, scaled by uniform [9000, 11000]"}};
  doc["x_points"] = "uniform [0, 1]^n";
  return doc.dump(2) + "\n";
}

void Experiment2Config::validate() const {
  if (n < 1 || n_scenarios < 1 || instances < 1 || cont_reps < 1 || cont_iters < 1 ||
      kmeans_reps < 1 || jobs < 1 || time_limit <= 0.0) {
    throw Error(ErrorCode::kValidation, "experiment 2 needs positive counts");
  }
  if (stages != 1 && stages != 2) throw Error(ErrorCode::kValidation, "stages must be 1 or 2");
  if (k_min < 1 || k_max < k_min) throw Error(ErrorCode::kValidation, "invalid K range");
  if (problem == ProblemKind::kSelection && n < 2) {
    throw Error(ErrorCode::kValidation, "selection needs n >= 2 (p = n / 2)");
  }
  if (problem == ProblemKind::kVertexCover && n < 2) {
    throw Error(ErrorCode::kValidation, "vertex cover needs n >= 2");
  }
  for (Method m : method_list()) {
    const bool two = m == Method::kIp2 || m == Method::kGreedy2;
    if (m == Method::kMidpoint) continue;
    if (m == Method::kKMeans) continue;
    if (two != (stages == 2)) {
      throw Error(ErrorCode::kValidation, "method " + to_string(m) + " does not match stage");
    }
  }
}

std::vector<Method> Experiment2Config::method_list() const {
  if (!methods.empty()) return methods;
  if (stages == 1) return {Method::kIpMu, Method::kIpLambda, Method::kCont, Method::kKMeans};
  return {Method::kIp2, Method::kKMeans};
}

double Experiment2Report::mean_ratio(Method method, int k) const {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : records) {
    if (r.method == method && r.k == k) {
      sum += r.ratio;
      ++count;
    }
  }
  return count ? sum / count : std::nan("");
}

Experiment2Report experiment2(const Experiment2Config& cfg) {
  cfg.validate();
  const std::vector<Method> methods = cfg.method_list();
  const int k_hi = std::min(cfg.k_max, cfg.n_scenarios);
  std::vector<std::vector<Experiment2Record>> per_instance(static_cast<std::size_t>(cfg.instances));
  run_indexed(cfg.instances, cfg.jobs, [&](int id) {
    const std::uint64_t seed = instance_seed(cfg.seed, id);
    const UncertaintySet u = gen_uniform(cfg.n, cfg.n_scenarios, 1, 100, seed);
    RobustInstance inst;
    inst.kind = cfg.problem;
    inst.stages = cfg.stages;
    inst.n = cfg.n;
    inst.p = cfg.problem == ProblemKind::kSelection ? cfg.n / 2 : 0;
    if (cfg.problem == ProblemKind::kVertexCover) inst.edges = gen_graph(cfg.n, derive_seed(seed, 1));
    if (cfg.stages == 2) {
      Rng rng(derive_seed(seed, 2));
      std::uniform_int_distribution<int> cost(1, 100);
      for (int j = 0; j < cfg.n; ++j) inst.first_stage_costs.push_back(cost(rng));
    }
    RobustOptions ro;
    ro.time_limit = cfg.time_limit;
    const RobustSolution full = solve_robust(inst, u, ro);

    auto& out = per_instance[static_cast<std::size_t>(id)];
    for (Method m : methods) {
      for (int k = cfg.k_min; k <= k_hi; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        ReductionResult red;
        MilpReduceOptions mo;
        mo.time_limit = cfg.time_limit;
        mo.max_nodes = cfg.reduce_max_nodes;
        switch (m) {
          case Method::kCont: {
            ContOptions co;
            co.reps = cfg.cont_reps;
            co.max_iters = cfg.cont_iters;
            co.seed = derive_seed(seed, 3);
            red = cont(u, k, co);
            break;
          }
          case Method::kIpMu: red = ip_mu(u, k, mo); break;
          case Method::kIpLambda: red = ip_lambda(u, k, mo); break;
          case Method::kKMeans: red = kmeans(u, k, cfg.kmeans_reps, derive_seed(seed, 4)); break;
          case Method::kMidpoint: red = midpoint_reduction(u); break;
          case Method::kIp2: {
            TwoStageOptions to;
            to.time_limit = cfg.time_limit;
            red = ip_two_stage(u, k, to);
            break;
          }
          case Method::kGreedy2: red = greedy_two_stage(u, k); break;
        }
        const double reduce_seconds = seconds_since(t0);
        const auto t1 = std::chrono::steady_clock::now();
        const RobustSolution sol = solve_robust(inst, UncertaintySet(red.reduced), ro);
        const double solve_seconds = seconds_since(t1);
        const double value = evaluate_robust(inst, sol.x, u);
        double ratio = 1.0;
        if (full.value > 0.0) {
          ratio = value / full.value;
        } else if (value > 0.0) {
          ratio = kInf;
        }
        const double guarantee = red.stage == cfg.stages ? red.guarantee : kInf;
        out.push_back({id, m, k, ratio, guarantee, reduce_seconds, solve_seconds,
                       full.exact && sol.exact});
      }
    }
  });
  Experiment2Report report;
  report.config = cfg;
  for (auto& v : per_instance)
    for (auto& r : v) report.records.push_back(r);
  return report;
}

std::string experiment2_csv(const Experiment2Report& r) {
  std::ostringstream os;
  os << "problem,stages,n,N,instance_id,method,K,ratio,reduce_seconds,solve_seconds,exact\n";
  const auto& c = r.config;
  for (const auto& rec : r.records) {
    os << to_string(c.problem) << ',' << c.stages << ',' << c.n << ',' << c.n_scenarios << ','
       << rec.instance_id << ',' << to_string(rec.method) << ',' << rec.k << ','
       << csv_number(rec.ratio) << ',' << csv_number(rec.reduce_seconds) << ','
       << csv_number(rec.solve_seconds) << ',' << (rec.exact ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string experiment2_metadata(const Experiment2Config& cfg) {
  nlohmann::json doc;
  doc["experiment"] = 2;
  doc["problem"] = to_string(cfg.problem);
  doc["stages"] = cfg.stages;
  doc["n"] = cfg.n;
  doc["N"] = cfg.n_scenarios;
  doc["instances"] = cfg.instances;
  doc["k_min"] = cfg.k_min;
  doc["k_max"] = cfg.k_max;
  std::vector<std::string> ms;
  for (Method m : cfg.method_list()) ms.push_back(to_string(m));
  doc["methods"] = ms;
  doc["cont_reps"] = cfg.cont_reps;
  doc["cont_iters"] = cfg.cont_iters;
  doc["kmeans_reps"] = cfg.kmeans_reps;
  doc["time_limit"] = cfg.time_limit;
  doc["reduce_max_nodes"] = cfg.reduce_max_nodes;
  doc["seed"] = cfg.seed;
  doc["jobs"] = cfg.jobs;
  doc["seed_derivation"] =
      "instance k uses seed + k for its scenarios; splitmix64 streams of that seed: 1 graph, "
      "2 first-stage costs, 3 cont, 4 kmeans";
  doc["scenario_costs"] = "uniform integers 1..100";
  doc["p"] = "n / 2 (selection)";
  doc["timing_note"] = "reduce_seconds and solve_seconds are wall-clock and vary between runs";
  return doc.dump(2) + "\n";
}

}  // namespace scenred
