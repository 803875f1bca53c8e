#include "scenred/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "scenred/experiments.hpp"
#include "scenred/guarantee.hpp"
#include "scenred/random.hpp"
#include "scenred/reduce_one_stage.hpp"
#include "scenred/reduce_two_stage.hpp"
#include "scenred/robust.hpp"

namespace scenred {

namespace {

constexpr const char* kVersion = "scenred 1.0.0";

void emit(const std::optional<std::string>& path, const std::string& text) {
  if (path) {
    write_file(*path, text);
  } else {
    std::cout << text;
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

struct ReduceArgs {
  std::string input;
  int k = 1;
  std::string method = "cont";
  int stage = 1;
  int reps = -1;
  int iters = 20;
  std::optional<std::uint64_t> seed;
  double time_limit = 60.0;
  long max_nodes = 0;
  bool use_milp = false;
  std::optional<std::string> out;
};

int run_reduce(const ReduceArgs& a) {
  const UncertaintySet u = load_uncertainty_set(read_file(a.input));
  const Method m = parse_method(a.method);
  const bool two = m == Method::kIp2 || m == Method::kGreedy2;
  if (two != (a.stage == 2)) {
    throw Error(ErrorCode::kValidation,
                "method '" + a.method + "' is not available for stage " + std::to_string(a.stage));
  }
  const bool randomized = m == Method::kCont || m == Method::kKMeans;
  if (randomized && !a.seed) {
    throw Error(ErrorCode::kValidation, "method '" + a.method + "' requires an explicit --seed");
  }
  MilpReduceOptions mo;
  mo.time_limit = a.time_limit;
  mo.max_nodes = a.max_nodes;
  ReductionResult r;
  switch (m) {
    case Method::kCont: {
      ContOptions co;
      co.reps = a.reps > 0 ? a.reps : 10;
      co.max_iters = a.iters;
      co.seed = *a.seed;
      r = cont(u, a.k, co);
      break;
    }
    case Method::kIpMu: r = ip_mu(u, a.k, mo); break;
    case Method::kIpLambda: r = ip_lambda(u, a.k, mo); break;
    case Method::kKMeans: r = kmeans(u, a.k, a.reps > 0 ? a.reps : 1000, *a.seed); break;
    case Method::kMidpoint:
      if (a.k != 1) throw Error(ErrorCode::kValidation, "midpoint produces exactly one scenario (--k 1)");
      r = midpoint_reduction(u);
      break;
    case Method::kIp2: {
      TwoStageOptions to;
      to.time_limit = a.time_limit;
      to.max_nodes = a.max_nodes;
      to.use_milp = a.use_milp;
      r = ip_two_stage(u, a.k, to);
      break;
    }
    case Method::kGreedy2: r = greedy_two_stage(u, a.k); break;
  }
  emit(a.out, save_reduction_result(r));
  return 0;
}

int run_guarantee(const std::string& input, const std::string& result) {
  const UncertaintySet u = load_uncertainty_set(read_file(input));
  const ReductionResult r = load_reduction_result(read_file(result));
  const Verification v = verify_certificate(u, r);
  if (!v.ok()) {
    std::cout << "fail " << v.failure->message() << "\n";
    return 1;
  }
  const GuaranteeCertificate& c = *v.certificate;
  std::cout << "pass stage=" << c.stage << " alpha=" << fmt(c.alpha) << " beta=" << fmt(c.beta)
            << " guarantee=" << (std::isinf(r.guarantee) ? std::string("inf") : fmt(r.guarantee))
            << "\n";
  return 0;
}

struct HeatmapArgs {
  std::string input;
  int stage = 1;
  double min = 0.1;
  double max = 6.0;
  double step = 0.01;
  double cap = kHeatmapCap;
  std::optional<std::string> out;
};

int run_heatmap(const HeatmapArgs& a) {
  const UncertaintySet u = load_uncertainty_set(read_file(a.input));
  if (a.stage != 1 && a.stage != 2) throw Error(ErrorCode::kValidation, "stage must be 1 or 2");
  const GridAxis axis{a.min, a.max, a.step};
  emit(a.out, heatmap_csv(heatmap(u, axis, axis, a.stage, a.cap)));
  return 0;
}

struct SolveArgs {
  std::optional<std::string> problem;
  std::optional<int> stages;
  std::string instance;
  std::string scenarios;
  double time_limit = 60.0;
  std::optional<std::string> out;
};

int run_solve(const SolveArgs& a) {
  RobustInstance inst = load_robust_instance(read_file(a.instance));
  if (a.problem && parse_problem_kind(*a.problem) != inst.kind) {
    throw Error(ErrorCode::kValidation, "--problem disagrees with the instance file");
  }
  if (a.stages && *a.stages != inst.stages) {
    throw Error(ErrorCode::kValidation, "--stages disagrees with the instance file");
  }
  const UncertaintySet u = load_uncertainty_set(read_file(a.scenarios));
  RobustOptions ro;
  ro.time_limit = a.time_limit;
  const RobustSolution s = solve_robust(inst, u, ro);
  emit(a.out, save_robust_solution(s));
  return 0;
}

std::vector<Family> parse_families(const std::vector<std::string>& names) {
  std::vector<Family> out;
  for (const auto& n : names) {
    if (n == "U1") out.push_back(Family::kU1);
    else if (n == "U2") out.push_back(Family::kU2);
    else if (n == "U3") out.push_back(Family::kU3);
    else if (n == "U4") out.push_back(Family::kU4);
    else throw Error(ErrorCode::kValidation, "unknown family '" + n + "'");
  }
  return out;
}

void write_csv_with_metadata(const std::filesystem::path& dir, const std::string& name,
                             const std::string& csv, const std::string& meta) {
  std::filesystem::create_directories(dir);
  write_file((dir / (name + ".csv")).string(), csv);
  write_file((dir / (name + ".json")).string(), meta);
}

int run_exp1(Experiment1Config cfg, const std::vector<std::string>& families,
             const std::string& out_dir) {
  if (!families.empty()) cfg.families = parse_families(families);
  const Experiment1Report r = experiment1(cfg);
  const std::string meta = experiment1_metadata(cfg);
  write_csv_with_metadata(out_dir, "exp1_raw", experiment1_raw_csv(r), meta);
  write_csv_with_metadata(out_dir, "exp1_summary", experiment1_summary_csv(r), meta);
  std::cout << experiment1_summary_csv(r);
  return 0;
}

int run_exp2(Experiment2Config cfg, const std::vector<std::string>& methods,
             const std::string& problem, bool full_grid, const std::string& out_dir) {
  cfg.problem = parse_problem_kind(problem);
  for (const auto& m : methods) cfg.methods.push_back(parse_method(m));
  std::vector<std::pair<int, int>> grid{{cfg.n, cfg.n_scenarios}};
  if (full_grid) {
    grid = {{20, 10}, {150, 10}, {20, 50}, {150, 50}};
    cfg.instances = 250;
  }
  for (const auto& [n, big_n] : grid) {
    cfg.n = n;
    cfg.n_scenarios = big_n;
    const Experiment2Report r = experiment2(cfg);
    const std::string name = "exp2_" + to_string(cfg.problem) + "_s" + std::to_string(cfg.stages) +
                             "_n" + std::to_string(n) + "_N" + std::to_string(big_n);
    write_csv_with_metadata(out_dir, name, experiment2_csv(r), experiment2_metadata(cfg));
    std::cout << "method,K,mean_ratio  (n=" << n << ", N=" << big_n << ")\n";
    for (Method m : cfg.method_list()) {
      for (int k = cfg.k_min; k <= std::min(cfg.k_max, big_n); ++k) {
        std::cout << to_string(m) << ',' << k << ',' << fmt(r.mean_ratio(m, k)) << '\n';
      }
    }
  }
  return 0;
}

// Small-scale equivalence suites between the exact solvers and enumeration.
struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
};

int run_oracle_check(std::uint64_t seed, int cases) {
  std::vector<SuiteResult> suites;
  auto instance = [&](int idx, int max_n, int max_scen, Rng& rng) {
    std::uniform_int_distribution<int> dn(1, max_n), ds(2, max_scen);
    const int n = dn(rng);
    const int big_n = ds(rng);
    return gen_uniform(n, big_n, 0, 20, derive_seed(seed, static_cast<std::uint64_t>(idx)));
  };

  SuiteResult one{"ip-lambda vs subset enumeration"};
  SuiteResult two{"ip2 vs subset enumeration"};
  SuiteResult route{"ip2 threshold search vs MILP route"};
  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const UncertaintySet u = instance(c, 5, 8, rng);
    std::uniform_int_distribution<int> dk(1, std::min<int>(3, static_cast<int>(u.size())));
    const int k = dk(rng);
    ++one.cases;
    if (std::abs(ip_lambda(u, k).t - brute_subset_oracle(u, k)) > 1e-6) ++one.failures;
    ++two.cases;
    const double t2 = ip_two_stage(u, k).t;
    if (t2 != brute_two_stage(u, k)) ++two.failures;
    ++route.cases;
    TwoStageOptions to;
    to.use_milp = true;
    if (std::abs(ip_two_stage(u, k, to).t - t2) > 1e-7) ++route.failures;
  }
  suites.push_back(one);
  suites.push_back(two);
  suites.push_back(route);

  SuiteResult sel{"two-stage selection vs first-stage enumeration"};
  for (int c = 0; c < cases; ++c) {
    Rng r(derive_seed(seed, 1000 + static_cast<std::uint64_t>(c)));
    std::uniform_int_distribution<int> dn(2, 8);
    RobustInstance inst;
    inst.stages = 2;
    inst.n = dn(r);
    inst.p = std::uniform_int_distribution<int>(1, inst.n)(r);
    std::uniform_int_distribution<int> cost(1, 30);
    for (int j = 0; j < inst.n; ++j) inst.first_stage_costs.push_back(cost(r));
    const UncertaintySet u = gen_uniform(inst.n, 4, 1, 30, r());
    double best = kInf;
    for (int mask = 0; mask < (1 << inst.n); ++mask) {
      std::vector<int> x(static_cast<std::size_t>(inst.n));
      int cnt = 0;
      for (int j = 0; j < inst.n; ++j) cnt += x[static_cast<std::size_t>(j)] = (mask >> j) & 1;
      if (cnt <= inst.p) best = std::min(best, evaluate_two_stage(inst, x, u));
    }
    ++sel.cases;
    if (std::abs(solve_two_stage(inst, u).value - best) > 1e-9) ++sel.failures;
  }
  suites.push_back(sel);

  int total = 0;
  for (const auto& s : suites) {
    std::cout << (s.failures ? "FAIL " : "PASS ") << s.name << " (" << s.cases << " cases, "
              << s.failures << " mismatches)\n";
    total += s.failures;
  }
  return total ? 1 : 0;
}

int exit_code(ErrorCode c) {
  return c == ErrorCode::kSolver || c == ErrorCode::kTimeLimit ? 2 : 1;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Scenario reduction for robust optimization with approximation guarantees"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ReduceArgs ra;
  auto* reduce = app.add_subcommand("reduce", "Reduce an uncertainty set to K scenarios");
  reduce->set_version_flag("--version", kVersion);
  reduce->add_option("--input", ra.input, "Uncertainty set JSON")->required();
  reduce->add_option("--k", ra.k, "Number of reduced scenarios")->required();
  reduce->add_option("--method", ra.method, "cont, ip-mu, ip-lambda, kmeans, midpoint, ip2, greedy2")
      ->check(CLI::IsMember({"cont", "ip-mu", "ip-lambda", "kmeans", "midpoint", "ip2", "greedy2"}));
  reduce->add_option("--stage", ra.stage, "1 or 2")->check(CLI::IsMember({1, 2}));
  reduce->add_option("--reps", ra.reps, "Repetitions (cont: 10, kmeans: 1000)");
  reduce->add_option("--iters", ra.iters, "Cont iteration cap");
  reduce->add_option("--seed", ra.seed, "Random seed (required for cont and kmeans)");
  reduce->add_option("--time-limit", ra.time_limit, "MILP time limit in seconds");
  reduce->add_option("--max-nodes", ra.max_nodes, "MILP node limit (0: none)");
  reduce->add_flag("--use-milp", ra.use_milp, "ip2: solve the MILP instead of the threshold search");
  reduce->add_option("--out", ra.out, "Output file (default: stdout)");

  std::string g_input, g_result;
  auto* guarantee = app.add_subcommand("guarantee", "Verify a reduction result against its set");
  guarantee->set_version_flag("--version", kVersion);
  guarantee->add_option("--input", g_input, "Uncertainty set JSON")->required();
  guarantee->add_option("--result", g_result, "Reduction result JSON")->required();

  HeatmapArgs ha;
  auto* heat = app.add_subcommand("heatmap", "Guarantee of single representatives on a 2-D grid");
  heat->set_version_flag("--version", kVersion);
  heat->add_option("--input", ha.input, "Uncertainty set JSON (n = 2)")->required();
  heat->add_option("--stage", ha.stage, "1 or 2")->check(CLI::IsMember({1, 2}));
  heat->add_option("--min", ha.min, "Grid minimum");
  heat->add_option("--max", ha.max, "Grid maximum");
  heat->add_option("--step", ha.step, "Grid step");
  heat->add_option("--cap", ha.cap, "Guarantee cap");
  heat->add_option("--out", ha.out, "Output CSV (default: stdout)");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve a robust selection or vertex cover problem");
  solve->set_version_flag("--version", kVersion);
  solve->add_option("--problem", sa.problem, "selection or vertex-cover")
      ->check(CLI::IsMember({"selection", "vertex-cover"}));
  solve->add_option("--stages", sa.stages, "1 or 2")->check(CLI::IsMember({1, 2}));
  solve->add_option("--instance", sa.instance, "Instance JSON")->required();
  solve->add_option("--scenarios", sa.scenarios, "Uncertainty set JSON")->required();
  solve->add_option("--time-limit", sa.time_limit, "Time limit in seconds");
  solve->add_option("--out", sa.out, "Output file (default: stdout)");

  Experiment1Config e1;
  std::vector<std::string> e1_families;
  std::string e1_out = ".";
  auto* exp1 = app.add_subcommand("exp1", "Correlation experiment");
  exp1->set_version_flag("--version", kVersion);
  exp1->add_option("--seed", e1.seed, "Base seed")->required();
  exp1->add_option("--n", e1.n, "Dimension");
  exp1->add_option("--N", e1.n_scenarios, "Scenarios per set");
  exp1->add_option("--k", e1.k, "Reduced size");
  exp1->add_option("--sets", e1.sets, "Sets per family");
  exp1->add_option("--points", e1.points, "Sampled x per set");
  exp1->add_option("--cont-reps", e1.cont_reps, "Cont repetitions");
  exp1->add_option("--cont-iters", e1.cont_iters, "Cont iteration cap");
  exp1->add_option("--kmeans-reps", e1.kmeans_reps, "K-means repetitions");
  exp1->add_option("--families", e1_families, "Subset of U1 U2 U3 U4");
  exp1->add_option("--jobs", e1.jobs, "Parallel sets");
  exp1->add_option("--out-dir", e1_out, "Directory for CSV and metadata");

  Experiment2Config e2;
  std::vector<std::string> e2_methods;
  std::string e2_problem = "selection";
  bool e2_full = false;
  std::string e2_out = ".";
  auto* exp2 = app.add_subcommand("exp2", "Objective-ratio experiment");
  exp2->set_version_flag("--version", kVersion);
  exp2->add_option("--seed", e2.seed, "Base seed")->required();
  exp2->add_option("--problem", e2_problem, "selection or vertex-cover")
      ->check(CLI::IsMember({"selection", "vertex-cover"}));
  exp2->add_option("--stages", e2.stages, "1 or 2")->check(CLI::IsMember({1, 2}));
  exp2->add_option("--n", e2.n, "Dimension");
  exp2->add_option("--N", e2.n_scenarios, "Scenarios");
  exp2->add_option("--instances", e2.instances, "Instances");
  exp2->add_option("--k-min", e2.k_min, "Smallest K");
  exp2->add_option("--k-max", e2.k_max, "Largest K");
  exp2->add_option("--methods", e2_methods, "Reduction methods");
  exp2->add_option("--cont-reps", e2.cont_reps, "Cont repetitions");
  exp2->add_option("--cont-iters", e2.cont_iters, "Cont iteration cap");
  exp2->add_option("--kmeans-reps", e2.kmeans_reps, "K-means repetitions");
  exp2->add_option("--time-limit", e2.time_limit, "Per-solve time limit in seconds");
  exp2->add_option("--reduce-max-nodes", e2.reduce_max_nodes, "Node limit of the IP reductions");
  exp2->add_option("--jobs", e2.jobs, "Parallel instances");
  exp2->add_flag("--full-grid", e2_full, "n in {20,150}, N in {10,50}, 250 instances");
  exp2->add_option("--out-dir", e2_out, "Directory for CSV and metadata");

  std::uint64_t oc_seed = 0;
  int oc_cases = 30;
  auto* oracle = app.add_subcommand("oracle-check", "Run the solver-vs-enumeration suites");
  oracle->set_version_flag("--version", kVersion);
  oracle->add_option("--seed", oc_seed, "Seed")->required();
  oracle->add_option("--cases", oc_cases, "Cases per suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[" << to_string(ErrorCode::kParse) << "]: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*reduce) return run_reduce(ra);
    if (*guarantee) return run_guarantee(g_input, g_result);
    if (*heat) return run_heatmap(ha);
    if (*solve) return run_solve(sa);
    if (*exp1) return run_exp1(e1, e1_families, e1_out);
    if (*exp2) return run_exp2(e2, e2_methods, e2_problem, e2_full, e2_out);
    if (*oracle) return run_oracle_check(oc_seed, oc_cases);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error[" << to_string(ErrorCode::kValidation) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[" << to_string(ErrorCode::kSolver) << "]: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace scenred
