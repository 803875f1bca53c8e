#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scenred/model.hpp"

namespace scenred {

using Edges = std::vector<std::pair<int, int>>;

/// Integer entries i.i.d. uniform on {lo, ..., hi}.
UncertaintySet gen_uniform(int n, int n_scenarios, int lo, int hi, std::uint64_t seed);

/// Uniform {1..100} scenarios, each doubled with probability `prob` (drawn
/// after all entries).
UncertaintySet gen_u2(int n, int n_scenarios, std::uint64_t seed, double prob = 0.05);

/// Nominal costs plus deviations on exactly three random items per scenario;
/// both nominal and deviation values uniform on {1..100}, deviations on
/// {0..dev_hi} when dev_hi < 1.
UncertaintySet gen_u3(int n, int n_scenarios, std::uint64_t seed, int dev_hi = 100);

/// Uniform draw, 2-norm normalisation, per-scenario scale in [scale_lo, scale_hi].
UncertaintySet gen_u4(int n, int n_scenarios, std::uint64_t seed, double scale_lo = 9000.0,
                      double scale_hi = 11000.0);

/// Independent normal coordinates, rejection-sampled into [1, 100].
UncertaintySet gen_truncnormal(int n, int n_scenarios, std::uint64_t seed, double mean = 50.0,
                               double stddev = 20.0);

/// Each of the n(n-1)/2 edges independently with probability min(1, degree / n).
Edges gen_graph(int n, std::uint64_t seed, double degree = 10.0);

/// 2n scenarios: 16 e_i, then 12 on N[v_i] and 9 elsewhere.
UncertaintySet hardness_instance(int n, const Edges& edges);

double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

enum class Family { kU1, kU2, kU3, kU4 };

std::string to_string(Family f);
UncertaintySet gen_family(Family f, int n, int n_scenarios, std::uint64_t seed);

struct Experiment1Config {
  int n = 10;
  int n_scenarios = 100;
  int k = 5;
  int sets = 50;
  int points = 100;
  int cont_reps = 10;
  int cont_iters = 20;
  int kmeans_reps = 1000;
  std::uint64_t seed = 0;
  std::vector<Family> families{Family::kU1, Family::kU2, Family::kU3, Family::kU4};
  int jobs = 1;

  void validate() const;
};

struct Experiment1Point {
  Family family;
  int set_id;
  int point_id;
  double full_value;
  double cont_value;
  double km_value;
};

struct Experiment1Summary {
  Family family;
  double rho_cont;
  double rho_km;
};

struct Experiment1Report {
  std::vector<Experiment1Point> points;
  std::vector<Experiment1Summary> summary;
};

/// Seed of instance `index` of a batch.
constexpr std::uint64_t instance_seed(std::uint64_t base, int index) {
  return base + static_cast<std::uint64_t>(index);
}

Experiment1Report experiment1(const Experiment1Config& cfg);
std::string experiment1_raw_csv(const Experiment1Report& r);
std::string experiment1_summary_csv(const Experiment1Report& r);
std::string experiment1_metadata(const Experiment1Config& cfg);

struct Experiment2Config {
  ProblemKind problem = ProblemKind::kSelection;
  int stages = 1;
  int n = 20;
  int n_scenarios = 10;
  int instances = 25;
  int k_min = 1;
  int k_max = 10;
  std::vector<Method> methods;  // empty: the stage's default method list
  int cont_reps = 10;
  int cont_iters = 3;
  int kmeans_reps = 1000;
  double time_limit = 60.0;
  long reduce_max_nodes = 0;  // node budget of the IP reductions, 0: unlimited
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
  std::vector<Method> method_list() const;
};

struct Experiment2Record {
  int instance_id;
  Method method;
  int k;
  double ratio;
  double guarantee;
  double reduce_seconds;
  double solve_seconds;
  bool exact;
};

struct Experiment2Report {
  Experiment2Config config;
  std::vector<Experiment2Record> records;

  /// Mean ratio of `method` over all instances at this K.
  double mean_ratio(Method method, int k) const;
};

Experiment2Report experiment2(const Experiment2Config& cfg);
std::string experiment2_csv(const Experiment2Report& r);
std::string experiment2_metadata(const Experiment2Config& cfg);

}  // namespace scenred
