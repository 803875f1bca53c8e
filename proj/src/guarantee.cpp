#include "scenred/guarantee.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "scenred/linprog.hpp"

namespace scenred {

double dominating_scale(std::span<const double> target,
                        std::span<const double> generator) {
  double s = 0.0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    if (target[j] <= 0.0) continue;
    if (generator[j] <= 0.0) return kInf;
    s = std::max(s, target[j] / generator[j]);
  }
  return s;
}

namespace {

struct Cover {
  double value;
  std::vector<double> weights;
};

// min sum(nu) s.t. sum_k nu_k g^k >= target, nu >= 0; weights = nu / sum(nu).
Cover cover_by_combination(std::span<const double> target,
                           const std::vector<std::span<const double>>& gens) {
  const std::size_t k = gens.size();
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < target.size(); ++j) {
    if (target[j] <= 0.0) continue;
    bool reachable = false;
    for (const auto& g : gens) reachable = reachable || g[j] > 0.0;
    if (!reachable) return {kInf, std::vector<double>(k, 1.0 / static_cast<double>(k))};
    active.push_back(j);
  }
  std::vector<double> unit(k, 0.0);
  unit[0] = 1.0;
  if (active.empty()) return {0.0, unit};
  if (k == 1) return {dominating_scale(target, gens[0]), unit};

  lp::LpProblem p;
  p.sense = lp::Sense::kMinimize;
  for (std::size_t q = 0; q < k; ++q) p.add_variable(1.0);
  for (std::size_t j : active) {
    std::vector<double> row(k);
    for (std::size_t q = 0; q < k; ++q) row[q] = gens[q][j] / target[j];
    p.add_row(std::move(row), lp::RowSense::kGreaterEqual, 1.0);
  }
  const lp::LpSolution sol = lp::solve_lp(p);
  if (sol.status != lp::LpStatus::kOptimal) {
    throw Error(ErrorCode::kSolver, "covering LP did not solve to optimality");
  }
  double sum = 0.0;
  for (double v : sol.x) sum += v;
  std::vector<double> w(k);
  for (std::size_t q = 0; q < k; ++q) w[q] = sum > 0.0 ? sol.x[q] / sum : unit[q];
  return {sum, w};
}

CoverFactor cover_all(const std::vector<std::span<const double>>& targets,
                      const std::vector<std::span<const double>>& gens) {
  CoverFactor out;
  for (const auto& t : targets) {
    Cover c = cover_by_combination(t, gens);
    out.factor = std::max(out.factor, c.value);
    out.per_target.push_back(c.value);
    out.witnesses.push_back(std::move(c.weights));
  }
  return out;
}

std::vector<std::span<const double>> spans(std::span<const Scenario> s) {
  std::vector<std::span<const double>> out;
  out.reserve(s.size());
  for (const auto& c : s) out.push_back(c.costs());
  return out;
}

void check_dimensions(const UncertaintySet& u, std::span<const Scenario> reduced) {
  if (reduced.empty()) throw Error(ErrorCode::kValidation, "reduced set is empty");
  for (const auto& c : reduced) {
    if (c.dimension() != u.dimension()) {
      throw Error(ErrorCode::kDimension, "reduced scenario dimension differs from U");
    }
  }
}

}  // namespace

CoverFactor alpha_one_stage(const UncertaintySet& u, std::span<const Scenario> reduced) {
  check_dimensions(u, reduced);
  return cover_all(spans(u.scenarios()), spans(reduced));
}

CoverFactor beta_one_stage(std::span<const Scenario> reduced, const UncertaintySet& u) {
  check_dimensions(u, reduced);
  return cover_all(spans(reduced), spans(u.scenarios()));
}

double guarantee_single_one_stage(const UncertaintySet& u, const Scenario& candidate) {
  const std::span<const Scenario> c(&candidate, 1);
  const double alpha = alpha_one_stage(u, c).factor;
  const double beta = beta_one_stage(c, u).factor;
  if (std::isinf(alpha) || std::isinf(beta)) return kInf;
  return alpha * beta;
}

TwoStageFactors two_stage_factors(const UncertaintySet& u, std::span<const Scenario> reduced) {
  check_dimensions(u, reduced);
  TwoStageFactors f;
  for (const auto& ci : u) {
    double best = kInf;
    for (const auto& ck : reduced) best = std::min(best, dominating_scale(ci.costs(), ck.costs()));
    f.alpha = std::max(f.alpha, best);
  }
  for (const auto& ck : reduced) {
    double best = kInf;
    for (const auto& ci : u) best = std::min(best, dominating_scale(ck.costs(), ci.costs()));
    f.beta = std::max(f.beta, best);
  }
  return f;
}

double guarantee_single_two_stage(const UncertaintySet& u, const Scenario& candidate) {
  const TwoStageFactors f = two_stage_factors(u, std::span<const Scenario>(&candidate, 1));
  if (std::isinf(f.alpha) || std::isinf(f.beta)) return kInf;
  return f.guarantee();
}

DMatrix d_matrix(const UncertaintySet& u) {
  const std::size_t n_scen = u.size();
  DMatrix m;
  m.d.assign(n_scen, std::vector<double>(n_scen, kInf));
  for (std::size_t i = 0; i < n_scen; ++i) {
    if (u[i].is_zero()) continue;
    for (std::size_t l = 0; l < n_scen; ++l) {
      double r = kInf;
      for (std::size_t j = 0; j < u.dimension(); ++j) {
        if (u[i][j] > 0.0) r = std::min(r, u[l][j] / u[i][j]);
      }
      m.d[i][l] = r;
    }
  }
  return m;
}

std::string CertificateFailure::message() const {
  std::ostringstream ss;
  ss << condition;
  if (index >= 0) ss << " (scenario " << index << ")";
  ss << ": observed " << observed << ", required " << required;
  return ss.str();
}

namespace {

Verification fail(std::string condition, int index, double observed, double required) {
  Verification v;
  v.failure = CertificateFailure{std::move(condition), index, observed, required};
  return v;
}

Verification verify_one_stage(const UncertaintySet& u, const ReductionResult& r) {
  const CoverFactor alpha = alpha_one_stage(u, r.reduced);
  const CoverFactor beta = beta_one_stage(r.reduced, u);
  const double product = (std::isinf(alpha.factor) || std::isinf(beta.factor))
                             ? kInf
                             : alpha.factor * beta.factor;
  if (!(product <= r.guarantee + 1e-6)) {
    // Name the scenario driving alpha.
    int worst = 0;
    for (std::size_t i = 0; i < alpha.per_target.size(); ++i) {
      if (alpha.per_target[i] > alpha.per_target[worst]) worst = static_cast<int>(i);
    }
    return fail("alpha * beta exceeds the claimed guarantee", worst, product, r.guarantee);
  }
  GuaranteeCertificate c;
  c.stage = 1;
  c.alpha = alpha.factor;
  c.beta = beta.factor;
  c.alpha_witnesses = alpha.witnesses;
  c.beta_witnesses = beta.witnesses;
  Verification v;
  v.certificate = std::move(c);
  return v;
}

Verification verify_two_stage(const UncertaintySet& u, const ReductionResult& r) {
  const double scale = std::max(1.0, u.max_entry());
  std::vector<int> match(u.size(), -1);  // U index -> reduced index
  std::vector<int> beta_choice;
  for (std::size_t q = 0; q < r.k(); ++q) {
    int first = -1;
    for (std::size_t l = 0; l < u.size(); ++l) {
      bool equal = true;
      for (std::size_t j = 0; j < u.dimension() && equal; ++j) {
        equal = std::abs(u[l][j] - r.reduced[q][j]) <= kTolerance * scale;
      }
      if (equal) {
        if (match[l] < 0) match[l] = static_cast<int>(q);
        if (first < 0) first = static_cast<int>(l);
      }
    }
    if (first < 0) return fail("reduced scenario is not a member of U", static_cast<int>(q), 0, 0);
    beta_choice.push_back(first);
  }
  const DMatrix d = d_matrix(u);
  double achieved = kInf;
  int worst = -1;
  std::vector<int> alpha_choice(u.size(), 0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double best = -1.0;
    for (std::size_t l = 0; l < u.size(); ++l) {
      if (match[l] >= 0 && d(i, l) > best) {
        best = d(i, l);
        alpha_choice[i] = match[l];
      }
    }
    if (best < achieved) {
      achieved = best;
      worst = static_cast<int>(i);
    }
  }
  if (std::isinf(achieved)) achieved = 1.0;
  if (achieved < r.t - 1e-7) {
    return fail("min_i max_selected d[i][l] is below the claimed t", worst, achieved, r.t);
  }
  GuaranteeCertificate c;
  c.stage = 2;
  c.alpha = achieved > 0.0 ? std::max(1.0, 1.0 / achieved) : kInf;
  c.beta = 1.0;
  c.alpha_choice = alpha_choice;
  c.beta_choice = beta_choice;
  c.alpha_witnesses.assign(u.size(), std::vector<double>(r.k(), 0.0));
  for (std::size_t i = 0; i < u.size(); ++i) c.alpha_witnesses[i][alpha_choice[i]] = 1.0;
  c.beta_witnesses.assign(r.k(), std::vector<double>(u.size(), 0.0));
  for (std::size_t q = 0; q < r.k(); ++q) c.beta_witnesses[q][beta_choice[q]] = 1.0;
  if (!(c.alpha * c.beta <= r.guarantee + 1e-6)) {
    return fail("alpha * beta exceeds the claimed guarantee", worst, c.alpha * c.beta,
                r.guarantee);
  }
  Verification v;
  v.certificate = std::move(c);
  return v;
}

}  // namespace

Verification verify_certificate(const UncertaintySet& u, const ReductionResult& result) {
  try {
    validate_reduction(u, result);
  } catch (const Error& e) {
    return fail(std::string("malformed reduction: ") + e.what(), -1, 0, 0);
  }
  return result.stage == 1 ? verify_one_stage(u, result) : verify_two_stage(u, result);
}

std::size_t GridAxis::count() const {
  if (!(step > 0.0) || max < min) throw Error(ErrorCode::kValidation, "invalid grid axis");
  return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

std::vector<HeatmapCell> heatmap(const UncertaintySet& u, const GridAxis& x_axis,
                                 const GridAxis& y_axis, int stage, double cap) {
  if (u.dimension() != 2) {
    throw Error(ErrorCode::kDimension, "heatmap needs two-dimensional scenarios");
  }
  if (stage != 1 && stage != 2) throw Error(ErrorCode::kValidation, "stage must be 1 or 2");
  const std::size_t nx = x_axis.count();
  const std::size_t ny = y_axis.count();
  std::vector<HeatmapCell> cells;
  cells.reserve(nx * ny);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      HeatmapCell cell{x_axis.at(ix), y_axis.at(iy), 0.0, false};
      const Scenario s({cell.x, cell.y});
      const double g = stage == 1 ? guarantee_single_one_stage(u, s)
                                  : guarantee_single_two_stage(u, s);
      cell.capped = !(g <= cap);
      cell.guarantee = cell.capped ? cap : g;
      cells.push_back(cell);
    }
  }
  return cells;
}

std::string heatmap_csv(const std::vector<HeatmapCell>& cells) {
  std::ostringstream ss;
  ss << "x,y,guarantee,capped\n" << std::setprecision(12);
  for (const auto& c : cells) {
    ss << c.x << ',' << c.y << ',' << c.guarantee << ',' << (c.capped ? 1 : 0) << '\n';
  }
  return ss.str();
}

int partition_bound(std::span<const int> cluster_sizes) {
  if (cluster_sizes.empty()) throw Error(ErrorCode::kValidation, "no clusters given");
  int m = 0;
  for (int s : cluster_sizes) {
    if (s < 1) throw Error(ErrorCode::kValidation, "cluster sizes must be >= 1");
    m = std::max(m, s);
  }
  return m;
}

}  // namespace scenred
