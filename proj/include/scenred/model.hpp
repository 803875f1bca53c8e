#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scenred/error.hpp"

namespace scenred {

// Shared tolerance for componentwise domination and row-sum checks.
inline constexpr double kTolerance = 1e-7;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Matrix = std::vector<std::vector<double>>;

/// A non-negative, finite cost vector.
class Scenario {
 public:
  Scenario() = default;
  explicit Scenario(std::vector<double> costs);
  Scenario(std::initializer_list<double> costs)
      : Scenario(std::vector<double>(costs)) {}

  std::size_t dimension() const { return costs_.size(); }
  double operator[](std::size_t j) const { return costs_[j]; }
  std::span<const double> costs() const { return costs_; }
  const std::vector<double>& values() const { return costs_; }

  bool is_zero() const;
  double max_entry() const;

  /// True when `*this <= other` componentwise within `tol`.
  bool dominated_by(const Scenario& other, double tol = kTolerance) const;

  Scenario scaled(double factor) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;

 private:
  std::vector<double> costs_;
};

/// The discrete uncertainty set U = {c^1, ..., c^N}, all of dimension n.
class UncertaintySet {
 public:
  UncertaintySet() = default;
  explicit UncertaintySet(std::vector<Scenario> scenarios);
  static UncertaintySet from_rows(const Matrix& rows);

  std::size_t size() const { return scenarios_.size(); }
  std::size_t dimension() const {
    return scenarios_.empty() ? 0 : scenarios_.front().dimension();
  }
  const Scenario& operator[](std::size_t i) const { return scenarios_[i]; }
  const std::vector<Scenario>& scenarios() const { return scenarios_; }
  auto begin() const { return scenarios_.begin(); }
  auto end() const { return scenarios_.end(); }

  double max_entry() const;
  Matrix rows() const;

  /// Copy with every scenario divided by max_entry() (identity when all-zero).
  /// Scaling ratios, t-values and convex weights are unaffected by it.
  UncertaintySet normalized() const;

  friend bool operator==(const UncertaintySet&,
                         const UncertaintySet&) = default;

 private:
  std::vector<Scenario> scenarios_;
};

enum class Method { kCont, kIpMu, kIpLambda, kKMeans, kMidpoint, kIp2, kGreedy2 };

std::string to_string(Method method);
Method parse_method(std::string_view name);

struct ReductionResult {
  Method method = Method::kCont;
  int stage = 1;
  std::vector<Scenario> reduced;
  Matrix lambda;  // K x N, row-stochastic
  Matrix mu;      // N x K, row-stochastic
  double t = 0.0;
  double guarantee = kInf;
  // False when a solver stopped on a limit or a heuristic path was taken.
  bool exact = true;
  double gap = 0.0;

  std::size_t k() const { return reduced.size(); }
};

/// guarantee = 1 / t, +inf for t <= 0.
double guarantee_from_t(double t);

/// Checks the structural invariants of a reduction against U; throws
/// Error(kValidation) naming the first violation.
void validate_reduction(const UncertaintySet& u, const ReductionResult& r);

enum class ProblemKind { kSelection, kVertexCover };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(std::string_view name);

struct RobustInstance {
  ProblemKind kind = ProblemKind::kSelection;
  int stages = 1;
  int n = 0;
  int p = 0;                               // selection only
  std::vector<std::pair<int, int>> edges;  // vertex cover only
  std::vector<double> first_stage_costs;   // two-stage only

  void validate() const;
  /// Closed neighbourhoods N[v] (vertex cover only).
  std::vector<std::vector<int>> closed_neighborhoods() const;
};

/// Scenarios not componentwise dominated by another one; among equal
/// scenarios the first occurrence survives.
UncertaintySet filter_dominated(const UncertaintySet& u);

// JSON interchange.
UncertaintySet load_uncertainty_set(std::string_view text);
std::string save_uncertainty_set(const UncertaintySet& u);

ReductionResult load_reduction_result(std::string_view text);
std::string save_reduction_result(const ReductionResult& r);

RobustInstance load_robust_instance(std::string_view text);
std::string save_robust_instance(const RobustInstance& inst);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace scenred
