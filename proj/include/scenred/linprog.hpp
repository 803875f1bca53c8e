#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace scenred::lp {

enum class Sense { kMaximize, kMinimize };
enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

inline constexpr double kNoBound = std::numeric_limits<double>::infinity();

// Feasibility tolerances of the kernel.
inline constexpr double kBoundTolerance = 1e-9;
inline constexpr double kRowTolerance = 1e-7;

/// Dense linear program. Variables default to [0, +inf).
struct LpProblem {
  Sense sense = Sense::kMaximize;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<RowSense> row_senses;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rows.size(); }

  std::size_t add_variable(double cost, double lo = 0.0, double hi = kNoBound);
  /// Adds a row; `coeffs` is padded with zeros to num_vars().
  void add_row(std::vector<double> coeffs, RowSense sense, double rhs_value);

  /// Throws scenred::Error(kValidation) on inconsistent dimensions, non-finite
  /// coefficients or non-finite lower bounds.
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  // Row duals as d(objective)/d(rhs) of the original problem.
  std::vector<double> duals;
  // Dual objective of the internal standard form; matches the primal one.
  double dual_objective = 0.0;
  bool dual_verified = false;
  double max_row_violation = 0.0;
  int iterations = 0;
};

/// Two-phase primal simplex on a dense dictionary. Dantzig pricing with a
/// Harris ratio test; after 10 * (rows + cols) consecutive degenerate pivots
/// the right-hand side is perturbed (and restored at the end), after a second
/// such stall pricing switches to Bland's rule.
/// Deterministic for a fixed input.
LpSolution solve_lp(const LpProblem& problem);

/// Primal row/bound feasibility of `x` on `problem` (max absolute violation).
double max_violation(const LpProblem& problem, const std::vector<double>& x);

}  // namespace scenred::lp
