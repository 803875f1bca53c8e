#include "scenred/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scenred/error.hpp"

namespace scenred::lp {

std::size_t LpProblem::add_variable(double cost, double lo, double hi) {
  objective.push_back(cost);
  if (lower.size() + 1 < objective.size()) lower.resize(objective.size() - 1, 0.0);
  if (upper.size() + 1 < objective.size()) upper.resize(objective.size() - 1, kNoBound);
  lower.push_back(lo);
  upper.push_back(hi);
  for (auto& r : rows) r.resize(objective.size(), 0.0);
  return objective.size() - 1;
}

void LpProblem::add_row(std::vector<double> coeffs, RowSense s, double rhs_value) {
  coeffs.resize(num_vars(), 0.0);
  rows.push_back(std::move(coeffs));
  row_senses.push_back(s);
  rhs.push_back(rhs_value);
}

void LpProblem::validate() const {
  const std::size_t n = num_vars();
  if (rows.size() != row_senses.size() || rows.size() != rhs.size()) {
    throw Error(ErrorCode::kValidation, "LP row, sense and rhs counts differ");
  }
  if ((!lower.empty() && lower.size() != n) || (!upper.empty() && upper.size() != n)) {
    throw Error(ErrorCode::kValidation, "LP bound vectors have the wrong length");
  }
  for (double c : objective) {
    if (!std::isfinite(c)) throw Error(ErrorCode::kValidation, "non-finite objective");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != n) {
      throw Error(ErrorCode::kValidation, "LP row " + std::to_string(i) + " has wrong length");
    }
    if (!std::isfinite(rhs[i])) throw Error(ErrorCode::kValidation, "non-finite rhs");
    for (double a : rows[i]) {
      if (!std::isfinite(a)) throw Error(ErrorCode::kValidation, "non-finite coefficient");
    }
  }
  for (double l : lower) {
    if (!std::isfinite(l)) throw Error(ErrorCode::kValidation, "lower bounds must be finite");
  }
  for (double u : upper) {
    if (std::isnan(u)) throw Error(ErrorCode::kValidation, "NaN upper bound");
  }
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

double max_violation(const LpProblem& p, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    double act = 0.0;
    for (std::size_t j = 0; j < p.num_vars(); ++j) act += p.rows[i][j] * x[j];
    const double d = act - p.rhs[i];
    switch (p.row_senses[i]) {
      case RowSense::kLessEqual: worst = std::max(worst, d); break;
      case RowSense::kGreaterEqual: worst = std::max(worst, -d); break;
      case RowSense::kEqual: worst = std::max(worst, std::abs(d)); break;
    }
  }
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    const double lo = p.lower.empty() ? 0.0 : p.lower[j];
    const double hi = p.upper.empty() ? kNoBound : p.upper[j];
    worst = std::max(worst, lo - x[j]);
    if (hi < kNoBound) worst = std::max(worst, x[j] - hi);
  }
  return worst;
}

namespace {

constexpr double kPivotEps = 1e-9;

// max c'x s.t. Ax <= b, x >= 0, plus the bookkeeping to map back.
struct StandardForm {
  int m = 0;
  int n = 0;
  std::vector<double> a;  // m x n row-major
  std::vector<double> b;
  std::vector<double> c;
  std::vector<int> column_of;  // original variable -> column, -1 when fixed
  std::vector<double> shift;   // x = shift + x_std
  std::vector<int> origin;     // standard row -> original row, -1 for bound rows
  std::vector<double> factor;  // y_orig[origin] += factor * y_std
  double offset = 0.0;         // objective constant of the max form
  bool infeasible = false;
};

StandardForm standardize(const LpProblem& p) {
  StandardForm s;
  const std::size_t nv = p.num_vars();
  const double sign = p.sense == Sense::kMaximize ? 1.0 : -1.0;
  s.column_of.assign(nv, -1);
  s.shift.assign(nv, 0.0);
  std::vector<double> width(nv, kNoBound);
  for (std::size_t j = 0; j < nv; ++j) {
    const double lo = p.lower.empty() ? 0.0 : p.lower[j];
    const double hi = p.upper.empty() ? kNoBound : p.upper[j];
    s.shift[j] = lo;
    if (hi < lo - kBoundTolerance) s.infeasible = true;
    if (hi <= lo + kBoundTolerance) {
      s.shift[j] = std::min(std::max(lo, hi), lo);
      continue;
    }
    width[j] = hi - lo;
    s.column_of[j] = s.n++;
    s.c.push_back(sign * p.objective[j]);
  }
  for (std::size_t j = 0; j < nv; ++j) s.offset += sign * p.objective[j] * s.shift[j];

  auto push_row = [&](const std::vector<double>& row, double rhs, int origin,
                      double factor) {
    double scale = 0.0;
    for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) {
      if (rhs < -kRowTolerance) s.infeasible = true;
      return;
    }
    for (double v : row) s.a.push_back(v / scale);
    s.b.push_back(rhs / scale);
    s.origin.push_back(origin);
    s.factor.push_back(factor / scale);
    ++s.m;
  };

  std::vector<double> row(s.n);
  std::vector<double> neg(s.n);
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    double rhs = p.rhs[i];
    for (std::size_t j = 0; j < nv; ++j) {
      rhs -= p.rows[i][j] * s.shift[j];
      if (s.column_of[j] >= 0) row[s.column_of[j]] = p.rows[i][j];
    }
    for (int j = 0; j < s.n; ++j) neg[j] = -row[j];
    const int o = static_cast<int>(i);
    // Dual factors carry the max/min sign so that duals are d(obj)/d(rhs).
    switch (p.row_senses[i]) {
      case RowSense::kLessEqual: push_row(row, rhs, o, sign); break;
      case RowSense::kGreaterEqual: push_row(neg, -rhs, o, -sign); break;
      case RowSense::kEqual:
        push_row(row, rhs, o, sign);
        push_row(neg, -rhs, o, -sign);
        break;
    }
  }
  for (std::size_t j = 0; j < nv; ++j) {
    if (s.column_of[j] < 0 || width[j] == kNoBound) continue;
    std::fill(row.begin(), row.end(), 0.0);
    row[s.column_of[j]] = 1.0;
    push_row(row, width[j], -1, 0.0);
  }
  return s;
}

// Dense dictionary simplex with a single artificial column for phase one.
// Columns: n structural/slack, the artificial, the (possibly perturbed) rhs and
// an unperturbed copy of the rhs.
class Dictionary {
 public:
  Dictionary(const StandardForm& s)
      : m_(s.m), n_(s.n), w_(s.n + 3), d_((s.m + 2) * (s.n + 3), 0.0),
        basic_(s.m), nonbasic_(s.n + 1) {
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) at(i, j) = s.a[i * n_ + j];
      basic_[i] = n_ + i;
      at(i, n_) = -1.0;
      at(i, n_ + 1) = s.b[i];
      at(i, n_ + 2) = s.b[i];
      b_scale_ = std::max(b_scale_, std::abs(s.b[i]));
    }
    for (int j = 0; j < n_; ++j) {
      nonbasic_[j] = j;
      at(m_, j) = -s.c[j];
    }
    nonbasic_[n_] = -1;
    at(m_ + 1, n_) = 1.0;
    max_iterations_ = 200000 + 100 * (m_ + n_);
  }

  LpStatus solve() {
    int r = 0;
    for (int i = 1; i < m_; ++i) {
      if (at(i, n_ + 1) < at(r, n_ + 1)) r = i;
    }
    if (m_ > 0 && at(r, n_ + 1) < -kPivotEps) {
      pivot(r, n_);
      if (!run(2) || at(m_ + 1, n_ + 1) < -1e-7) return LpStatus::kInfeasible;
      for (int i = 0; i < m_; ++i) {
        if (basic_[i] != -1) continue;
        int s = -1;
        double best = kPivotEps;
        for (int j = 0; j <= n_; ++j) {
          if (std::abs(at(i, j)) > best) {
            best = std::abs(at(i, j));
            s = j;
          }
        }
        if (s >= 0) pivot(i, s);
      }
    }
    return run(1) ? LpStatus::kOptimal : LpStatus::kUnbounded;
  }

  std::vector<double> primal() const {
    std::vector<double> x(n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (basic_[i] >= 0 && basic_[i] < n_) x[basic_[i]] = std::max(0.0, value(i));
    }
    return x;
  }

  std::vector<double> duals() const {
    std::vector<double> y(m_, 0.0);
    for (int j = 0; j <= n_; ++j) {
      if (nonbasic_[j] >= n_) y[nonbasic_[j] - n_] = at(m_, j);
    }
    return y;
  }

  double objective() const { return at(m_, n_ + 1); }
  int iterations() const { return iterations_; }

 private:
  double& at(int i, int j) { return d_[static_cast<std::size_t>(i) * w_ + j]; }
  double at(int i, int j) const { return d_[static_cast<std::size_t>(i) * w_ + j]; }
  double value(int i) const { return at(i, n_ + 1); }

  void pivot(int r, int s) {
    double* pr = &at(r, 0);
    const double inv = 1.0 / pr[s];
    nonzero_.clear();
    for (int j = 0; j < w_; ++j) {
      if (j != s && pr[j] != 0.0) nonzero_.push_back(j);
    }
    const bool sparse = 4 * nonzero_.size() < static_cast<std::size_t>(w_);
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r) continue;
      double* pi = &at(i, 0);
      if (std::abs(pi[s]) <= 1e-14) continue;
      const double f = pi[s] * inv;
      if (sparse) {
        for (int j : nonzero_) pi[j] -= pr[j] * f;
      } else {
        for (int j = 0; j < w_; ++j) pi[j] -= pr[j] * f;
      }
      pi[s] = pr[s] * f;
    }
    for (int j = 0; j < w_; ++j) {
      if (j != s) pr[j] *= inv;
    }
    for (int i = 0; i < m_ + 2; ++i) {
      if (i != r) at(i, s) *= -inv;
    }
    pr[s] = inv;
    std::swap(basic_[r], nonbasic_[s]);
    if (++iterations_ > max_iterations_) {
      throw Error(ErrorCode::kSolver, "simplex iteration limit exceeded");
    }
  }

  // phase 2 optimizes the auxiliary row m+1, phase 1 the real objective.
  bool run(int phase) {
    const bool bounded = iterate(phase);
    if (perturbed_) {
      restore();
      repair(phase);
    }
    return bounded;
  }

  // Primal simplex. A long degenerate stall first perturbs the basic values,
  // a second one switches to Bland's rule.
  bool iterate(int phase) {
    const int x = m_ + phase - 1;
    const int degenerate_limit = 10 * (m_ + n_);
    int degenerate = 0;
    bool bland = false;
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (nonbasic_[j] == -phase) continue;
        const double rc = at(x, j);
        if (bland) {
          if (rc < -kPivotEps && (s == -1 || nonbasic_[j] < nonbasic_[s])) s = j;
        } else if (s == -1 || rc < at(x, s) ||
                   (rc == at(x, s) && nonbasic_[j] < nonbasic_[s])) {
          s = j;
        }
      }
      if (s == -1 || at(x, s) >= -kPivotEps) return true;
      int r = bland ? bland_row(s) : harris_row(s);
      if (r == -1) return false;
      const double best = std::max(0.0, value(r)) / at(r, s);
      if (best <= kPivotEps) {
        if (++degenerate > degenerate_limit) {
          if (!perturbed_) {
            perturb();
          } else {
            bland = true;
          }
          degenerate = 0;
        }
      } else {
        degenerate = 0;
      }
      pivot(r, s);
    }
  }

  // Smallest ratio, lowest basic index on ties.
  int bland_row(int s) const {
    int r = -1;
    double best = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double a = at(i, s);
      if (a <= kPivotEps) continue;
      const double ratio = std::max(0.0, value(i)) / a;
      if (r == -1 || ratio < best - 1e-12 ||
          (ratio <= best + 1e-12 && basic_[i] < basic_[r])) {
        r = i;
        best = ratio;
      }
    }
    return r;
  }

  // Two-pass Harris test: among rows whose ratio is within the feasibility
  // tolerance of the minimum, take the largest pivot element.
  int harris_row(int s) const {
    double limit = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m_; ++i) {
      const double a = at(i, s);
      if (a <= kPivotEps) continue;
      limit = std::min(limit, (std::max(0.0, value(i)) + kBoundTolerance) / a);
    }
    if (std::isinf(limit)) return -1;
    int r = -1;
    for (int i = 0; i < m_; ++i) {
      const double a = at(i, s);
      if (a <= kPivotEps || std::max(0.0, value(i)) / a > limit) continue;
      if (r == -1 || a > at(r, s) || (a == at(r, s) && basic_[i] < basic_[r])) r = i;
    }
    return r;
  }

  // Deterministic offsets of different sizes break the ties between rows.
  void perturb() {
    perturbed_ = true;
    const double base = 1e-7 * std::max(1.0, b_scale_);
    for (int i = 0; i < m_; ++i) {
      at(i, n_ + 1) += base * (1.0 + static_cast<double>((i * 37) % 101) / 101.0);
    }
  }

  void restore() {
    perturbed_ = false;
    for (int i = 0; i < m_ + 2; ++i) at(i, n_ + 1) = at(i, n_ + 2);
  }

  // Dual simplex pivots until the restored basic values are non-negative;
  // the objective row stays optimal throughout.
  void repair(int phase) {
    const int x = m_ + phase - 1;
    for (;;) {
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (value(i) < -kBoundTolerance && (r == -1 || value(i) < value(r))) r = i;
      }
      if (r == -1) return;
      int s = -1;
      double best = 0.0;
      for (int j = 0; j <= n_; ++j) {
        if (nonbasic_[j] == -phase) continue;
        const double a = at(r, j);
        if (a >= -kPivotEps) continue;
        const double ratio = std::max(0.0, at(x, j)) / -a;
        if (s == -1 || ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 && nonbasic_[j] < nonbasic_[s])) {
          s = j;
          best = ratio;
        }
      }
      if (s == -1) throw Error(ErrorCode::kSolver, "simplex lost feasibility after perturbation");
      pivot(r, s);
    }
  }

  int m_;
  int n_;
  int w_;
  std::vector<double> d_;
  std::vector<int> basic_;
  std::vector<int> nonbasic_;
  std::vector<int> nonzero_;
  int iterations_ = 0;
  int max_iterations_ = 0;
  bool perturbed_ = false;
  double b_scale_ = 0.0;
};

// Weak-duality certificate on the standard form: y >= 0, A'y >= c, b'y = c'x.
bool verify_dual(const StandardForm& s, const std::vector<double>& x,
                 const std::vector<double>& y, double primal, double* dual_obj) {
  const double tol = 1e-6;
  double by = 0.0;
  double scale = 1.0;
  for (int i = 0; i < s.m; ++i) {
    if (y[i] < -tol) return false;
    by += s.b[i] * y[i];
    scale = std::max(scale, std::abs(s.b[i] * y[i]));
  }
  for (int j = 0; j < s.n; ++j) {
    double aty = 0.0;
    for (int i = 0; i < s.m; ++i) aty += s.a[i * s.n + j] * y[i];
    if (aty < s.c[j] - tol * std::max(1.0, std::abs(s.c[j]))) return false;
  }
  double cx = 0.0;
  for (int j = 0; j < s.n; ++j) cx += s.c[j] * x[j];
  *dual_obj = by;
  scale = std::max({scale, std::abs(primal), std::abs(cx)});
  return std::abs(by - primal) <= tol * scale && std::abs(cx - primal) <= tol * scale;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  problem.validate();
  LpSolution out;
  const StandardForm s = standardize(problem);
  if (s.infeasible) {
    out.status = LpStatus::kInfeasible;
    return out;
  }
  Dictionary dict(s);
  out.status = dict.solve();
  out.iterations = dict.iterations();
  if (out.status != LpStatus::kOptimal) return out;

  const std::vector<double> xs = dict.primal();
  const std::vector<double> ys = dict.duals();
  const double sign = problem.sense == Sense::kMaximize ? 1.0 : -1.0;
  out.x.assign(problem.num_vars(), 0.0);
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    out.x[j] = s.shift[j] + (s.column_of[j] >= 0 ? xs[s.column_of[j]] : 0.0);
    const double lo = problem.lower.empty() ? 0.0 : problem.lower[j];
    const double hi = problem.upper.empty() ? kNoBound : problem.upper[j];
    out.x[j] = std::clamp(out.x[j], lo, std::max(lo, hi));
  }
  double obj = 0.0;
  for (std::size_t j = 0; j < problem.num_vars(); ++j) obj += problem.objective[j] * out.x[j];
  out.objective = obj;
  out.duals.assign(problem.num_rows(), 0.0);
  for (int i = 0; i < s.m; ++i) {
    if (s.origin[i] >= 0) out.duals[s.origin[i]] += s.factor[i] * ys[i];
  }
  out.dual_verified = verify_dual(s, xs, ys, dict.objective(), &out.dual_objective);
  out.dual_objective = sign * (out.dual_objective + s.offset);
  out.max_row_violation = max_violation(problem, out.x);
  return out;
}

}  // namespace scenred::lp
