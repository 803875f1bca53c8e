#include "scenred/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace scenred {

using nlohmann::json;

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kNegativity: return "negativity";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kSizeGuard: return "size-guard";
    case ErrorCode::kSolver: return "solver";
    case ErrorCode::kTimeLimit: return "time-limit";
  }
  return "unknown";
}

Scenario::Scenario(std::vector<double> costs) : costs_(std::move(costs)) {
  for (std::size_t j = 0; j < costs_.size(); ++j) {
    if (!std::isfinite(costs_[j])) {
      throw Error(ErrorCode::kValidation,
                  "non-finite cost at index " + std::to_string(j));
    }
    if (costs_[j] < 0.0) {
      throw Error(ErrorCode::kNegativity,
                  "negative cost at index " + std::to_string(j));
    }
  }
}

bool Scenario::is_zero() const {
  return std::all_of(costs_.begin(), costs_.end(),
                     [](double v) { return v == 0.0; });
}

double Scenario::max_entry() const {
  return costs_.empty() ? 0.0 : *std::max_element(costs_.begin(), costs_.end());
}

bool Scenario::dominated_by(const Scenario& other, double tol) const {
  if (other.dimension() != dimension()) return false;
  for (std::size_t j = 0; j < costs_.size(); ++j) {
    if (costs_[j] > other.costs_[j] + tol) return false;
  }
  return true;
}

Scenario Scenario::scaled(double factor) const {
  std::vector<double> out(costs_);
  for (double& v : out) v *= factor;
  return Scenario(std::move(out));
}

UncertaintySet::UncertaintySet(std::vector<Scenario> scenarios)
    : scenarios_(std::move(scenarios)) {
  if (scenarios_.empty()) {
    throw Error(ErrorCode::kValidation, "uncertainty set needs N >= 1");
  }
  const std::size_t n = scenarios_.front().dimension();
  if (n == 0) throw Error(ErrorCode::kValidation, "scenario dimension n must be >= 1");
  for (std::size_t i = 0; i < scenarios_.size(); ++i) {
    if (scenarios_[i].dimension() != n) {
      throw Error(ErrorCode::kDimension,
                  "scenario " + std::to_string(i) + " has dimension " +
                      std::to_string(scenarios_[i].dimension()) + ", expected " +
                      std::to_string(n));
    }
  }
}

UncertaintySet UncertaintySet::from_rows(const Matrix& rows) {
  std::vector<Scenario> s;
  s.reserve(rows.size());
  for (const auto& r : rows) s.emplace_back(r);
  return UncertaintySet(std::move(s));
}

double UncertaintySet::max_entry() const {
  double m = 0.0;
  for (const auto& s : scenarios_) m = std::max(m, s.max_entry());
  return m;
}

Matrix UncertaintySet::rows() const {
  Matrix out;
  out.reserve(scenarios_.size());
  for (const auto& s : scenarios_) out.push_back(s.values());
  return out;
}

UncertaintySet UncertaintySet::normalized() const {
  const double m = max_entry();
  if (m <= 0.0) return *this;
  std::vector<Scenario> s;
  s.reserve(scenarios_.size());
  for (const auto& c : scenarios_) s.push_back(c.scaled(1.0 / m));
  return UncertaintySet(std::move(s));
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kCont: return "cont";
    case Method::kIpMu: return "ip-mu";
    case Method::kIpLambda: return "ip-lambda";
    case Method::kKMeans: return "kmeans";
    case Method::kMidpoint: return "midpoint";
    case Method::kIp2: return "ip2";
    case Method::kGreedy2: return "greedy2";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::kCont, Method::kIpMu, Method::kIpLambda,
                   Method::kKMeans, Method::kMidpoint, Method::kIp2,
                   Method::kGreedy2}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::kValidation, "unknown method '" + std::string(name) + "'");
}

double guarantee_from_t(double t) { return t > 0.0 ? 1.0 / t : kInf; }

namespace {

std::string row_label(const char* what, std::size_t i) {
  return std::string(what) + " row " + std::to_string(i);
}

void check_stochastic(const Matrix& m, std::size_t rows, std::size_t cols,
                      const char* what, bool unit_rows) {
  if (m.size() != rows) {
    throw Error(ErrorCode::kValidation,
                std::string(what) + " has " + std::to_string(m.size()) +
                    " rows, expected " + std::to_string(rows));
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (m[i].size() != cols) {
      throw Error(ErrorCode::kValidation, row_label(what, i) + " has wrong length");
    }
    double sum = 0.0;
    for (double v : m[i]) {
      if (!(v >= -kTolerance)) {
        throw Error(ErrorCode::kValidation, row_label(what, i) + " has a negative entry");
      }
      if (unit_rows && std::abs(v) > kTolerance && std::abs(v - 1.0) > kTolerance) {
        throw Error(ErrorCode::kValidation, row_label(what, i) + " is not a unit vector");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kTolerance * std::max<double>(1.0, cols)) {
      throw Error(ErrorCode::kValidation, row_label(what, i) + " does not sum to 1");
    }
  }
}

}  // namespace

void validate_reduction(const UncertaintySet& u, const ReductionResult& r) {
  const std::size_t n_scen = u.size();
  const std::size_t k = r.k();
  if (k == 0) throw Error(ErrorCode::kValidation, "reduced set is empty");
  if (r.stage != 1 && r.stage != 2) {
    throw Error(ErrorCode::kValidation, "stage must be 1 or 2");
  }
  for (std::size_t q = 0; q < k; ++q) {
    if (r.reduced[q].dimension() != u.dimension()) {
      throw Error(ErrorCode::kDimension,
                  "reduced scenario " + std::to_string(q) + " has wrong dimension");
    }
  }
  const bool unit = r.stage == 2;
  check_stochastic(r.lambda, k, n_scen, "lambda", unit);
  check_stochastic(r.mu, n_scen, k, "mu", unit);
  const double scale = std::max(1.0, u.max_entry());
  for (std::size_t q = 0; q < k; ++q) {
    for (std::size_t j = 0; j < u.dimension(); ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < n_scen; ++i) v += r.lambda[q][i] * u[i][j];
      if (std::abs(v - r.reduced[q][j]) > 1e-6 * scale) {
        throw Error(ErrorCode::kValidation,
                    "reduced scenario " + std::to_string(q) +
                        " is not the lambda-combination of U at index " +
                        std::to_string(j));
      }
    }
  }
  if (r.t < 0.0 || r.t > 1.0 + 1e-9) {
    throw Error(ErrorCode::kValidation, "t must lie in [0, 1]");
  }
  if (r.t > 0.0 && std::abs(r.guarantee * r.t - 1.0) > 1e-9) {
    throw Error(ErrorCode::kValidation, "guarantee * t != 1");
  }
  if (r.t == 0.0 && std::isfinite(r.guarantee)) {
    throw Error(ErrorCode::kValidation, "t = 0 requires an infinite guarantee");
  }
}

std::string to_string(ProblemKind kind) {
  return kind == ProblemKind::kSelection ? "selection" : "vertex-cover";
}

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "selection") return ProblemKind::kSelection;
  if (name == "vertex-cover") return ProblemKind::kVertexCover;
  throw Error(ErrorCode::kValidation, "unknown problem kind '" + std::string(name) + "'");
}

void RobustInstance::validate() const {
  if (n < 1) throw Error(ErrorCode::kValidation, "instance needs n >= 1");
  if (stages != 1 && stages != 2) {
    throw Error(ErrorCode::kValidation, "stages must be 1 or 2");
  }
  if (kind == ProblemKind::kSelection && (p < 1 || p > n)) {
    throw Error(ErrorCode::kValidation, "selection needs 1 <= p <= n");
  }
  if (kind == ProblemKind::kVertexCover) {
    for (const auto& [a, b] : edges) {
      if (a < 0 || b < 0 || a >= n || b >= n) {
        throw Error(ErrorCode::kValidation, "edge references a node outside [0, n)");
      }
    }
  }
  if (stages == 2) {
    if (first_stage_costs.size() != static_cast<std::size_t>(n)) {
      throw Error(ErrorCode::kDimension, "first_stage_costs must have n entries");
    }
    for (double v : first_stage_costs) {
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::kNegativity, "first-stage costs must be finite and >= 0");
      }
    }
  }
}

std::vector<std::vector<int>> RobustInstance::closed_neighborhoods() const {
  std::vector<std::vector<int>> nb(n);
  for (int v = 0; v < n; ++v) nb[v].push_back(v);
  for (const auto& [a, b] : edges) {
    if (a == b) continue;
    nb[a].push_back(b);
    nb[b].push_back(a);
  }
  for (auto& list : nb) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nb;
}

UncertaintySet filter_dominated(const UncertaintySet& u) {
  std::vector<Scenario> kept;
  for (std::size_t i = 0; i < u.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < u.size() && !drop; ++j) {
      if (j == i || !u[i].dominated_by(u[j])) continue;
      // Mutual domination means equal within tolerance: keep the first.
      drop = !u[j].dominated_by(u[i]) || j < i;
    }
    if (!drop) kept.push_back(u[i]);
  }
  return UncertaintySet(std::move(kept));
}

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  if (v == std::floor(v) && std::abs(v) < 9007199254740992.0) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

json vector_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json matrix_json(const Matrix& m) {
  json a = json::array();
  for (const auto& row : m) a.push_back(vector_json(row));
  return a;
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("JSON parse error: ") + e.what());
  }
}

const json& field(const json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) {
    throw Error(ErrorCode::kParse, std::string("missing field '") + name + "'");
  }
  return doc.at(name);
}

double read_number(const json& v, bool allow_null_inf = false) {
  if (allow_null_inf && v.is_null()) return kInf;
  if (!v.is_number()) throw Error(ErrorCode::kParse, "expected a number");
  return v.get<double>();
}

std::vector<double> read_vector(const json& v) {
  if (!v.is_array()) throw Error(ErrorCode::kParse, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(read_number(x));
  return out;
}

Matrix read_matrix(const json& v) {
  if (!v.is_array()) throw Error(ErrorCode::kParse, "expected an array of arrays");
  Matrix out;
  for (const auto& row : v) out.push_back(read_vector(row));
  return out;
}

int read_int(const json& v) {
  if (!v.is_number_integer()) throw Error(ErrorCode::kParse, "expected an integer");
  return v.get<int>();
}

}  // namespace

UncertaintySet load_uncertainty_set(std::string_view text) {
  const json doc = parse(text);
  const int n = read_int(field(doc, "n"));
  const Matrix rows = read_matrix(field(doc, "scenarios"));
  if (n < 1) throw Error(ErrorCode::kValidation, "n must be >= 1");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(n)) {
      throw Error(ErrorCode::kDimension,
                  "scenario " + std::to_string(i) + " has " +
                      std::to_string(rows[i].size()) + " entries, expected " +
                      std::to_string(n));
    }
  }
  return UncertaintySet::from_rows(rows);
}

std::string save_uncertainty_set(const UncertaintySet& u) {
  json doc;
  doc["n"] = u.dimension();
  doc["scenarios"] = matrix_json(u.rows());
  return doc.dump() + "\n";
}

ReductionResult load_reduction_result(std::string_view text) {
  const json doc = parse(text);
  ReductionResult r;
  const json& method = field(doc, "method");
  if (!method.is_string()) throw Error(ErrorCode::kParse, "method must be a string");
  r.method = parse_method(method.get<std::string>());
  r.stage = read_int(field(doc, "stage"));
  const int k = read_int(field(doc, "K"));
  r.t = read_number(field(doc, "t"));
  r.guarantee = read_number(field(doc, "guarantee"), true);
  for (auto& row : read_matrix(field(doc, "reduced"))) r.reduced.emplace_back(row);
  r.lambda = read_matrix(field(doc, "lambda"));
  r.mu = read_matrix(field(doc, "mu"));
  if (doc.contains("exact")) r.exact = doc.at("exact").get<bool>();
  if (doc.contains("gap")) r.gap = read_number(doc.at("gap"), true);
  if (static_cast<std::size_t>(k) != r.reduced.size()) {
    throw Error(ErrorCode::kValidation, "K does not match the number of reduced scenarios");
  }
  return r;
}

std::string save_reduction_result(const ReductionResult& r) {
  json doc;
  doc["method"] = to_string(r.method);
  doc["stage"] = r.stage;
  doc["K"] = r.k();
  doc["t"] = number(r.t);
  doc["guarantee"] = number(r.guarantee);
  doc["exact"] = r.exact;
  doc["gap"] = number(r.gap);
  Matrix reduced;
  for (const auto& s : r.reduced) reduced.push_back(s.values());
  doc["reduced"] = matrix_json(reduced);
  doc["lambda"] = matrix_json(r.lambda);
  doc["mu"] = matrix_json(r.mu);
  return doc.dump() + "\n";
}

RobustInstance load_robust_instance(std::string_view text) {
  const json doc = parse(text);
  RobustInstance inst;
  const json& kind = field(doc, "kind");
  if (!kind.is_string()) throw Error(ErrorCode::kParse, "kind must be a string");
  inst.kind = parse_problem_kind(kind.get<std::string>());
  inst.stages = read_int(field(doc, "stages"));
  inst.n = read_int(field(doc, "n"));
  if (doc.contains("p")) inst.p = read_int(doc.at("p"));
  if (doc.contains("edges")) {
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) {
        throw Error(ErrorCode::kParse, "edges must be pairs");
      }
      inst.edges.emplace_back(read_int(e[0]), read_int(e[1]));
    }
  }
  if (doc.contains("first_stage_costs")) {
    inst.first_stage_costs = read_vector(doc.at("first_stage_costs"));
  }
  inst.validate();
  return inst;
}

std::string save_robust_instance(const RobustInstance& inst) {
  json doc;
  doc["kind"] = to_string(inst.kind);
  doc["stages"] = inst.stages;
  doc["n"] = inst.n;
  if (inst.kind == ProblemKind::kSelection) doc["p"] = inst.p;
  if (inst.kind == ProblemKind::kVertexCover) {
    json e = json::array();
    for (const auto& [a, b] : inst.edges) e.push_back({a, b});
    doc["edges"] = e;
  }
  if (inst.stages == 2) doc["first_stage_costs"] = vector_json(inst.first_stage_costs);
  return doc.dump() + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kValidation, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kValidation, "cannot write '" + path + "'");
  out << contents;
}

}  // namespace scenred
