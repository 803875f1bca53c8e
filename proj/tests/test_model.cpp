#include <functional>
#include <random>

#include "doctest.h"
#include "scenred/model.hpp"

using namespace scenred;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kSolver;
}

bool antichain(const UncertaintySet& u) {
  for (std::size_t a = 0; a < u.size(); ++a)
    for (std::size_t b = 0; b < u.size(); ++b)
      if (a != b && u[a].dominated_by(u[b])) return false;
  return true;
}

}  // namespace

TEST_CASE("load two-scenario set") {
  const auto u = load_uncertainty_set(R"({"n":2,"scenarios":[[4,2],[2,3]]})");
  CHECK(u.size() == 2);
  CHECK(u.dimension() == 2);
  CHECK(u[0] == Scenario{4, 2});
  CHECK(u[1] == Scenario{2, 3});
}

TEST_CASE("single zero scenario is valid") {
  const auto u = load_uncertainty_set(R"({"n":1,"scenarios":[[0]]})");
  CHECK(u.size() == 1);
  CHECK(u[0].is_zero());
}

TEST_CASE("load errors") {
  CHECK(code_of([] { load_uncertainty_set(R"({"n":2,"scenarios":[[4,-1]]})"); }) ==
        ErrorCode::kNegativity);
  CHECK(code_of([] { load_uncertainty_set(R"({"n":2,"scenarios":[[4,1,1]]})"); }) ==
        ErrorCode::kDimension);
  CHECK(code_of([] { load_uncertainty_set(R"({"n":2,"scenarios":)"); }) == ErrorCode::kParse);
  CHECK(code_of([] { load_uncertainty_set(R"({"scenarios":[[1]]})"); }) == ErrorCode::kParse);
  CHECK(code_of([] { load_uncertainty_set(R"({"n":1,"scenarios":[]})"); }) ==
        ErrorCode::kValidation);
}

TEST_CASE("round trip is bit exact") {
  const auto u = load_uncertainty_set(
      R"({"n":3,"scenarios":[[0.1,2.5,3],[1e-3,7.25,0],[123.456,0.3,9.999]]})");
  const auto again = load_uncertainty_set(save_uncertainty_set(u));
  CHECK(again == u);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 1000.0);
  Matrix rows(20, std::vector<double>(5));
  for (auto& r : rows)
    for (auto& v : r) v = dist(rng);
  const auto w = UncertaintySet::from_rows(rows);
  CHECK(load_uncertainty_set(save_uncertainty_set(w)) == w);
}

TEST_CASE("integers are written without fraction") {
  const auto u = UncertaintySet::from_rows({{4, 2}, {2, 3}});
  const std::string text = save_uncertainty_set(u);
  CHECK(text.find("4.0") == std::string::npos);
  CHECK(text.find('4') != std::string::npos);
}

TEST_CASE("filter_dominated examples") {
  const auto a = filter_dominated(UncertaintySet::from_rows({{4, 2}, {2, 3}}));
  CHECK(a == UncertaintySet::from_rows({{4, 2}, {2, 3}}));
  const auto b = filter_dominated(UncertaintySet::from_rows({{4, 2}, {2, 3}, {2, 2}}));
  CHECK(b == UncertaintySet::from_rows({{4, 2}, {2, 3}}));
  const auto c = filter_dominated(UncertaintySet::from_rows({{1, 1}, {1, 1}}));
  CHECK(c == UncertaintySet::from_rows({{1, 1}}));
}

TEST_CASE("filter_dominated is idempotent and yields an antichain") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dist(0, 4);
  for (int rep = 0; rep < 200; ++rep) {
    Matrix rows(8, std::vector<double>(3));
    for (auto& r : rows)
      for (auto& v : r) v = dist(rng);
    const auto f = filter_dominated(UncertaintySet::from_rows(rows));
    CHECK(antichain(f));
    CHECK(filter_dominated(f) == f);
  }
}

TEST_CASE("reduction result round trip and validation") {
  const auto u = UncertaintySet::from_rows({{4, 2}, {2, 3}});
  ReductionResult r;
  r.method = Method::kIpLambda;
  r.reduced = {Scenario{4, 2}};
  r.lambda = {{1, 0}};
  r.mu = {{1}, {1}};
  r.t = 2.0 / 3.0;
  r.guarantee = 1.5;
  CHECK_NOTHROW(validate_reduction(u, r));
  const auto back = load_reduction_result(save_reduction_result(r));
  CHECK(back.method == r.method);
  CHECK(back.stage == 1);
  CHECK(back.reduced == r.reduced);
  CHECK(back.lambda == r.lambda);
  CHECK(back.mu == r.mu);
  CHECK(back.t == r.t);
  CHECK(back.guarantee == r.guarantee);

  auto bad = r;
  bad.lambda = {{0.5, 0.4}};
  CHECK(code_of([&] { validate_reduction(u, bad); }) == ErrorCode::kValidation);
  bad = r;
  bad.reduced = {Scenario{3, 3}};
  CHECK(code_of([&] { validate_reduction(u, bad); }) == ErrorCode::kValidation);
  bad = r;
  bad.guarantee = 2.0;
  CHECK(code_of([&] { validate_reduction(u, bad); }) == ErrorCode::kValidation);
  bad = r;
  bad.stage = 2;
  bad.reduced = {Scenario{3, 2.5}};
  bad.lambda = {{0.5, 0.5}};
  CHECK(code_of([&] { validate_reduction(u, bad); }) == ErrorCode::kValidation);
}

TEST_CASE("zero t round trips with infinite guarantee") {
  ReductionResult r;
  r.reduced = {Scenario{0}};
  r.lambda = {{1}};
  r.mu = {{1}};
  r.t = 0.0;
  r.guarantee = kInf;
  const auto back = load_reduction_result(save_reduction_result(r));
  CHECK(back.guarantee == kInf);
}

TEST_CASE("robust instance validation") {
  RobustInstance sel;
  sel.n = 3;
  sel.p = 4;
  CHECK(code_of([&] { sel.validate(); }) == ErrorCode::kValidation);
  sel.p = 2;
  CHECK_NOTHROW(sel.validate());

  RobustInstance vc;
  vc.kind = ProblemKind::kVertexCover;
  vc.n = 2;
  vc.edges = {{0, 2}};
  CHECK(code_of([&] { vc.validate(); }) == ErrorCode::kValidation);
  vc.edges = {{0, 1}};
  CHECK_NOTHROW(vc.validate());
  const auto nb = vc.closed_neighborhoods();
  CHECK(nb.size() == 2);

  const auto back = load_robust_instance(save_robust_instance(vc));
  CHECK(back.kind == ProblemKind::kVertexCover);
  CHECK(back.edges == vc.edges);
}

TEST_CASE("method names round trip") {
  for (Method m : {Method::kCont, Method::kIpMu, Method::kIpLambda, Method::kKMeans,
                   Method::kMidpoint, Method::kIp2, Method::kGreedy2})
    CHECK(parse_method(to_string(m)) == m);
  CHECK(code_of([] { parse_method("nope"); }) == ErrorCode::kValidation);
}
