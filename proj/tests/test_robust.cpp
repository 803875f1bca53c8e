#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "scenred/reduce_one_stage.hpp"
#include "scenred/robust.hpp"

using namespace scenred;

namespace {

RobustInstance selection(int n, int p, int stages = 1, std::vector<double> first = {}) {
  RobustInstance inst;
  inst.kind = ProblemKind::kSelection;
  inst.n = n;
  inst.p = p;
  inst.stages = stages;
  inst.first_stage_costs = std::move(first);
  return inst;
}

RobustInstance vertex_cover(int n, std::vector<std::pair<int, int>> edges, int stages = 1,
                            std::vector<double> first = {}) {
  RobustInstance inst;
  inst.kind = ProblemKind::kVertexCover;
  inst.n = n;
  inst.edges = std::move(edges);
  inst.stages = stages;
  inst.first_stage_costs = std::move(first);
  return inst;
}

UncertaintySet random_set(std::mt19937_64& rng, int n_scen, int n, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  Matrix rows(static_cast<std::size_t>(n_scen), std::vector<double>(static_cast<std::size_t>(n)));
  for (auto& r : rows)
    for (auto& v : r) v = dist(rng);
  return UncertaintySet::from_rows(rows);
}

std::vector<std::pair<int, int>> random_edges(std::mt19937_64& rng, int n, double prob) {
  std::bernoulli_distribution coin(prob);
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (coin(rng)) e.emplace_back(a, b);
  return e;
}

const UncertaintySet kU = UncertaintySet::from_rows({{4, 2}, {2, 3}});
const UncertaintySet kTable = UncertaintySet::from_rows({{1000, 0}, {0, 1000}});

}  // namespace

TEST_CASE("evaluate_one_stage") {
  CHECK(evaluate_one_stage(selection(2, 1), {0, 1}, kU) == doctest::Approx(3.0));
  CHECK(evaluate_one_stage(vertex_cover(2, {}), {1, 1}, UncertaintySet::from_rows({{0, 0}})) == 0.0);
  const auto one = UncertaintySet::from_rows({{3, 5, 7}});
  CHECK(evaluate_one_stage(selection(3, 2), {1, 0, 1}, one) == doctest::Approx(10.0));
  CHECK_THROWS_AS(evaluate_one_stage(selection(2, 1), {1, 1}, kU), Error);
}

TEST_CASE("solve_one_stage examples") {
  auto s = solve_one_stage(selection(2, 1), kU);
  CHECK(s.x == std::vector<int>{0, 1});
  CHECK(s.value == doctest::Approx(3.0));
  CHECK(s.exact);
  const auto one = UncertaintySet::from_rows({{7, 3, 9, 1, 4}});
  s = solve_one_stage(selection(5, 3), one);
  CHECK(s.value == doctest::Approx(8.0));
  s = solve_one_stage(vertex_cover(2, {{0, 1}}), UncertaintySet::from_rows({{5, 1}}));
  CHECK(s.x == std::vector<int>{0, 1});
  CHECK(s.value == doctest::Approx(1.0));
}

TEST_CASE("solve_one_stage matches enumeration") {
  std::mt19937_64 rng(201);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 9);
    const auto u = random_set(rng, 1 + static_cast<int>(rng() % 6), n, 0, 50);
    const auto inst = rep % 2 == 0 ? selection(n, 1 + static_cast<int>(rng() % static_cast<unsigned>(n)))
                                   : vertex_cover(n, random_edges(rng, n, 0.4));
    const auto s = solve_one_stage(inst, u);
    CHECK(s.value == doctest::Approx(oracle::robust_one_stage(inst, u)));
    CHECK(evaluate_one_stage(inst, s.x, u) == doctest::Approx(s.value));
  }
}

TEST_CASE("second-stage selection") {
  auto r = second_stage_selection({0, 0}, Scenario{1000, 0}, 1);
  CHECK(r.y == std::vector<int>{0, 1});
  CHECK(r.value == 0.0);
  r = second_stage_selection({1, 0}, Scenario{1000, 0}, 1);
  CHECK(r.value == 0.0);
  CHECK(r.y == std::vector<int>{0, 0});
  r = second_stage_selection({0, 0, 0}, Scenario{1, 2, 3}, 3);
  CHECK(r.value == doctest::Approx(6.0));
  CHECK_THROWS_AS(second_stage_selection({1, 1, 0}, Scenario{1, 2, 3}, 1), Error);
}

TEST_CASE("Table 1 instance") {
  const auto inst = selection(2, 1, 2, {1, 1});
  const auto full = solve_two_stage(inst, kTable);
  CHECK(full.x == std::vector<int>{0, 0});
  CHECK(full.value == doctest::Approx(0.0));
  const auto mid = UncertaintySet(std::vector<Scenario>{midpoint(kTable)});
  const auto reduced = solve_two_stage(inst, mid);
  CHECK(reduced.value == doctest::Approx(1.0));
  CHECK(evaluate_two_stage(inst, reduced.x, kTable) == doctest::Approx(1.0));
  CHECK(evaluate_two_stage(inst, {0, 0}, kTable) == 0.0);
  CHECK(evaluate_two_stage(inst, {1, 0}, kTable) == doctest::Approx(1.0));
}

TEST_CASE("two-stage selection with free or prohibitive first stage") {
  std::mt19937_64 rng(203);
  const auto u = random_set(rng, 4, 6, 0, 30);
  CHECK(solve_two_stage(selection(6, 3, 2, std::vector<double>(6, 0.0)), u).value == 0.0);
  const auto inst = selection(6, 3, 2, std::vector<double>(6, 1e6));
  double expect = 0.0;
  for (const auto& c : u) {
    auto v = c.values();
    std::sort(v.begin(), v.end());
    expect = std::max(expect, v[0] + v[1] + v[2]);
  }
  CHECK(solve_two_stage(inst, u).value == doctest::Approx(expect));
}

TEST_CASE("full first-stage cover leaves no recourse") {
  const auto inst = vertex_cover(3, {{0, 1}, {1, 2}}, 2, {2, 3, 4});
  const auto u = UncertaintySet::from_rows({{1, 1, 1}, {9, 9, 9}});
  CHECK(evaluate_two_stage(inst, {1, 1, 1}, u) == doctest::Approx(9.0));
  const auto rec = second_stage_vertex_cover(inst, {0, 0, 0}, Scenario{5, 1, 5});
  CHECK(rec.value == doctest::Approx(1.0));
  CHECK(rec.y == std::vector<int>{0, 1, 0});
}

TEST_CASE("two-stage solvers match enumeration") {
  std::mt19937_64 rng(207);
  std::uniform_int_distribution<int> cost(1, 40);
  for (int rep = 0; rep < 40; ++rep) {
    const bool sel = rep % 2 == 0;
    const int n = 2 + static_cast<int>(rng() % (sel ? 11 : 7));
    std::vector<double> first(static_cast<std::size_t>(n));
    for (auto& v : first) v = cost(rng);
    const auto u = random_set(rng, 1 + static_cast<int>(rng() % 5), n, 0, 60);
    const auto inst = sel ? selection(n, 1 + static_cast<int>(rng() % static_cast<unsigned>(n)), 2, first)
                          : vertex_cover(n, random_edges(rng, n, 0.4), 2, first);
    const auto s = solve_two_stage(inst, u);
    CHECK(s.exact);
    CHECK(s.value == doctest::Approx(oracle::robust_two_stage(inst, u)));
    CHECK(evaluate_two_stage(inst, s.x, u) == doctest::Approx(s.value));
  }
}

TEST_CASE("midpoint solution is within N of the optimum") {
  std::mt19937_64 rng(211);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 4 + static_cast<int>(rng() % 6);
    const auto u = random_set(rng, 2 + static_cast<int>(rng() % 6), n, 1, 100);
    const auto inst = selection(n, n / 2);
    const double opt = solve_one_stage(inst, u).value;
    const auto mid = UncertaintySet(std::vector<Scenario>{midpoint(u)});
    const double v = evaluate_one_stage(inst, solve_one_stage(inst, mid).x, u);
    CHECK(v <= static_cast<double>(u.size()) * opt + 1e-6);
    CHECK(v >= opt * (1 - 1e-9));
  }
}

TEST_CASE("solution serialization") {
  const auto s = solve_one_stage(selection(2, 1), kU);
  const auto j = save_robust_solution(s);
  CHECK(j.find("\"x\"") != std::string::npos);
  CHECK(j.find("\"value\"") != std::string::npos);
}
