#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "scenred/guarantee.hpp"

using namespace scenred;

namespace {

const UncertaintySet kU = UncertaintySet::from_rows({{4, 2}, {2, 3}});

UncertaintySet random_set(std::mt19937_64& rng, int n_scen, int n, int hi = 10) {
  std::uniform_int_distribution<int> dist(0, hi);
  Matrix rows(static_cast<std::size_t>(n_scen), std::vector<double>(static_cast<std::size_t>(n)));
  for (auto& r : rows)
    for (auto& v : r) v = dist(rng) + 1;
  return UncertaintySet::from_rows(rows);
}

// One-stage single-candidate guarantee from the definition, with a grid over
// the convex weight for beta (two scenarios only).
double single_one_stage_oracle(const UncertaintySet& u, const std::vector<double>& c) {
  double alpha = 0.0;
  for (const auto& s : u) alpha = std::max(alpha, oracle::scale(s.values(), c));
  const double beta = oracle::cover_two(c, u[0].values(), u[1].values());
  return alpha * beta;
}

ReductionResult stage2(std::vector<Scenario> reduced, Matrix lambda, Matrix mu, double t) {
  ReductionResult r;
  r.method = Method::kIp2;
  r.stage = 2;
  r.reduced = std::move(reduced);
  r.lambda = std::move(lambda);
  r.mu = std::move(mu);
  r.t = t;
  r.guarantee = guarantee_from_t(t);
  return r;
}

}  // namespace

TEST_CASE("alpha examples") {
  const std::vector<Scenario> c1{Scenario{4, 3}};
  CHECK(alpha_one_stage(kU, c1).factor == doctest::Approx(1.0));
  const auto single = UncertaintySet::from_rows({{4, 2}});
  CHECK(alpha_one_stage(single, single.scenarios()).factor == doctest::Approx(1.0));
  const std::vector<Scenario> c2{Scenario{3.2, 2.4}};
  const auto a = alpha_one_stage(kU, c2);
  CHECK(a.factor == doctest::Approx(1.25));
  double grid = 0.0;
  for (const auto& s : kU) grid = std::max(grid, oracle::scale(s.values(), c2[0].values()));
  CHECK(a.factor == doctest::Approx(grid).epsilon(1e-6));
}

TEST_CASE("alpha infeasibility is reported per scenario") {
  const auto u = UncertaintySet::from_rows({{1, 0}, {0, 1}});
  const std::vector<Scenario> c{Scenario{1, 0}};
  const auto a = alpha_one_stage(u, c);
  CHECK(a.factor == kInf);
  REQUIRE(a.per_target.size() == 2);
  CHECK(a.per_target[0] == doctest::Approx(1.0));
  CHECK(a.per_target[1] == kInf);
}

TEST_CASE("beta examples") {
  const std::vector<Scenario> c1{Scenario{4, 3}};
  const auto b = beta_one_stage(c1, kU);
  CHECK(b.factor == doctest::Approx(1.25));
  REQUIRE(b.witnesses.size() == 1);
  CHECK(b.witnesses[0][0] == doctest::Approx(0.6));
  CHECK(b.witnesses[0][1] == doctest::Approx(0.4));
  CHECK(b.factor ==
        doctest::Approx(oracle::cover_two(c1[0].values(), kU[0].values(), kU[1].values()))
            .epsilon(1e-6));
  const std::vector<Scenario> c2{Scenario{2, 3}};
  CHECK(beta_one_stage(c2, kU).factor == doctest::Approx(1.0));
  const std::vector<Scenario> c3{Scenario{0, 0}};
  CHECK(beta_one_stage(c3, kU).factor == doctest::Approx(0.0));
}

TEST_CASE("single-candidate guarantees") {
  CHECK(guarantee_single_one_stage(kU, Scenario{4, 3}) == doctest::Approx(1.25));
  CHECK(guarantee_single_one_stage(kU, Scenario{8, 6}) == doctest::Approx(1.25));
  const auto single = UncertaintySet::from_rows({{3, 1, 2}});
  CHECK(guarantee_single_one_stage(single, single[0]) == doctest::Approx(1.0));
  CHECK(guarantee_single_two_stage(kU, Scenario{4, 2}) == doctest::Approx(1.5));
  CHECK(guarantee_single_two_stage(kU, Scenario{8, 4}) == doctest::Approx(2.0));
  CHECK(guarantee_single_two_stage(single, single[0]) == doctest::Approx(1.0));
  CHECK(guarantee_single_one_stage(kU, Scenario{0, 1}) == kInf);
}

TEST_CASE("one-stage single guarantee matches grid oracle and is scale invariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0.2, 6.0);
  std::uniform_real_distribution<double> sdist(0.1, 10.0);
  for (int rep = 0; rep < 40; ++rep) {
    const auto u = random_set(rng, 2, 2 + static_cast<int>(rng() % 2));
    std::vector<double> c(u.dimension());
    for (auto& v : c) v = dist(rng);
    const double g = guarantee_single_one_stage(u, Scenario(c));
    CHECK(g == doctest::Approx(single_one_stage_oracle(u, c)).epsilon(1e-3));
    const double s = sdist(rng);
    CHECK(std::abs(guarantee_single_one_stage(u, Scenario(c).scaled(s)) - g) <= 1e-6 * g);
  }
}

TEST_CASE("two-stage single optimum is attained inside U") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_set(rng, 3, 2);
    double best_member = kInf;
    for (const auto& s : u) best_member = std::min(best_member, guarantee_single_two_stage(u, s));
    double best_grid = kInf;
    for (int q = 0; q < 2000; ++q) {
      double a = w(rng), b = w(rng), c = w(rng);
      const double total = a + b + c;
      std::vector<double> p(2);
      for (std::size_t j = 0; j < 2; ++j) p[j] = (a * u[0][j] + b * u[1][j] + c * u[2][j]) / total;
      best_grid = std::min(best_grid, guarantee_single_two_stage(u, Scenario(p)));
    }
    CHECK(best_member <= best_grid + 1e-6);
  }
}

TEST_CASE("alpha of U against itself is one") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_set(rng, 6, 4);
    CHECK(alpha_one_stage(u, u.scenarios()).factor == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("d_matrix examples") {
  const auto d = d_matrix(kU);
  CHECK(d(0, 0) == doctest::Approx(1.0));
  CHECK(d(0, 1) == doctest::Approx(0.5));
  CHECK(d(1, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(d(1, 1) == doctest::Approx(1.0));
  const auto e = d_matrix(UncertaintySet::from_rows({{1, 0}, {0, 1}}));
  CHECK(e.d == Matrix{{1, 0}, {0, 1}});
  const auto f = d_matrix(UncertaintySet::from_rows({{2, 2}, {1, 1}}));
  CHECK(f(1, 0) == doctest::Approx(2.0));
  CHECK(f(0, 1) == doctest::Approx(0.5));
  const auto z = d_matrix(UncertaintySet::from_rows({{0, 0}, {1, 1}}));
  CHECK(z(0, 0) == kInf);
  CHECK(z(0, 1) == kInf);
}

TEST_CASE("d_matrix properties") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 30; ++rep) {
    const auto u = random_set(rng, 6, 3);
    const auto d = d_matrix(u);
    CHECK(d.d == oracle::d_matrix(u));
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(d(i, i) == 1.0);
    for (std::size_t a = 0; a < u.size(); ++a)
      for (std::size_t b = 0; b < u.size(); ++b)
        if (u[a].dominated_by(u[b], 0.0))
          for (std::size_t i = 0; i < u.size(); ++i) CHECK(d(i, a) <= d(i, b));
    // Scaling a column scenario scales the column.
    const double s = 2.5;
    auto rows = u.rows();
    for (auto& v : rows[0]) v *= s;
    const auto ds = d_matrix(UncertaintySet::from_rows(rows));
    for (std::size_t i = 1; i < u.size(); ++i) CHECK(ds(i, 0) == doctest::Approx(s * d(i, 0)));
  }
}

TEST_CASE("verify_certificate examples") {
  ReductionResult keep;
  keep.method = Method::kIpLambda;
  keep.reduced = kU.scenarios();
  keep.lambda = {{1, 0}, {0, 1}};
  keep.mu = {{1, 0}, {0, 1}};
  keep.t = 1.0;
  keep.guarantee = 1.0;
  const auto v = verify_certificate(kU, keep);
  REQUIRE(v.ok());
  CHECK(v.certificate->alpha * v.certificate->beta == doctest::Approx(1.0));

  const auto pass = verify_certificate(kU, stage2({kU[0]}, {{1, 0}}, {{1}, {1}}, 2.0 / 3.0));
  CHECK(pass.ok());
  const auto fail = verify_certificate(kU, stage2({kU[1]}, {{0, 1}}, {{1}, {1}}, 2.0 / 3.0));
  REQUIRE_FALSE(fail.ok());
  CHECK(fail.failure->index == 0);
  CHECK_FALSE(fail.failure->message().empty());
}

TEST_CASE("verify_certificate rejects an overclaimed one-stage guarantee") {
  ReductionResult r;
  r.method = Method::kCont;
  r.reduced = {Scenario{3, 2.5}};
  r.lambda = {{0.5, 0.5}};
  r.mu = {{1}, {1}};
  r.t = 1.0;
  r.guarantee = 1.0;
  CHECK_FALSE(verify_certificate(kU, r).ok());
}

TEST_CASE("heatmap minima") {
  const GridAxis axis{0.1, 6.0, 0.01};
  CHECK(axis.count() == 591);
  const auto h1 = heatmap(kU, axis, axis, 1);
  double m1 = kInf;
  for (const auto& c : h1) m1 = std::min(m1, c.guarantee);
  CHECK(std::abs(m1 - 1.25) <= 1e-6);

  const auto h2 = heatmap(kU, axis, axis, 2);
  double m2 = kInf, at = kInf;
  for (const auto& c : h2) {
    m2 = std::min(m2, c.guarantee);
    if (std::abs(c.x - 4.0) < 1e-9 && std::abs(c.y - 2.0) < 1e-9) at = c.guarantee;
  }
  CHECK(std::abs(m2 - 1.5) <= 1e-6);
  CHECK(std::abs(at - m2) <= 1e-9);
  for (const auto& c : h2) {
    CHECK(c.guarantee <= kHeatmapCap);
    if (c.capped) CHECK(c.guarantee == kHeatmapCap);
  }
  CHECK(heatmap_csv(h2).rfind("x,y,guarantee,capped\n", 0) == 0);
}

TEST_CASE("heatmap at a member of U") {
  const GridAxis xs{4.0, 4.0, 1.0};
  const GridAxis ys{2.0, 2.0, 1.0};
  const auto h = heatmap(kU, xs, ys, 2);
  REQUIRE(h.size() == 1);
  // alpha = max(1, 2/4, 3/2), beta = 1.
  CHECK(h[0].guarantee == doctest::Approx(1.5));
}

TEST_CASE("heatmap needs two dimensions") {
  const auto u = UncertaintySet::from_rows({{1, 2, 3}});
  CHECK_THROWS_AS(heatmap(u, {}, {}, 1), Error);
}

TEST_CASE("partition_bound") {
  CHECK(partition_bound(std::vector<int>{4, 3, 3}) == 4);
  CHECK(partition_bound(std::vector<int>{1}) == 1);
  const int sizes[] = {4, 3, 3};  // N = 10, K = 3 balanced
  CHECK(partition_bound(sizes) == (10 + 2) / 3);
  CHECK_THROWS_AS(partition_bound(std::vector<int>{}), Error);
}

TEST_CASE("two_stage_factors of a single member") {
  const std::vector<Scenario> c{kU[0]};
  const auto f = two_stage_factors(kU, c);
  CHECK(f.alpha == doctest::Approx(1.5));
  CHECK(f.beta == doctest::Approx(1.0));
}
