#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "reserve/simplex.hpp"

using reserve::lp::maximize;
using reserve::lp::Status;

TEST_CASE("known optimum on a standard-form problem") {
  // max 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6, all >= 0.
  // Optimum at (4, 0): objective 12.
  auto r = maximize({{1, 1, 1, 0}, {1, 3, 0, 1}}, {4, 6}, {3, 2, 0, 0});
  REQUIRE(r.status == Status::optimal);
  CHECK(r.objective == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(r.x[0] == doctest::Approx(4.0));
  CHECK(r.x[1] == doctest::Approx(0.0));
}

TEST_CASE("infeasible system is reported") {
  // x + y = 1, x + y = 2 cannot hold.
  auto r = maximize({{1, 1}, {1, 1}}, {1, 2}, {1, 0});
  CHECK(r.status == Status::infeasible);
}

TEST_CASE("unbounded objective is reported") {
  // x - y = 0 with max x: ray x = y -> infinity.
  auto r = maximize({{1, -1}}, {0}, {1, 0});
  CHECK(r.status == Status::unbounded);
}

TEST_CASE("negative rhs rows are handled") {
  // -x - y = -3, max x -> x = 3.
  auto r = maximize({{-1, -1}}, {-3}, {1, 0});
  REQUIRE(r.status == Status::optimal);
  CHECK(r.objective == doctest::Approx(3.0));
}

TEST_CASE("redundant constraints do not break phase 2") {
  // Same row twice.
  auto r = maximize({{1, 1}, {1, 1}}, {1, 1}, {1, 2});
  REQUIRE(r.status == Status::optimal);
  CHECK(r.objective == doctest::Approx(2.0));
}

TEST_CASE("degenerate problems terminate (Bland)") {
  // Multiple constraints active at the optimum vertex.
  auto r = maximize({{1, 1, 1, 0, 0}, {1, 0, 0, 1, 0}, {0, 1, 0, 0, 1}},
                    {1, 1, 1}, {1, 1, 0, 0, 0});
  REQUIRE(r.status == Status::optimal);
  CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("random LPs: feasibility and complementary bounds") {
  // On random feasible problems max c.x over {Ax = b, x >= 0}, the optimum
  // must dominate the objective at the known feasible point used to build b.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    int m = 1 + trial % 4, n = m + 1 + trial % 5;
    std::vector<std::vector<double>> A(m, std::vector<double>(n));
    std::vector<double> x0(n), b(m, 0.0), c(n);
    for (auto& v : x0) v = pos(rng);
    for (auto& v : c) v = coef(rng);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        A[i][j] = coef(rng);
        b[i] += A[i][j] * x0[j];
      }
    auto r = maximize(A, b, c);
    REQUIRE(r.status != Status::infeasible);
    if (r.status != Status::optimal) continue;  // unbounded is legitimate
    double at_x0 = 0.0;
    for (int j = 0; j < n; ++j) at_x0 += c[j] * x0[j];
    CHECK(r.objective >= at_x0 - 1e-8);
    // Returned point satisfies the constraints.
    for (int i = 0; i < m; ++i) {
      double lhs = 0.0;
      for (int j = 0; j < n; ++j) lhs += A[i][j] * r.x[j];
      CHECK(lhs == doctest::Approx(b[i]).epsilon(1e-7).scale(1.0));
    }
    for (double v : r.x) CHECK(v >= -1e-9);
  }
}
