#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>

#include "lp_test_oracles.hpp"
#include "nodal/linprog.hpp"

using namespace nodal::linprog;
using nodal::kInf;
using lptest::check_lp_certificate;
using lptest::enumerate_vertices;
using lptest::random_boxed_lp;

namespace {

LpModel knapsack_milp() {
  // max 5a + 4b  s.t. 3a + 2b <= 4, a,b binary
  LpModel m;
  m.sense = Sense::Maximize;
  int a = m.add_variable("a", 0, 1, 5, VarKind::Binary);
  int b = m.add_variable("b", 0, 1, 4, VarKind::Binary);
  m.add_constraint("cap", -kInf, 4, {{a, 3}, {b, 2}});
  return m;
}

}  // namespace

TEST_CASE("one-variable lower-bounded minimization recovers the bound and its dual") {
  LpModel m;
  m.sense = Sense::Minimize;
  int x = m.add_variable("x", -kInf, kInf, 1);
  m.add_constraint("floor", 1, kInf, {{x, 1}});
  auto s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.x[x] == Catch::Approx(1.0));
  CHECK(s.objective == Catch::Approx(1.0));
  CHECK(s.row_duals[0] == Catch::Approx(1.0));
  CHECK(check_lp_certificate(m, s).empty());
}

TEST_CASE("two-variable maximization with two active rows reports both duals") {
  LpModel m;
  m.sense = Sense::Maximize;
  int a = m.add_variable("a", 0, kInf, 3);
  int b = m.add_variable("b", 0, kInf, 2);
  m.add_constraint("sum", -kInf, 4, {{a, 1}, {b, 1}});
  m.add_constraint("cap_a", -kInf, 2, {{a, 1}});
  auto s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.x[a] == Catch::Approx(2.0));
  CHECK(s.x[b] == Catch::Approx(2.0));
  CHECK(s.objective == Catch::Approx(10.0));
  CHECK(s.row_duals[0] == Catch::Approx(2.0));
  CHECK(s.row_duals[1] == Catch::Approx(1.0));
  CHECK(check_lp_certificate(m, s).empty());
}

TEST_CASE("contradictory bound and row is reported infeasible") {
  LpModel m;
  int x = m.add_variable("x", -kInf, 0, 1);
  m.add_constraint("floor", 1, kInf, {{x, 1}});
  auto s = solve_lp(m);
  CHECK(s.status == SolveStatus::Infeasible);
}

TEST_CASE("maximization with an open ray is reported unbounded") {
  LpModel m;
  m.sense = Sense::Maximize;
  int x = m.add_variable("x", 0, kInf, 1);
  m.add_constraint("floor", 1, kInf, {{x, 1}});
  auto s = solve_lp(m);
  CHECK(s.status == SolveStatus::Unbounded);
}

TEST_CASE("equality row splits between two symmetric variables with unit dual") {
  LpModel m;
  m.sense = Sense::Minimize;
  int x = m.add_variable("x", 0, 5, 1);
  int y = m.add_variable("y", 0, 5, 1);
  m.add_constraint("pin", 2, 2, {{x, 1}, {y, 1}});
  auto s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == Catch::Approx(2.0));
  CHECK(s.row_duals[0] == Catch::Approx(1.0));
  CHECK(check_lp_certificate(m, s).empty());
}

TEST_CASE("free variable pinned through a pair of inequalities") {
  // min e subject to x + e >= 3 and x - e <= 3 with x free drives e to 0, x to 3.
  LpModel m;
  m.sense = Sense::Minimize;
  int x = m.add_variable("x", -kInf, kInf, 0);
  int e = m.add_variable("e", 0, kInf, 1);
  m.add_constraint("hi", 3, kInf, {{x, 1}, {e, 1}});
  m.add_constraint("lo", -kInf, 3, {{x, 1}, {e, -1}});
  auto s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == Catch::Approx(0.0).margin(1e-9));
  CHECK(s.x[x] == Catch::Approx(3.0));
  CHECK(check_lp_certificate(m, s).empty());
}

TEST_CASE("model with no rows is solved directly on the box") {
  LpModel m;
  m.sense = Sense::Maximize;
  int x = m.add_variable("x", -1, 2, 3);
  int y = m.add_variable("y", -4, 5, -2);
  auto s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.x[x] == Catch::Approx(2.0));
  CHECK(s.x[y] == Catch::Approx(-4.0));
  CHECK(s.objective == Catch::Approx(14.0));
  CHECK(check_lp_certificate(m, s).empty());
}

TEST_CASE("fixed variables participate as constants") {
  LpModel m;
  m.sense = Sense::Maximize;
  int x = m.add_variable("x", 2, 2, 1);
  int y = m.add_variable("y", 0, kInf, 1);
  m.add_constraint("cap", -kInf, 5, {{x, 1}, {y, 1}});
  auto s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.x[x] == Catch::Approx(2.0));
  CHECK(s.x[y] == Catch::Approx(3.0));
  CHECK(check_lp_certificate(m, s).empty());
}

TEST_CASE("classic degenerate cycling instance terminates at its optimum") {
  // Beale's example: pure Dantzig pricing cycles; the anti-cycling fallback
  // must still reach objective -1/20.
  LpModel m;
  m.sense = Sense::Minimize;
  int x4 = m.add_variable("x4", 0, kInf, -0.75);
  int x5 = m.add_variable("x5", 0, kInf, 150);
  int x6 = m.add_variable("x6", 0, kInf, -0.02);
  int x7 = m.add_variable("x7", 0, kInf, 6);
  m.add_constraint("r1", -kInf, 0, {{x4, 0.25}, {x5, -60}, {x6, -1.0 / 25}, {x7, 9}});
  m.add_constraint("r2", -kInf, 0, {{x4, 0.5}, {x5, -90}, {x6, -1.0 / 50}, {x7, 3}});
  m.add_constraint("r3", -kInf, 1, {{x6, 1}});
  auto s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == Catch::Approx(-0.05));
  CHECK(check_lp_certificate(m, s).empty());
}

TEST_CASE("iteration limit yields the limit status and a usable snapshot") {
  LpModel m;
  m.sense = Sense::Maximize;
  for (int j = 0; j < 6; ++j) m.add_variable("x" + std::to_string(j), 0, 10, 1 + j);
  for (int i = 0; i < 4; ++i) {
    std::vector<LinearTerm> t;
    for (int j = 0; j < 6; ++j) t.push_back({j, double(1 + (i + j) % 3)});
    m.add_constraint("r" + std::to_string(i), -kInf, 15, std::move(t));
  }
  SolverConfig cfg;
  cfg.max_simplex_iterations = 1;
  auto s = solve_lp(m, cfg);
  CHECK(s.status == SolveStatus::Limit);
  CHECK(s.x.size() == m.vars.size());
}

TEST_CASE("random boxed LPs match exhaustive vertex enumeration", "[property]") {
  std::mt19937 rng(20260816u);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    LpModel m = random_boxed_lp(rng);
    auto scan = enumerate_vertices(m);
    auto s = solve_lp(m);
    INFO("trial " << trial << "\n" << m.dump());
    if (!scan.feasible) {
      CHECK(s.status == SolveStatus::Infeasible);
      continue;
    }
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == Catch::Approx(scan.best).margin(1e-6));
    auto cert = check_lp_certificate(m, s);
    INFO("certificate: " << cert);
    CHECK(cert.empty());
    ++solved;
  }
  CHECK(solved > 100);  // the generator must actually exercise the solver
}

TEST_CASE("solver is deterministic down to the last bit", "[property]") {
  std::mt19937 rng(7u);
  for (int trial = 0; trial < 25; ++trial) {
    LpModel m = random_boxed_lp(rng);
    auto s1 = solve_lp(m);
    auto s2 = solve_lp(m);
    CHECK(s1.status == s2.status);
    CHECK(s1.iterations == s2.iterations);
    CHECK(s1.x == s2.x);
    CHECK(s1.row_duals == s2.row_duals);
    CHECK(s1.objective == s2.objective);
  }
}

TEST_CASE("binary knapsack picks the heavy item") {
  auto m = knapsack_milp();
  auto s = solve_milp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.x[0] == Catch::Approx(1.0));
  CHECK(s.x[1] == Catch::Approx(0.0).margin(1e-9));
  CHECK(s.objective == Catch::Approx(5.0));
  CHECK(s.row_duals.empty());  // duals are a pure-LP concept here
}

TEST_CASE("integral relaxation short-circuits to the LP answer") {
  LpModel m;
  m.sense = Sense::Maximize;
  int a = m.add_variable("a", 0, 1, 1, VarKind::Binary);
  int b = m.add_variable("b", 0, 1, 1, VarKind::Binary);
  m.add_constraint("cap", -kInf, 2, {{a, 1}, {b, 1}});
  auto lp = solve_lp(m);
  auto mip = solve_milp(m);
  REQUIRE(lp.status == SolveStatus::Optimal);
  REQUIRE(mip.status == SolveStatus::Optimal);
  CHECK(mip.objective == Catch::Approx(lp.objective));
  CHECK(mip.nodes == 1);
}

TEST_CASE("random mixed-binary instances match exhaustive enumeration", "[property]") {
  std::mt19937 rng(42u);
  std::uniform_int_distribution<int> nbin(1, 6), ncont(0, 2), nrows(1, 3);
  std::uniform_real_distribution<double> coef(-5, 5), obj(-10, 10), bound(0, 12);
  std::bernoulli_distribution maximize(0.5);
  for (int trial = 0; trial < 60; ++trial) {
    LpModel m;
    m.sense = maximize(rng) ? Sense::Maximize : Sense::Minimize;
    int nb = nbin(rng), nc = ncont(rng);
    for (int j = 0; j < nb; ++j)
      m.add_variable("u" + std::to_string(j), 0, 1, obj(rng), VarKind::Binary);
    for (int j = 0; j < nc; ++j)
      m.add_variable("x" + std::to_string(j), 0, bound(rng), obj(rng));
    int mm = nrows(rng);
    for (int i = 0; i < mm; ++i) {
      std::vector<LinearTerm> t;
      for (int j = 0; j < nb + nc; ++j) t.push_back({j, coef(rng)});
      m.add_constraint("r" + std::to_string(i), -kInf, bound(rng), std::move(t));
    }

    // Reference: enumerate every binary assignment, solve the continuous rest.
    bool any = false;
    double best = 0;
    for (int mask = 0; mask < (1 << nb); ++mask) {
      std::map<int, int> fix;
      for (int j = 0; j < nb; ++j) fix[j] = (mask >> j) & 1;
      auto sub = solve_lp(fix_binaries(m, fix));
      if (sub.status != SolveStatus::Optimal) continue;
      if (!any || (m.sense == Sense::Maximize ? sub.objective > best : sub.objective < best)) {
        best = sub.objective;
        any = true;
      }
    }

    auto s = solve_milp(m);
    INFO("trial " << trial << "\n" << m.dump());
    if (!any) {
      CHECK(s.status == SolveStatus::Infeasible);
      continue;
    }
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == Catch::Approx(best).margin(1e-6));
    for (int j = 0; j < nb; ++j) {
      double r = std::round(s.x[j]);
      CHECK(std::fabs(s.x[j] - r) < 1e-6);
    }
  }
}

TEST_CASE("branch and bound is deterministic", "[property]") {
  auto m = knapsack_milp();
  auto s1 = solve_milp(m);
  auto s2 = solve_milp(m);
  CHECK(s1.nodes == s2.nodes);
  CHECK(s1.x == s2.x);
  CHECK(s1.objective == s2.objective);
}

TEST_CASE("fixing binaries requires a complete assignment") {
  auto m = knapsack_milp();
  CHECK_THROWS_AS(fix_binaries(m, {}), nodal::ValidationError);
  CHECK_THROWS_AS(fix_binaries(m, {{0, 1}}), nodal::ValidationError);
  CHECK_THROWS_AS(fix_binaries(m, {{0, 1}, {1, 2}}), nodal::ValidationError);
}

TEST_CASE("fixing binaries at the optimum reproduces the MILP objective") {
  auto m = knapsack_milp();
  auto mip = solve_milp(m);
  REQUIRE(mip.status == SolveStatus::Optimal);
  std::map<int, int> fix;
  for (size_t j = 0; j < m.vars.size(); ++j)
    if (m.vars[j].kind == VarKind::Binary) fix[int(j)] = int(std::lround(mip.x[j]));
  auto fixed = fix_binaries(m, fix);
  for (const auto& v : fixed.vars) CHECK(v.kind == VarKind::Continuous);
  auto lp = solve_lp(fixed);
  REQUIRE(lp.status == SolveStatus::Optimal);
  CHECK(lp.objective == Catch::Approx(mip.objective));
  CHECK(check_lp_certificate(fixed, lp).empty());
}

TEST_CASE("debug dump uses the conventional text layout") {
  auto m = knapsack_milp();
  auto text = m.dump();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("Bounds") != std::string::npos);
  CHECK(text.find("Binaries") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
  CHECK(text.find("cap") != std::string::npos);
}

TEST_CASE("wide dynamic range keeps certificates intact") {
  LpModel m;
  m.sense = Sense::Minimize;
  int x = m.add_variable("x", 0, 1e5, 1e-3);
  int y = m.add_variable("y", 0, 1e5, 2e3);
  m.add_constraint("mix", 1e4, kInf, {{x, 1e-2}, {y, 1e2}});
  auto s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(check_lp_certificate(m, s, 1e-5).empty());
}
