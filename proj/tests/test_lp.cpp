#include <doctest.h>

#include <random>
#include <sstream>

#include "duopt/errors.hpp"
#include "duopt/lp.hpp"
#include "oracles.hpp"

using namespace duopt;
using namespace duopt::testing;

namespace {

ConcreteLP toy_lp() {
  // min -x - y  s.t.  x + y <= 1,  x, y >= 0
  ConcreteLP lp;
  lp.add_var("x", 0.0, kInf);
  lp.add_var("y", 0.0, kInf);
  lp.obj = {-1.0, -1.0};
  LpRow row;
  row.coeffs = {{0, 1.0}, {1, 1.0}};
  row.rel = LpRel::Le;
  row.rhs = 1.0;
  lp.rows.push_back(row);
  return lp;
}

ConcreteLP random_bounded_lp(std::mt19937_64& rng, int max_vars = 6, int max_rows = 8) {
  std::uniform_int_distribution<int> nv(1, max_vars), nr(1, max_rows);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), ub(1.0, 10.0), slack(0.0, 2.0);
  const int n = nv(rng), m = nr(rng);
  ConcreteLP lp;
  std::vector<double> interior(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double u = ub(rng);
    lp.add_var("v" + std::to_string(j), 0.0, u);
    interior[static_cast<std::size_t>(j)] =
        std::uniform_real_distribution<double>(0.0, u)(rng);
    lp.obj.back() = coef(rng) * 5.0;
  }
  for (int r = 0; r < m; ++r) {
    LpRow row;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = coef(rng);
      if (std::fabs(a) < 0.05) continue;
      row.coeffs.emplace_back(j, a);
      act += a * interior[static_cast<std::size_t>(j)];
    }
    // equality rows pass exactly through the interior point, inequalities
    // keep positive slack, so the instance is always feasible
    if (r % 4 == 3 && !row.coeffs.empty()) {
      row.rel = LpRel::Eq;
      row.rhs = act;
    } else {
      row.rel = LpRel::Le;
      row.rhs = act + slack(rng);
    }
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

}  // namespace

TEST_SUITE("lp") {

TEST_CASE("simplex toy reaches the corner") {
  LPSolution sol = solve_lp(toy_lp());
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.0));
  CHECK(sol.x[0] + sol.x[1] == doctest::Approx(1.0));
  std::string why;
  CHECK_MESSAGE(verify_duality(toy_lp(), sol, 1e-6, &why), why);
}

TEST_CASE("contradictory bounds are infeasible") {
  ConcreteLP lp;
  lp.add_var("x", 0.0, -1.0);
  lp.obj = {1.0};
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("infeasible rows are detected") {
  ConcreteLP lp;
  lp.add_var("x", 0.0, kInf);
  lp.obj = {1.0};
  LpRow row;
  row.coeffs = {{0, 1.0}};
  row.rel = LpRel::Le;
  row.rhs = -1.0;  // x <= -1 with x >= 0
  lp.rows.push_back(row);
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded directions are reported") {
  ConcreteLP lp;
  lp.add_var("x", 0.0, kInf);
  lp.obj = {-1.0};
  CHECK(solve_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("maximization and free variables") {
  // max 2x + y  s.t.  x + y <= 4, x - y <= 2, y free in [-10, 10]
  ConcreteLP lp;
  lp.sense = Sense::Max;
  lp.add_var("x", 0.0, kInf);
  lp.add_var("y", -10.0, 10.0);
  lp.obj = {2.0, 1.0};
  LpRow r1;
  r1.coeffs = {{0, 1.0}, {1, 1.0}};
  r1.rhs = 4.0;
  LpRow r2;
  r2.coeffs = {{0, 1.0}, {1, -1.0}};
  r2.rhs = 2.0;
  lp.rows = {r1, r2};
  LPSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(7.0));  // x = 3, y = 1
  std::string why;
  CHECK_MESSAGE(verify_duality(lp, sol, 1e-6, &why), why);
}

TEST_CASE("fully free variables via splitting") {
  // min |shape|-free: min x s.t. x >= -7 expressed through a row
  ConcreteLP lp;
  lp.add_var("x", -kInf, kInf);
  lp.obj = {1.0};
  LpRow row;
  row.coeffs = {{0, -1.0}};
  row.rel = LpRel::Le;
  row.rhs = 7.0;  // -x <= 7
  lp.rows.push_back(row);
  LPSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-7.0));
}

TEST_CASE("oracle equivalence and duality on 500 random bounded-feasible LPs") {
  std::mt19937_64 rng(20240804);
  int optimal = 0;
  for (int trial = 0; trial < 500; ++trial) {
    ConcreteLP lp = random_bounded_lp(rng);
    CAPTURE(trial);
    LPSolution sol = solve_lp(lp);
    VertexOracleResult oracle = vertex_enumeration(lp);
    REQUIRE(oracle.feasible);  // generator guarantees a feasible interior point
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-7));
    std::string why;
    CHECK_MESSAGE(verify_duality(lp, sol, 1e-6, &why), why, " trial ", trial);
    ++optimal;
  }
  CHECK(optimal == 500);
}

TEST_CASE("determinism: identical inputs give identical pivots and solutions") {
  std::mt19937_64 rng(11);
  ConcreteLP lp = random_bounded_lp(rng);
  LPSolution a = solve_lp(lp);
  LPSolution b = solve_lp(lp);
  CHECK(a.iterations == b.iterations);
  CHECK(a.x == b.x);
  CHECK(a.objective == b.objective);
}

TEST_CASE("milp: fractional cap rounds down") {
  ConcreteLP lp;
  lp.sense = Sense::Max;
  lp.add_var("x", 0.0, kInf, VarKind::Integer);
  lp.obj = {1.0};
  LpRow row;
  row.coeffs = {{0, 1.0}};
  row.rhs = 1.5;
  lp.rows.push_back(row);
  LPSolution sol = solve_milp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("milp: integral relaxation needs no branching") {
  ConcreteLP lp = toy_lp();
  lp.kind = {VarKind::Integer, VarKind::Integer};
  LPSolution milp = solve_milp(lp);
  REQUIRE(milp.status == LpStatus::Optimal);
  CHECK(milp.objective == doctest::Approx(-1.0));
  CHECK(milp.nodes == 1);
}

TEST_CASE("milp: random binary knapsacks match exhaustive enumeration") {
  std::mt19937_64 rng(20240805);
  std::uniform_real_distribution<double> val(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 8);  // 5..12 variables
    ConcreteLP lp;
    lp.sense = Sense::Max;
    std::vector<double> value(static_cast<std::size_t>(n)), weight(static_cast<std::size_t>(n));
    LpRow cap;
    cap.rel = LpRel::Le;
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      lp.add_var("b" + std::to_string(j), 0.0, 1.0, VarKind::Binary);
      value[static_cast<std::size_t>(j)] = val(rng);
      weight[static_cast<std::size_t>(j)] = val(rng);
      lp.obj.back() = value[static_cast<std::size_t>(j)];
      cap.coeffs.emplace_back(j, weight[static_cast<std::size_t>(j)]);
      total += weight[static_cast<std::size_t>(j)];
    }
    cap.rhs = 0.4 * total;
    lp.rows.push_back(cap);

    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      double v = 0.0, w = 0.0;
      for (int j = 0; j < n; ++j)
        if (mask >> j & 1) {
          v += value[static_cast<std::size_t>(j)];
          w += weight[static_cast<std::size_t>(j)];
        }
      if (w <= cap.rhs + 1e-12) best = std::max(best, v);
    }
    LPSolution sol = solve_milp(lp);
    CAPTURE(trial);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("milp rejects nothing that solve_lp accepts and vice versa") {
  ConcreteLP lp = toy_lp();
  lp.kind[0] = VarKind::Integer;
  CHECK_THROWS_AS((void)solve_lp(lp), Error);
}

TEST_CASE("optimal solutions satisfy rows and bounds tightly") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    ConcreteLP lp = random_bounded_lp(rng);
    LPSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    for (const auto& row : lp.rows) {
      double act = 0.0;
      for (const auto& [j, v] : row.coeffs) act += v * sol.x[static_cast<std::size_t>(j)];
      if (row.rel == LpRel::Le) CHECK(act <= row.rhs + 1e-7);
      else CHECK(std::fabs(act - row.rhs) <= 1e-7);
    }
    for (std::size_t j = 0; j < sol.x.size(); ++j) {
      CHECK(sol.x[j] >= lp.lower[j] - 1e-9);
      CHECK(sol.x[j] <= lp.upper[j] + 1e-9);
    }
  }
}

TEST_CASE("mps export carries rows, integers and bounds") {
  ConcreteLP lp = toy_lp();
  lp.kind[1] = VarKind::Integer;
  lp.upper[1] = 5.0;
  lp.obj_const = 2.5;
  std::ostringstream out;
  write_mps(lp, out, "TOY");
  const std::string mps = out.str();
  CHECK(mps.find("NAME          TOY") != std::string::npos);
  CHECK(mps.find("ROWS") != std::string::npos);
  CHECK(mps.find(" L  R0000001") != std::string::npos);
  CHECK(mps.find("'INTORG'") != std::string::npos);
  CHECK(mps.find("'INTEND'") != std::string::npos);
  CHECK(mps.find("RHS") != std::string::npos);
  CHECK(mps.find("-2.5") != std::string::npos);  // objective constant, negated
  CHECK(mps.find(" UP BND") != std::string::npos);
  CHECK(mps.find("ENDATA") != std::string::npos);
}

}  // TEST_SUITE
