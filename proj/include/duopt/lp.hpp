#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "duopt/types.hpp"

namespace duopt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LpRel { Le, Eq };

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, NodeLimit };

std::string lp_status_to_string(LpStatus s);

/// Provenance of an LP row, kept so reformulation oracles and reports can map
/// rows back to the originating model constraint.
struct RowInfo {
  enum class Kind {
    Plain,        // direct substitution of a model constraint
    Scenario,     // per-sample copy (SAA / DRO)
    WorstCase,    // robustified main row
    AuxAbs,       // t_k >= +/- coeff row of a dual-norm / box linearization
    AuxMax,       // epigraph row of an L-infinity dual norm
    CoeffZero,    // equality under uncertainty: parameter coefficient must vanish
    Epigraph,     // objective epigraph row
    Bound         // variable bound expressed as a row (internal use)
  };
  Kind kind = Kind::Plain;
  int origin = -1;    // model constraint index, -1 = objective
  int scenario = -1;  // sample index for Kind::Scenario
  int entry = -1;     // uncertain entry index for aux rows
};

struct LpRow {
  std::vector<std::pair<std::int32_t, double>> coeffs;  // sparse, index-sorted
  LpRel rel = LpRel::Le;
  double rhs = 0.0;
  RowInfo info;
};

/// Solver-ready LP/MILP in standard form: sense + linear objective, sparse
/// rows, variable bounds and integrality flags.
struct ConcreteLP {
  Sense sense = Sense::Min;
  std::vector<double> obj;
  double obj_const = 0.0;
  std::vector<LpRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<VarKind> kind;
  std::vector<std::string> names;

  std::int32_t num_vars() const { return static_cast<std::int32_t>(obj.size()); }
  std::int32_t add_var(std::string name, double lb, double ub,
                       VarKind k = VarKind::Continuous);
  bool has_integers() const;

  bool operator==(const ConcreteLP& o) const;
};

struct SolverOptions {
  std::int64_t max_pivots = 50000;
  std::int64_t max_nodes = 10000;
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  std::int64_t stall_limit = 200;  // degenerate pivots before Bland's rule engages
};

struct LPSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;  // empty unless Optimal
  double objective = 0.0;
  std::vector<double> row_duals;       // one per row, minimization convention
  std::vector<double> reduced_costs;   // one per variable, minimization convention
  std::int64_t iterations = 0;
  std::int64_t nodes = 0;
};

/// Two-phase primal simplex on a dense tableau. Bland's rule takes over after
/// stall detection, bounding the pivot count. Requires a pure LP (no
/// integrality flags).
LPSolution solve_lp(const ConcreteLP& lp, const SolverOptions& opts = {});

/// Branch-and-bound over LP relaxations: best-first on bound, branching on the
/// most fractional variable, lowest index on ties. Returns the proven optimum
/// or Infeasible; NodeLimit when the node cap is exhausted.
LPSolution solve_milp(const ConcreteLP& lp, const SolverOptions& opts = {});

/// Check the returned duals: sign feasibility, reduced-cost consistency and
/// strong duality within `tol`. `why`, when given, receives the first failed
/// condition.
bool verify_duality(const ConcreteLP& lp, const LPSolution& sol, double tol = 1e-6,
                    std::string* why = nullptr);

/// Fixed-form MPS export for cross-checks against external solvers.
void write_mps(const ConcreteLP& lp, std::ostream& out, const std::string& name = "DUOPT");
std::string to_mps(const ConcreteLP& lp, const std::string& name = "DUOPT");

}  // namespace duopt
