#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "duopt/bundle.hpp"
#include "duopt/lp.hpp"
#include "duopt/tensor.hpp"

namespace duopt {

/// A solved decision as persisted by the pipeline: tensors keyed by decision
/// symbol plus the in-sample objective the solver reported.
struct DecisionRecord {
  std::string problem_id;
  std::string paradigm;
  LpStatus status = LpStatus::Infeasible;
  double v_in = 0.0;
  std::map<std::string, Tensor> decisions;

  bool solved() const { return status == LpStatus::Optimal; }
};

struct EvalReport {
  std::int64_t n_out = 0;
  std::int64_t n_feas = 0;
  double fr = 0.0;
  std::optional<double> obj;  // mean objective over feasible scenarios
  std::optional<double> opr;  // share of feasible scenarios worse than v_in
  double v_in = 0.0;
  std::vector<bool> feasible;
  std::vector<double> v_out;
};

/// Out-of-sample simulation: every testing scenario is checked against all
/// truth constraints at tol_abs; objectives are evaluated per scenario. The
/// worse-than-v_in comparison is direction aware (greater for min problems,
/// less for max) with a 1e-9 tie tolerance.
EvalReport evaluate_decision(const DecisionRecord& record, const ProblemBundle& bundle,
                             double tol_abs = 1e-6);

struct ProblemOutcome {
  std::string id;
  bool success = false;
  std::optional<EvalReport> report;
};

struct DatasetSummary {
  int n_problems = 0;
  int n_success = 0;
  double sr = 0.0;
  std::optional<double> fr;
  std::optional<double> obj;
  std::optional<double> opr;
  int n_opr_excluded = 0;  // successful problems with no feasible scenario
  int n_obj_excluded = 0;
};

/// SR plus unweighted means of FR/Obj/OpR over successful problems; problems
/// without a single feasible scenario are excluded from the Obj/OpR means and
/// counted in the exclusion flags.
DatasetSummary aggregate_dataset(const std::vector<ProblemOutcome>& outcomes);

struct StressConstraint {
  int origin = -1;
  double scale = 0.0;  // |constant term at nominal parameters|
  double max_rel_violation = 0.0;
  double mean_rel_violation = 0.0;
};

struct StressReport {
  double max_rel_violation = 0.0;
  double mean_rel_violation = 0.0;  // mean over scenarios of the per-scenario max
  std::vector<StressConstraint> constraints;
};

/// Perturbation stress test: n scenarios with every parameter entry scaled by
/// (1 + rho * u), u ~ U[-1,1]; violations of each normalized constraint are
/// reported relative to max(1, |constant term at nominal|).
StressReport stress_violation(const DecisionRecord& record, const ProblemBundle& bundle,
                              double rho, std::int64_t n, std::uint64_t seed);

}  // namespace duopt
