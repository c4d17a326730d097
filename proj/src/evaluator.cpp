#include "duopt/evaluator.hpp"

#include <cmath>

#include "duopt/errors.hpp"
#include "duopt/expr.hpp"
#include "duopt/linear_model.hpp"
#include "duopt/sampler.hpp"

namespace duopt {

namespace {

constexpr double kTieTol = 1e-9;

void check_record_shapes(const DecisionRecord& record, const ProblemBundle& bundle) {
  for (const auto& d : bundle.decisions) {
    auto it = record.decisions.find(d.symbol);
    if (it == record.decisions.end())
      fail("ShapeMismatch", "record is missing decision '" + d.symbol + "'");
    if (it->second.shape() != d.shape)
      fail("ShapeMismatch", "decision '" + d.symbol + "' has shape " +
                                shape_to_string(it->second.shape()) + ", declared " +
                                shape_to_string(d.shape));
  }
}

}  // namespace

EvalReport evaluate_decision(const DecisionRecord& record, const ProblemBundle& bundle,
                             double tol_abs) {
  if (!bundle.testing) fail("MissingTestingSamples", "bundle has no testing_sample.json");
  check_record_shapes(record, bundle);
  const SampleSet& testing = *bundle.testing;

  std::vector<expr::NodePtr> constraints;
  constraints.reserve(bundle.truth.constraints.size());
  for (const auto& text : bundle.truth.constraints)
    constraints.push_back(expr::parse_expr(text));
  const expr::NodePtr objective = expr::parse_expr(bundle.truth.objective);

  expr::Env env;
  for (const auto& [symbol, tensor] : record.decisions) env.bindings[symbol] = tensor;
  for (const auto& d : bundle.decisions) env.integrality[d.symbol] = d.type;
  for (const auto& p : testing.parameters)
    if (!p.is_random) env.bindings[p.symbol] = p.value;

  EvalReport report;
  report.v_in = record.v_in;
  report.n_out = testing.sample_size;
  report.feasible.resize(static_cast<std::size_t>(testing.sample_size));
  report.v_out.resize(static_cast<std::size_t>(testing.sample_size));

  double obj_sum = 0.0;
  std::int64_t worse = 0;
  for (std::int64_t i = 0; i < testing.sample_size; ++i) {
    for (const auto& p : testing.parameters)
      if (p.is_random) env.bindings[p.symbol] = (*p.samples)[static_cast<std::size_t>(i)];
    bool feasible = true;
    for (const auto& c : constraints)
      if (!expr::check_constraint(c, env, tol_abs).satisfied) {
        feasible = false;
        break;
      }
    const Tensor v = expr::eval_expr(objective, env);
    const double v_out = v.flat(0);
    report.feasible[static_cast<std::size_t>(i)] = feasible;
    report.v_out[static_cast<std::size_t>(i)] = v_out;
    if (feasible) {
      ++report.n_feas;
      obj_sum += v_out;
      const bool is_worse = bundle.truth.problem_type == Sense::Min
                                ? v_out > record.v_in + kTieTol
                                : v_out < record.v_in - kTieTol;
      if (is_worse) ++worse;
    }
  }
  report.fr = static_cast<double>(report.n_feas) / static_cast<double>(report.n_out);
  if (report.n_feas > 0) {
    report.obj = obj_sum / static_cast<double>(report.n_feas);
    report.opr = static_cast<double>(worse) / static_cast<double>(report.n_feas);
  }
  return report;
}

DatasetSummary aggregate_dataset(const std::vector<ProblemOutcome>& outcomes) {
  if (outcomes.empty()) fail("PreconditionFailure", "aggregate_dataset needs >= 1 outcome");
  DatasetSummary s;
  s.n_problems = static_cast<int>(outcomes.size());
  double fr_sum = 0.0, obj_sum = 0.0, opr_sum = 0.0;
  int fr_n = 0, obj_n = 0, opr_n = 0;
  for (const auto& o : outcomes) {
    if (!o.success) continue;
    ++s.n_success;
    if (!o.report) continue;
    fr_sum += o.report->fr;
    ++fr_n;
    if (o.report->obj) {
      obj_sum += *o.report->obj;
      ++obj_n;
    } else {
      ++s.n_obj_excluded;
    }
    if (o.report->opr) {
      opr_sum += *o.report->opr;
      ++opr_n;
    } else {
      ++s.n_opr_excluded;
    }
  }
  s.sr = static_cast<double>(s.n_success) / static_cast<double>(s.n_problems);
  if (fr_n > 0) s.fr = fr_sum / fr_n;
  if (obj_n > 0) s.obj = obj_sum / obj_n;
  if (opr_n > 0) s.opr = opr_sum / opr_n;
  return s;
}

StressReport stress_violation(const DecisionRecord& record, const ProblemBundle& bundle,
                              double rho, std::int64_t n, std::uint64_t seed) {
  if (rho < 0.0) fail("PreconditionFailure", "rho must be >= 0");
  if (n < 1) fail("PreconditionFailure", "n must be >= 1");
  check_record_shapes(record, bundle);

  // lower with every parameter symbolic so the perturbation reaches
  // deterministic data too
  ProblemBundle symbolic = bundle;
  for (auto& p : symbolic.training.parameters) {
    p.is_random = true;
    p.samples.reset();
  }
  symbolic.training.sample_size = 1;
  const LinearModel model = lower_to_model(symbolic.truth, symbolic);

  std::vector<double> x(model.decisions.size(), 0.0);
  for (const auto& [symbol, span] : model.decision_spans) {
    const Tensor& t = record.decisions.at(symbol);
    for (std::int32_t i = span.first; i < span.second; ++i)
      x[static_cast<std::size_t>(i)] = t.flat(i - span.first);
  }

  const std::vector<double> nominal = model.nominal_params();
  Tensor nominal_t(Shape{static_cast<std::int64_t>(std::max<std::size_t>(nominal.size(), 1))});
  for (std::size_t k = 0; k < nominal.size(); ++k)
    nominal_t.flat(static_cast<std::int64_t>(k)) = nominal[k];
  const std::vector<Tensor> scenarios = perturb_relative(nominal_t, rho, seed, n);

  StressReport report;
  report.constraints.reserve(model.constraints.size());
  for (const auto& con : model.constraints) {
    StressConstraint sc;
    sc.origin = con.origin;
    auto [c0, coeffs] = fold_at(con.body, nominal);
    (void)coeffs;
    sc.scale = std::fabs(c0);
    report.constraints.push_back(sc);
  }

  double max_overall = 0.0;
  double mean_acc = 0.0;
  std::vector<double> p(nominal.size(), 0.0);
  for (const auto& scen : scenarios) {
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = scen.flat(static_cast<std::int64_t>(k));
    double scen_max = 0.0;
    for (std::size_t r = 0; r < model.constraints.size(); ++r) {
      const auto& con = model.constraints[r];
      const double body = con.body.value_at(x, p);
      const double viol = con.rel == Rel::Le ? std::max(0.0, body) : std::fabs(body);
      const double rel = viol / std::max(1.0, report.constraints[r].scale);
      auto& sc = report.constraints[r];
      sc.max_rel_violation = std::max(sc.max_rel_violation, rel);
      sc.mean_rel_violation += rel;
      scen_max = std::max(scen_max, rel);
    }
    max_overall = std::max(max_overall, scen_max);
    mean_acc += scen_max;
  }
  for (auto& sc : report.constraints) sc.mean_rel_violation /= static_cast<double>(n);
  report.max_rel_violation = max_overall;
  report.mean_rel_violation = mean_acc / static_cast<double>(n);
  return report;
}

}  // namespace duopt
