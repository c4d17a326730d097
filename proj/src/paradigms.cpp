#include "duopt/paradigms.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "duopt/errors.hpp"

namespace duopt {

std::string ParadigmConfig::to_string() const {
  switch (kind) {
    case ParadigmKind::DM: return "dm";
    case ParadigmKind::SAA: return "saa";
    case ParadigmKind::RO_Box: return "ro";
    case ParadigmKind::DRO_Wasserstein: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "dro:%g", dro_base_radius);
      return buf;
    }
  }
  return "?";
}

ParadigmConfig ParadigmConfig::parse(const std::string& text, GroundNorm norm) {
  ParadigmConfig cfg;
  cfg.dro_norm = norm;
  if (text == "dm") {
    cfg.kind = ParadigmKind::DM;
  } else if (text == "saa") {
    cfg.kind = ParadigmKind::SAA;
  } else if (text == "ro") {
    cfg.kind = ParadigmKind::RO_Box;
  } else if (text.rfind("dro:", 0) == 0) {
    cfg.kind = ParadigmKind::DRO_Wasserstein;
    try {
      cfg.dro_base_radius = std::stod(text.substr(4));
    } catch (...) {
      fail("PreconditionFailure", "cannot parse DRO base radius in '" + text + "'");
    }
    if (cfg.dro_base_radius < 0.0)
      fail("PreconditionFailure", "DRO base radius must be >= 0");
  } else {
    fail("PreconditionFailure",
         "unknown paradigm '" + text + "' (expected dm|saa|ro|dro:<base>)");
  }
  return cfg;
}

std::vector<std::vector<double>> joint_training_samples(const LinearModel& model,
                                                        const TrainingView& training) {
  const SampleSet& set = training.set();
  if (set.sample_size < 1) fail("EmptySamples", "training set has no samples");
  std::vector<std::vector<double>> out(
      static_cast<std::size_t>(set.sample_size),
      std::vector<double>(model.params.size(), 0.0));
  for (const auto& [symbol, span] : model.param_spans) {
    const ParameterSpec* p = set.find(symbol);
    if (!p || !p->samples)
      fail("EmptySamples", "no training samples for uncertain parameter '" + symbol + "'");
    if (static_cast<std::int64_t>(p->samples->size()) != set.sample_size)
      fail("ShapeMismatch", "sample count mismatch for '" + symbol + "'");
    const auto n = span.second - span.first;
    for (std::size_t i = 0; i < p->samples->size(); ++i) {
      const Tensor& t = (*p->samples)[i];
      if (t.size() != n) fail("ShapeMismatch", "sample shape mismatch for '" + symbol + "'");
      for (std::int32_t k = 0; k < n; ++k)
        out[i][static_cast<std::size_t>(span.first + k)] = t.flat(k);
    }
  }
  return out;
}

std::vector<double> joint_sample_mean(const std::vector<std::vector<double>>& samples) {
  if (samples.empty()) fail("EmptySamples", "no samples");
  std::vector<double> mean(samples.front().size(), 0.0);
  for (const auto& s : samples)
    for (std::size_t k = 0; k < s.size(); ++k) mean[k] += s[k];
  for (auto& v : mean) v /= static_cast<double>(samples.size());
  return mean;
}

BoxSet calibrate_box(const LinearModel& model, const TrainingView& training) {
  const auto samples = joint_training_samples(model, training);
  BoxSet box;
  box.lower = samples.front();
  box.upper = samples.front();
  for (const auto& s : samples)
    for (std::size_t k = 0; k < s.size(); ++k) {
      box.lower[k] = std::min(box.lower[k], s[k]);
      box.upper[k] = std::max(box.upper[k], s[k]);
    }
  return box;
}

double scale_radius(const ParadigmConfig& config, const LinearModel& model,
                    const TrainingView& training) {
  if (config.kind != ParadigmKind::DRO_Wasserstein)
    fail("PreconditionFailure", "scale_radius is only defined for the DRO paradigm");
  if (model.params.empty()) return 0.0;
  const auto mean = joint_sample_mean(joint_training_samples(model, training));
  double acc = 0.0;
  for (double m : mean) acc += std::fabs(m);
  return config.dro_base_radius * acc / static_cast<double>(mean.size());
}

ConcreteLP build_dm(const LinearModel& model, const TrainingView& training) {
  if (!model.has_uncertainty())
    return substitute_params(model, std::vector<double>{});
  return substitute_params(model, joint_sample_mean(joint_training_samples(model, training)));
}

namespace {

// affine-in-x coefficient of one uncertain entry within a row body
struct EntryCoeff {
  std::int32_t entry;
  double constant;
  std::map<std::int32_t, double> dx;
  bool is_constant() const { return dx.empty(); }
};

std::vector<EntryCoeff> param_coefficients(const BiAffineScalar& body) {
  std::set<std::int32_t> entries;
  for (const auto& [k, v] : body.dp) {
    (void)v;
    entries.insert(k);
  }
  for (const auto& [kj, v] : body.dpx) {
    (void)v;
    entries.insert(kj.first);
  }
  std::vector<EntryCoeff> out;
  for (auto k : entries) {
    auto [c, dx] = body.param_coefficient(k);
    out.push_back({k, c, std::move(dx)});
  }
  return out;
}

void append_row(ConcreteLP& lp, std::vector<std::pair<std::int32_t, double>> coeffs, LpRel rel,
                double rhs, RowInfo info) {
  LpRow row;
  row.coeffs = std::move(coeffs);
  row.rel = rel;
  row.rhs = rhs;
  row.info = info;
  lp.rows.push_back(std::move(row));
}

// rows  +/- scale*coeff(x) - t <= 0  defining t >= |scale * coeff(x)|
std::int32_t add_abs_aux(ConcreteLP& lp, const EntryCoeff& ec, double scale,
                         const std::string& stem, int origin) {
  const std::int32_t t = lp.add_var(stem, 0.0, kInf);
  for (const double sign : {1.0, -1.0}) {
    std::vector<std::pair<std::int32_t, double>> coeffs;
    for (const auto& [j, v] : ec.dx) coeffs.emplace_back(j, sign * scale * v);
    coeffs.emplace_back(t, -1.0);
    append_row(lp, std::move(coeffs), LpRel::Le, -sign * scale * ec.constant,
               {RowInfo::Kind::AuxAbs, origin, -1, ec.entry});
  }
  return t;
}

// Dual-norm margin of the entry coefficients: the constant part folds, the
// x-dependent part gets auxiliary variables. Returns (constant, aux terms).
struct Margin {
  double constant = 0.0;
  std::vector<std::pair<std::int32_t, double>> terms;  // coefficient per aux var
};

Margin dual_norm_margin(ConcreteLP& lp, const std::vector<EntryCoeff>& coeffs, double radius,
                        GroundNorm norm, const std::string& stem, int origin) {
  Margin m;
  if (radius == 0.0 || coeffs.empty()) return m;
  if (norm == GroundNorm::L2)
    fail("UnsupportedNorm",
         "L2 ground norm needs a second-order cone reformulation; use L1 or Linf");
  if (norm == GroundNorm::L1) {
    // dual norm Linf: one epigraph variable above every |coeff|
    bool all_const = true;
    for (const auto& ec : coeffs) all_const = all_const && ec.is_constant();
    if (all_const) {
      double worst = 0.0;
      for (const auto& ec : coeffs) worst = std::max(worst, std::fabs(ec.constant));
      m.constant = radius * worst;
      return m;
    }
    const std::int32_t u = lp.add_var(stem + "#norm", 0.0, kInf);
    for (const auto& ec : coeffs) {
      for (const double sign : {1.0, -1.0}) {
        std::vector<std::pair<std::int32_t, double>> row;
        for (const auto& [j, v] : ec.dx) row.emplace_back(j, sign * v);
        row.emplace_back(u, -1.0);
        append_row(lp, std::move(row), LpRel::Le, -sign * ec.constant,
                   {RowInfo::Kind::AuxMax, origin, -1, ec.entry});
      }
    }
    m.terms.emplace_back(u, radius);
    return m;
  }
  // Linf ground norm, dual norm L1: sum of per-entry absolute values
  for (const auto& ec : coeffs) {
    if (ec.is_constant()) {
      m.constant += radius * std::fabs(ec.constant);
      continue;
    }
    const std::int32_t t =
        add_abs_aux(lp, ec, 1.0, stem + "#abs" + std::to_string(ec.entry), origin);
    m.terms.emplace_back(t, radius);
  }
  return m;
}

ConcreteLP prepare_vars(const LinearModel& model) {
  ConcreteLP lp;
  lp.sense = model.sense;
  for (const auto& d : model.decisions) lp.add_var(d.name, d.lower, d.upper, d.kind);
  return lp;
}

void set_plain_objective(ConcreteLP& lp, const LinearModel& model,
                         const std::vector<double>& at) {
  auto [c, coeffs] = fold_at(model.objective, at);
  lp.obj_const = c;
  for (const auto& [j, v] : coeffs) lp.obj[static_cast<std::size_t>(j)] = v;
}

}  // namespace

ConcreteLP build_saa(const LinearModel& model, const TrainingView& training) {
  if (!model.has_uncertainty()) return substitute_params(model, std::vector<double>{});
  const auto samples = joint_training_samples(model, training);
  const auto mean = joint_sample_mean(samples);
  ConcreteLP lp = prepare_vars(model);
  // the averaged bi-affine objective folds exactly to the mean substitution
  set_plain_objective(lp, model, mean);
  for (std::size_t r = 0; r < model.constraints.size(); ++r) {
    const auto& con = model.constraints[r];
    const LpRel rel = con.rel == Rel::Le ? LpRel::Le : LpRel::Eq;
    if (!con.body.depends_on_params()) {
      auto [c, coeffs] = fold_at(con.body, mean);
      append_row(lp, std::move(coeffs), rel, -c, {RowInfo::Kind::Plain, con.origin, -1, -1});
      continue;
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto [c, coeffs] = fold_at(con.body, samples[i]);
      append_row(lp, std::move(coeffs), rel, -c,
                 {RowInfo::Kind::Scenario, con.origin, static_cast<int>(i), -1});
    }
  }
  return lp;
}

ConcreteLP build_ro_box(const LinearModel& model, const BoxSet& box) {
  if (!model.has_uncertainty()) return substitute_params(model, std::vector<double>{});
  if (box.lower.size() != model.params.size() || box.upper.size() != model.params.size())
    fail("ShapeMismatch", "box does not match the model's uncertain entries");
  for (std::size_t k = 0; k < box.lower.size(); ++k)
    if (box.lower[k] > box.upper[k])
      fail("PreconditionFailure", "box has lower > upper at entry " + std::to_string(k));
  std::vector<double> center(box.lower.size());
  for (std::size_t k = 0; k < center.size(); ++k) center[k] = box.center(k);

  ConcreteLP lp = prepare_vars(model);

  // worst case of one row body over the box, appended as rows; the returned
  // pair is (center-substituted coefficients + aux terms, rhs)
  auto robustify_le = [&](const BiAffineScalar& body, int origin, const std::string& stem,
                          RowInfo::Kind kind) {
    auto [c, coeffs] = fold_at(body, center);
    double rhs = -c;
    for (const auto& ec : param_coefficients(body)) {
      const double hw = box.halfwidth(static_cast<std::size_t>(ec.entry));
      if (hw == 0.0) continue;  // entry already folded at the center
      if (ec.is_constant()) {
        rhs -= hw * std::fabs(ec.constant);
        continue;
      }
      const std::int32_t t =
          add_abs_aux(lp, ec, hw, stem + "#" + std::to_string(ec.entry), origin);
      coeffs.emplace_back(t, 1.0);
    }
    append_row(lp, std::move(coeffs), LpRel::Le, rhs, {kind, origin, -1, -1});
  };

  for (std::size_t r = 0; r < model.constraints.size(); ++r) {
    const auto& con = model.constraints[r];
    if (!con.body.depends_on_params()) {
      auto [c, coeffs] = fold_at(con.body, center);
      append_row(lp, std::move(coeffs), con.rel == Rel::Le ? LpRel::Le : LpRel::Eq, -c,
                 {RowInfo::Kind::Plain, con.origin, -1, -1});
      continue;
    }
    if (con.rel == Rel::Le) {
      robustify_le(con.body, con.origin, "wc#" + std::to_string(r), RowInfo::Kind::WorstCase);
      continue;
    }
    // equality under box uncertainty: the center equality must hold and every
    // coefficient of an entry with positive width must vanish
    auto [c, coeffs] = fold_at(con.body, center);
    append_row(lp, std::move(coeffs), LpRel::Eq, -c,
               {RowInfo::Kind::WorstCase, con.origin, -1, -1});
    for (const auto& ec : param_coefficients(con.body)) {
      if (box.halfwidth(static_cast<std::size_t>(ec.entry)) == 0.0) continue;
      std::vector<std::pair<std::int32_t, double>> zrow;
      for (const auto& [j, v] : ec.dx) zrow.emplace_back(j, v);
      append_row(lp, std::move(zrow), LpRel::Eq, -ec.constant,
                 {RowInfo::Kind::CoeffZero, con.origin, -1, ec.entry});
    }
  }

  if (model.objective.depends_on_params()) {
    // min-max / max-min epigraph over the box
    const std::int32_t theta = lp.add_var("theta", -kInf, kInf);
    const double sign = model.sense == Sense::Min ? 1.0 : -1.0;
    BiAffineScalar epi = model.sense == Sense::Min
                             ? model.objective
                             : -model.objective;  // worst case of sign*objective
    // epigraph row: worst case of (sign*objective - theta) <= 0
    BiAffineScalar body = epi;
    body.dx[theta] -= 1.0;
    robustify_le(body, -1, "wc#obj", RowInfo::Kind::Epigraph);
    std::fill(lp.obj.begin(), lp.obj.end(), 0.0);
    lp.obj[static_cast<std::size_t>(theta)] = sign;
    lp.obj_const = 0.0;
  } else {
    set_plain_objective(lp, model, center);
  }
  return lp;
}

ConcreteLP build_dro_wasserstein(const LinearModel& model, const WassersteinBall& ball) {
  if (!model.has_uncertainty()) return substitute_params(model, std::vector<double>{});
  if (ball.radius < 0.0) fail("PreconditionFailure", "radius must be >= 0");
  if (ball.samples.empty()) fail("EmptySamples", "Wasserstein ball needs reference samples");
  for (const auto& s : ball.samples)
    if (s.size() != model.params.size())
      fail("ShapeMismatch", "reference sample does not match the model's uncertain entries");
  const auto mean = joint_sample_mean(ball.samples);

  ConcreteLP lp = prepare_vars(model);

  for (std::size_t r = 0; r < model.constraints.size(); ++r) {
    const auto& con = model.constraints[r];
    if (!con.body.depends_on_params()) {
      auto [c, coeffs] = fold_at(con.body, mean);
      append_row(lp, std::move(coeffs), con.rel == Rel::Le ? LpRel::Le : LpRel::Eq, -c,
                 {RowInfo::Kind::Plain, con.origin, -1, -1});
      continue;
    }
    const auto entry_coeffs = param_coefficients(con.body);
    if (con.rel == Rel::Le) {
      const Margin margin =
          dual_norm_margin(lp, entry_coeffs, ball.radius, ball.norm,
                           "dro#" + std::to_string(r), con.origin);
      for (std::size_t i = 0; i < ball.samples.size(); ++i) {
        auto [c, coeffs] = fold_at(con.body, ball.samples[i]);
        for (const auto& term : margin.terms) coeffs.push_back(term);
        append_row(lp, std::move(coeffs), LpRel::Le, -c - margin.constant,
                   {RowInfo::Kind::Scenario, con.origin, static_cast<int>(i), -1});
      }
      continue;
    }
    // equalities: hold at every reference sample; with positive radius the
    // unbounded support additionally forces the uncertain coefficients to zero
    for (std::size_t i = 0; i < ball.samples.size(); ++i) {
      auto [c, coeffs] = fold_at(con.body, ball.samples[i]);
      append_row(lp, std::move(coeffs), LpRel::Eq, -c,
                 {RowInfo::Kind::Scenario, con.origin, static_cast<int>(i), -1});
    }
    if (ball.radius > 0.0) {
      for (const auto& ec : entry_coeffs) {
        std::vector<std::pair<std::int32_t, double>> zrow;
        for (const auto& [j, v] : ec.dx) zrow.emplace_back(j, v);
        append_row(lp, std::move(zrow), LpRel::Eq, -ec.constant,
                   {RowInfo::Kind::CoeffZero, con.origin, -1, ec.entry});
      }
    }
  }

  if (model.objective.depends_on_params()) {
    // exact worst-case expectation: sample mean plus radius times the dual
    // norm of the parameter coefficients, lifted through an epigraph
    const std::int32_t theta = lp.add_var("theta", -kInf, kInf);
    const double sign = model.sense == Sense::Min ? 1.0 : -1.0;
    BiAffineScalar epi = model.sense == Sense::Min ? model.objective : -model.objective;
    const auto entry_coeffs = param_coefficients(epi);
    const Margin margin =
        dual_norm_margin(lp, entry_coeffs, ball.radius, ball.norm, "dro#obj", -1);
    auto [c, coeffs] = fold_at(epi, mean);
    coeffs.emplace_back(theta, -1.0);
    for (const auto& term : margin.terms) coeffs.push_back(term);
    append_row(lp, std::move(coeffs), LpRel::Le, -c - margin.constant,
               {RowInfo::Kind::Epigraph, -1, -1, -1});
    std::fill(lp.obj.begin(), lp.obj.end(), 0.0);
    lp.obj[static_cast<std::size_t>(theta)] = sign;
    lp.obj_const = 0.0;
  } else {
    set_plain_objective(lp, model, mean);
  }
  return lp;
}

ConcreteLP build_counterpart(const LinearModel& model, const TrainingView& training,
                             const ParadigmConfig& config) {
  switch (config.kind) {
    case ParadigmKind::DM: return build_dm(model, training);
    case ParadigmKind::SAA: return build_saa(model, training);
    case ParadigmKind::RO_Box: return build_ro_box(model, calibrate_box(model, training));
    case ParadigmKind::DRO_Wasserstein: {
      WassersteinBall ball;
      ball.samples = joint_training_samples(model, training);
      ball.norm = config.dro_norm;
      ball.radius = scale_radius(config, model, training);
      return build_dro_wasserstein(model, ball);
    }
  }
  fail("PreconditionFailure", "unknown paradigm");
}

}  // namespace duopt
