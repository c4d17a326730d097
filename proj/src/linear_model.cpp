#include "duopt/linear_model.hpp"

#include <cmath>
#include <sstream>

#include "duopt/errors.hpp"
#include "duopt/expr.hpp"

namespace duopt {

namespace {

using BAT = TensorT<BiAffineScalar>;

void merge_scaled(std::map<std::int32_t, double>& dst, const std::map<std::int32_t, double>& src,
                  double scale) {
  if (scale == 0.0) return;
  for (const auto& [k, v] : src) {
    auto& slot = dst[k];
    slot += v * scale;
    if (slot == 0.0) dst.erase(k);
  }
}

void merge_scaled(std::map<std::pair<std::int32_t, std::int32_t>, double>& dst,
                  const std::map<std::pair<std::int32_t, std::int32_t>, double>& src,
                  double scale) {
  if (scale == 0.0) return;
  for (const auto& [k, v] : src) {
    auto& slot = dst[k];
    slot += v * scale;
    if (slot == 0.0) dst.erase(k);
  }
}

}  // namespace

BiAffineScalar BiAffineScalar::constant(double v) {
  BiAffineScalar s;
  s.c = v;
  return s;
}

BiAffineScalar BiAffineScalar::decision(std::int32_t index) {
  BiAffineScalar s;
  s.dx[index] = 1.0;
  return s;
}

BiAffineScalar BiAffineScalar::parameter(std::int32_t index) {
  BiAffineScalar s;
  s.dp[index] = 1.0;
  return s;
}

double BiAffineScalar::value_at(const std::vector<double>& x,
                                const std::vector<double>& p) const {
  double v = c;
  for (const auto& [j, a] : dx) v += a * x[static_cast<std::size_t>(j)];
  for (const auto& [k, a] : dp) v += a * p[static_cast<std::size_t>(k)];
  for (const auto& [kj, a] : dpx)
    v += a * p[static_cast<std::size_t>(kj.first)] * x[static_cast<std::size_t>(kj.second)];
  return v;
}

std::pair<double, std::map<std::int32_t, double>> BiAffineScalar::param_coefficient(
    std::int32_t k) const {
  std::pair<double, std::map<std::int32_t, double>> out{0.0, {}};
  auto it = dp.find(k);
  if (it != dp.end()) out.first = it->second;
  for (auto pos = dpx.lower_bound({k, std::numeric_limits<std::int32_t>::min()});
       pos != dpx.end() && pos->first.first == k; ++pos)
    out.second[pos->first.second] = pos->second;
  return out;
}

BiAffineScalar BiAffineScalar::operator+(const BiAffineScalar& o) const {
  BiAffineScalar r = *this;
  r.c += o.c;
  merge_scaled(r.dx, o.dx, 1.0);
  merge_scaled(r.dp, o.dp, 1.0);
  merge_scaled(r.dpx, o.dpx, 1.0);
  return r;
}

BiAffineScalar BiAffineScalar::operator-(const BiAffineScalar& o) const {
  BiAffineScalar r = *this;
  r.c -= o.c;
  merge_scaled(r.dx, o.dx, -1.0);
  merge_scaled(r.dp, o.dp, -1.0);
  merge_scaled(r.dpx, o.dpx, -1.0);
  return r;
}

BiAffineScalar BiAffineScalar::operator*(const BiAffineScalar& o) const {
  const bool ax = depends_on_decisions(), ap = depends_on_params();
  const bool bx = o.depends_on_decisions(), bp = o.depends_on_params();
  if (ax && bx) fail("NonlinearInDecisions", "product of decision-dependent expressions");
  if (ap && bp) fail("NonlinearInParameters", "product of parameter-dependent expressions");
  BiAffineScalar r;
  r.c = c * o.c;
  merge_scaled(r.dx, dx, o.c);
  merge_scaled(r.dx, o.dx, c);
  merge_scaled(r.dp, dp, o.c);
  merge_scaled(r.dp, o.dp, c);
  merge_scaled(r.dpx, dpx, o.c);
  merge_scaled(r.dpx, o.dpx, c);
  for (const auto& [j, vx] : dx)
    for (const auto& [k, vp] : o.dp) {
      auto& slot = r.dpx[{k, j}];
      slot += vx * vp;
      if (slot == 0.0) r.dpx.erase({k, j});
    }
  for (const auto& [k, vp] : dp)
    for (const auto& [j, vx] : o.dx) {
      auto& slot = r.dpx[{k, j}];
      slot += vp * vx;
      if (slot == 0.0) r.dpx.erase({k, j});
    }
  return r;
}

BiAffineScalar BiAffineScalar::operator/(const BiAffineScalar& o) const {
  if (!o.is_constant())
    fail("NonAffine", "division by a symbol-dependent expression");
  if (o.c == 0.0) fail("DivisionByZero", "division by zero");
  return *this * BiAffineScalar::constant(1.0 / o.c);
}

BiAffineScalar BiAffineScalar::operator-() const {
  return BiAffineScalar::constant(0.0) - *this;
}

std::vector<double> LinearModel::nominal_params() const {
  std::vector<double> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.nominal);
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Bi-affine abstract interpretation of truth expressions
// ---------------------------------------------------------------------------

class Lowerer {
 public:
  Lowerer(const TruthSpec& truth, const ProblemBundle& bundle) : truth_(truth) {
    for (const auto& d : bundle.decisions) {
      const auto begin = static_cast<std::int32_t>(model_.decisions.size());
      const std::int64_t n = shape_size(d.shape);
      for (std::int64_t i = 0; i < n; ++i) {
        DecisionEntry e;
        e.name = entry_name(d.symbol, d.shape, i);
        e.kind = d.type;
        e.lower = d.is_non_negative ? 0.0 : -kInf;
        e.upper = kInf;
        if (d.type == VarKind::Binary) {
          e.lower = 0.0;
          e.upper = 1.0;
        }
        model_.decisions.push_back(std::move(e));
      }
      model_.decision_spans[d.symbol] = {begin, static_cast<std::int32_t>(begin + n)};
      BAT t(d.shape.empty() ? Shape{} : d.shape);
      for (std::int64_t i = 0; i < t.size(); ++i)
        t.flat(i) = BiAffineScalar::decision(begin + static_cast<std::int32_t>(i));
      symbols_.emplace(d.symbol, std::move(t));
    }
    for (const auto& p : bundle.parameters()) {
      if (!p.is_random) {
        BAT t(p.shape.empty() ? Shape{} : p.shape);
        for (std::int64_t i = 0; i < t.size(); ++i)
          t.flat(i) = BiAffineScalar::constant(p.value.flat(i));
        symbols_.emplace(p.symbol, std::move(t));
        continue;
      }
      const auto begin = static_cast<std::int32_t>(model_.params.size());
      const std::int64_t n = shape_size(p.shape);
      for (std::int64_t i = 0; i < n; ++i)
        model_.params.push_back({entry_name(p.symbol, p.shape, i), p.value.flat(i)});
      model_.param_spans[p.symbol] = {begin, static_cast<std::int32_t>(begin + n)};
      BAT t(p.shape.empty() ? Shape{} : p.shape);
      for (std::int64_t i = 0; i < t.size(); ++i)
        t.flat(i) = BiAffineScalar::parameter(begin + static_cast<std::int32_t>(i));
      symbols_.emplace(p.symbol, std::move(t));
    }
  }

  LinearModel run() {
    model_.sense = truth_.problem_type;
    for (std::size_t i = 0; i < truth_.constraints.size(); ++i)
      lower_constraint(static_cast<int>(i), truth_.constraints[i]);
    lower_objective();
    return std::move(model_);
  }

 private:
  static std::string entry_name(const std::string& symbol, const Shape& shape, std::int64_t flat) {
    if (shape.empty()) return symbol;
    const auto strides = row_major_strides(shape);
    std::string name = symbol + "[";
    for (std::size_t d = 0; d < shape.size(); ++d) {
      if (d) name += ",";
      name += std::to_string((flat / strides[d]) % shape[d]);
    }
    return name + "]";
  }

  [[noreturn]] void rethrow_with_origin(const Error& e, const std::string& where) {
    fail(e.code(), where + ": " + e.what());
  }

  void lower_constraint(int origin, const std::string& text) {
    const std::string where = "constraint " + std::to_string(origin);
    try {
      auto ast = expr::parse_expr(text);
      if (expr::has_nested_compare(ast))
        fail("NestedCompare", "comparisons may only appear at the top level");
      if (const auto* call = std::get_if<expr::Call>(&ast->v);
          call && (call->fn == expr::Fn::IsInteger || call->fn == expr::Fn::IsBinary)) {
        apply_integrality(*call);
        return;
      }
      const auto* cmp = std::get_if<expr::Compare>(&ast->v);
      if (!cmp) fail("NotAConstraint", "constraint must compare or test integrality");
      BAT lhs = lower_node(cmp->lhs);
      BAT rhs = lower_node(cmp->rhs);
      // normalize: a <= b  ->  a-b <= 0 ; a >= b -> b-a <= 0 ; a == b -> a-b == 0
      BAT body = cmp->op == expr::CmpKind::Ge
                     ? zip_with(rhs, lhs, [](const auto& a, const auto& b) { return a - b; })
                     : zip_with(lhs, rhs, [](const auto& a, const auto& b) { return a - b; });
      const Rel rel = cmp->op == expr::CmpKind::Eq ? Rel::Eq : Rel::Le;
      emit_rows(body, rel, origin);
    } catch (const Error& e) {
      rethrow_with_origin(e, where);
    }
  }

  void apply_integrality(const expr::Call& call) {
    if (call.args.size() != 1)
      fail("NotAConstraint", "integrality predicate takes one symbol");
    const std::string symbol = unwrap_symbol(call.args[0]);
    auto span = model_.decision_spans.find(symbol);
    if (span == model_.decision_spans.end())
      fail("UnknownSymbol", symbol + " is not a decision");
    for (std::int32_t i = span->second.first; i < span->second.second; ++i) {
      auto& d = model_.decisions[static_cast<std::size_t>(i)];
      if (call.fn == expr::Fn::IsBinary) {
        d.kind = VarKind::Binary;
        d.lower = std::max(d.lower, 0.0);
        d.upper = std::min(d.upper, 1.0);
      } else if (d.kind != VarKind::Binary) {
        d.kind = VarKind::Integer;
      }
    }
  }

  static std::string unwrap_symbol(const expr::NodePtr& node) {
    if (const auto* id = std::get_if<expr::Ident>(&node->v)) return id->name;
    if (const auto* call = std::get_if<expr::Call>(&node->v);
        call && call->fn == expr::Fn::Asarray && call->args.size() == 1)
      return unwrap_symbol(call->args[0]);
    fail("NotAConstraint", "integrality predicate argument must be a declared symbol");
  }

  void emit_rows(const BAT& body, Rel rel, int origin) {
    bool hoisted_any = false;
    for (std::int64_t i = 0; i < body.size(); ++i) {
      const BiAffineScalar& b = body.flat(i);
      if (!b.depends_on_params() && b.dx.size() == 1) {
        hoist_bound(b, rel);
        hoisted_any = true;
        continue;
      }
      if (b.is_constant()) {
        // constant row: keep only if it can ever bind (a violated constant
        // constraint must surface as infeasibility in the solver)
        const bool vacuous = rel == Rel::Le ? b.c <= 0.0 : b.c == 0.0;
        if (vacuous) continue;
      }
      model_.constraints.push_back({b, rel, origin});
    }
    if (hoisted_any) model_.bound_origins.push_back(origin);
  }

  void hoist_bound(const BiAffineScalar& b, Rel rel) {
    const auto [j, a] = *b.dx.begin();
    auto& d = model_.decisions[static_cast<std::size_t>(j)];
    const double bound = -b.c / a;  // a*x + c (<=|==) 0
    if (rel == Rel::Eq) {
      d.lower = std::max(d.lower, bound);
      d.upper = std::min(d.upper, bound);
    } else if (a > 0) {
      d.upper = std::min(d.upper, bound);
    } else {
      d.lower = std::max(d.lower, bound);
    }
  }

  void lower_objective() {
    try {
      auto ast = expr::parse_expr(truth_.objective);
      if (expr::is_constraint_expr(ast) || expr::has_nested_compare(ast))
        fail("NotAValue", "objective must not contain a comparison");
      BAT obj = lower_node(ast);
      if (obj.size() != 1)
        fail("NotAValue", "objective must be scalar, got shape " + shape_to_string(obj.shape()));
      model_.objective = obj.flat(0);
    } catch (const Error& e) {
      rethrow_with_origin(e, "objective");
    }
  }

  BAT lower_node(const expr::NodePtr& node) {
    return std::visit(
        [&](const auto& n) -> BAT {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, expr::NumberLit>) {
            return BAT::scalar(BiAffineScalar::constant(n.value));
          } else if constexpr (std::is_same_v<N, expr::Ident>) {
            auto it = symbols_.find(n.name);
            if (it == symbols_.end()) fail("UnknownSymbol", n.name);
            return it->second;
          } else if constexpr (std::is_same_v<N, expr::Call>) {
            return lower_call(n);
          } else if constexpr (std::is_same_v<N, expr::BinOp>) {
            return lower_binop(n);
          } else if constexpr (std::is_same_v<N, expr::Compare>) {
            fail("NotAConstraint", "comparison is not a value");
          } else if constexpr (std::is_same_v<N, expr::Neg>) {
            return map_tensor(lower_node(n.operand), [](const BiAffineScalar& v) { return -v; });
          } else if constexpr (std::is_same_v<N, expr::NestedList>) {
            std::vector<BAT> parts;
            parts.reserve(n.elements.size());
            for (const auto& el : n.elements) parts.push_back(lower_node(el));
            return stack(parts);
          }
        },
        node->v);
  }

  BAT lower_binop(const expr::BinOp& n) {
    BAT a = lower_node(n.lhs);
    BAT b = lower_node(n.rhs);
    using S = BiAffineScalar;
    switch (n.op) {
      case expr::BinKind::Add: return zip_with(a, b, [](const S& x, const S& y) { return x + y; });
      case expr::BinKind::Sub: return zip_with(a, b, [](const S& x, const S& y) { return x - y; });
      case expr::BinKind::Mul: return zip_with(a, b, [](const S& x, const S& y) { return x * y; });
      case expr::BinKind::Div: return zip_with(a, b, [](const S& x, const S& y) { return x / y; });
      case expr::BinKind::MatMul: return matmul(a, b);
    }
    fail("SyntaxError", "unreachable");
  }

  BAT lower_call(const expr::Call& n) {
    auto arity = [&](std::size_t want) {
      if (n.args.size() != want)
        fail("SyntaxError", std::string(expr::fn_name(n.fn)) + " takes " + std::to_string(want) +
                                " argument(s)");
    };
    switch (n.fn) {
      case expr::Fn::Asarray: {
        arity(1);
        return lower_node(n.args[0]);
      }
      case expr::Fn::Sum: {
        arity(1);
        BAT a = lower_node(n.args[0]);
        return n.axis ? sum_axis(a, *n.axis) : sum_all(a);
      }
      case expr::Fn::Abs: {
        arity(1);
        return map_tensor(lower_node(n.args[0]), [](const BiAffineScalar& v) {
          if (!v.is_constant())
            fail("NonAffine", "np.abs over a symbol-dependent argument");
          return BiAffineScalar::constant(std::fabs(v.c));
        });
      }
      case expr::Fn::Maximum:
      case expr::Fn::Minimum: {
        arity(2);
        BAT a = lower_node(n.args[0]);
        BAT b = lower_node(n.args[1]);
        const bool is_max = n.fn == expr::Fn::Maximum;
        return zip_with(a, b, [is_max](const BiAffineScalar& x, const BiAffineScalar& y) {
          if (!x.is_constant() || !y.is_constant())
            fail("NonAffine", std::string(is_max ? "np.maximum" : "np.minimum") +
                                  " over a symbol-dependent argument");
          return BiAffineScalar::constant(is_max ? std::max(x.c, y.c) : std::min(x.c, y.c));
        });
      }
      case expr::Fn::IsInteger:
      case expr::Fn::IsBinary:
        fail("NotAConstraint", "integrality predicates may only appear as whole constraints");
    }
    fail("SyntaxError", "unreachable");
  }

  const TruthSpec& truth_;
  LinearModel model_;
  std::map<std::string, BAT> symbols_;
};

}  // namespace

LinearModel lower_to_model(const TruthSpec& truth, const ProblemBundle& bundle) {
  if (truth.empty()) fail("PreconditionFailure", "bundle has no truth specification");
  return Lowerer(truth, bundle).run();
}

std::pair<double, std::vector<std::pair<std::int32_t, double>>> fold_at(
    const BiAffineScalar& s, const std::vector<double>& p) {
  double constant = s.c;
  for (const auto& [k, v] : s.dp) constant += v * p[static_cast<std::size_t>(k)];
  std::map<std::int32_t, double> folded(s.dx);
  for (const auto& [kj, v] : s.dpx) folded[kj.second] += v * p[static_cast<std::size_t>(kj.first)];
  std::vector<std::pair<std::int32_t, double>> coeffs;
  for (const auto& [j, v] : folded)
    if (v != 0.0) coeffs.emplace_back(j, v);
  return {constant, std::move(coeffs)};
}

ConcreteLP substitute_params(const LinearModel& model, const std::vector<double>& values) {
  if (values.size() < model.params.size())
    fail("MissingParameterValue",
         "assignment covers " + std::to_string(values.size()) + " of " +
             std::to_string(model.params.size()) + " uncertain entries");
  ConcreteLP lp;
  lp.sense = model.sense;
  for (const auto& d : model.decisions) lp.add_var(d.name, d.lower, d.upper, d.kind);
  auto [obj_const, obj_coeffs] = fold_at(model.objective, values);
  lp.obj_const = obj_const;
  for (const auto& [j, v] : obj_coeffs) lp.obj[static_cast<std::size_t>(j)] = v;
  for (std::size_t i = 0; i < model.constraints.size(); ++i) {
    const auto& con = model.constraints[i];
    LpRow row;
    auto [constant, coeffs] = fold_at(con.body, values);
    row.coeffs = std::move(coeffs);
    row.rhs = -constant;
    row.rel = con.rel == Rel::Le ? LpRel::Le : LpRel::Eq;
    row.info = {RowInfo::Kind::Plain, con.origin, -1, -1};
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

ConcreteLP substitute_params(const LinearModel& model,
                             const std::map<std::string, Tensor>& values) {
  std::vector<double> flat(model.params.size(), 0.0);
  for (const auto& [symbol, span] : model.param_spans) {
    auto it = values.find(symbol);
    if (it == values.end()) fail("MissingParameterValue", symbol);
    const Tensor& t = it->second;
    const auto n = span.second - span.first;
    if (t.size() != n)
      fail("ShapeMismatch", "assignment for " + symbol + " has " + std::to_string(t.size()) +
                                " entries, expected " + std::to_string(n));
    for (std::int32_t i = 0; i < n; ++i)
      flat[static_cast<std::size_t>(span.first + i)] = t.flat(i);
  }
  return substitute_params(model, flat);
}

std::string dump_model(const LinearModel& model) {
  std::ostringstream out;
  out << "sense: " << sense_to_string(model.sense) << "\n";
  auto scalar = [&](const BiAffineScalar& s) {
    out << s.c;
    for (const auto& [j, v] : s.dx) out << " + " << v << "*" << model.decisions[j].name;
    for (const auto& [k, v] : s.dp) out << " + " << v << "*" << model.params[k].name;
    for (const auto& [kj, v] : s.dpx)
      out << " + " << v << "*" << model.params[kj.first].name << "*"
          << model.decisions[kj.second].name;
  };
  out << "objective: ";
  scalar(model.objective);
  out << "\n";
  for (std::size_t i = 0; i < model.constraints.size(); ++i) {
    const auto& c = model.constraints[i];
    out << "row " << i << " (origin " << c.origin << "): ";
    scalar(c.body);
    out << (c.rel == Rel::Le ? " <= 0" : " == 0") << "\n";
  }
  out << "decisions:\n";
  for (const auto& d : model.decisions)
    out << "  " << d.name << " in [" << d.lower << ", " << d.upper << "] "
        << var_kind_to_string(d.kind) << "\n";
  out << "uncertain entries:\n";
  for (const auto& p : model.params) out << "  " << p.name << " nominal " << p.nominal << "\n";
  return out.str();
}

}  // namespace duopt
