#include "duopt/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "duopt/errors.hpp"
#include "duopt/expr.hpp"

namespace duopt {

namespace {

constexpr double kMeanTol = 1e-9;
constexpr double kIntegerTol = 1e-9;

const char* kParameterKeys[] = {"symbol", "meaning",      "is_random", "value",
                                "sample", "type",         "shape",     "is_non_negative"};
const char* kDecisionKeys[] = {"symbol", "meaning", "type", "shape", "is_non_negative"};

bool parse_flag(const Json& j, const std::string& context) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v == 0 || v == 1) return v == 1;
  }
  fail("MalformedDocument", context + ": expected 0/1 flag");
}

VarKind parse_type(const Json& j, const std::string& context, bool is_parameter) {
  if (!j.is_string()) fail("MalformedDocument", context + ": type must be a string");
  const std::string s = j.get<std::string>();
  if (s == "Continuous") return VarKind::Continuous;
  if (s == "Integer") return VarKind::Integer;
  if (s == "Binary") {
    if (is_parameter)
      fail("MalformedDocument", context + ": Binary parameters are not supported");
    return VarKind::Binary;
  }
  fail("MalformedDocument", context + ": unknown type '" + s + "'");
}

Shape parse_shape(const Json& j, const std::string& context) {
  if (!j.is_array()) fail("MalformedDocument", context + ": shape must be a list");
  Shape shape;
  for (const auto& el : j) {
    if (!el.is_number_integer() || el.get<std::int64_t>() <= 0)
      fail("MalformedDocument", context + ": shape entries must be positive integers");
    shape.push_back(el.get<std::int64_t>());
  }
  return shape;
}

Json collect_extra(const Json& obj, const char* const* known, std::size_t n_known) {
  Json extra = Json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (std::size_t i = 0; i < n_known; ++i)
      if (it.key() == known[i]) {
        is_known = true;
        break;
      }
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

ParameterSpec parse_parameter(const Json& j, const std::string& file) {
  if (!j.is_object()) fail("MalformedDocument", file + ": parameter entry must be an object");
  ParameterSpec p;
  auto need = [&](const char* key) -> const Json& {
    auto it = j.find(key);
    if (it == j.end())
      fail("MalformedDocument", file + ": parameter missing field '" + std::string(key) + "'");
    return *it;
  };
  p.symbol = need("symbol").is_string()
                 ? need("symbol").get<std::string>()
                 : (fail("MalformedDocument", file + ": parameter symbol must be a string"), "");
  const std::string ctx = file + ": parameter '" + p.symbol + "'";
  p.meaning = j.contains("meaning") && j["meaning"].is_string() ? j["meaning"].get<std::string>() : "";
  p.is_random = parse_flag(need("is_random"), ctx + ".is_random");
  p.shape = parse_shape(need("shape"), ctx + ".shape");
  p.type = parse_type(need("type"), ctx, /*is_parameter=*/true);
  p.is_non_negative = parse_flag(need("is_non_negative"), ctx + ".is_non_negative");
  p.value = tensor_from_json(need("value"), ctx + ".value");
  if (p.value.shape() != p.shape)
    fail("ShapeMismatch", ctx + ": value has shape " + shape_to_string(p.value.shape()) +
                              ", declared " + shape_to_string(p.shape));
  const Json& sample = need("sample");
  if (!sample.is_null()) {
    if (!sample.is_array()) fail("MalformedDocument", ctx + ".sample: expected a list or null");
    std::vector<Tensor> samples;
    samples.reserve(sample.size());
    for (const auto& s : sample) samples.push_back(tensor_from_json(s, ctx + ".sample"));
    p.samples = std::move(samples);
  }
  p.extra = collect_extra(j, kParameterKeys, std::size(kParameterKeys));
  return p;
}

Json parameter_to_json(const ParameterSpec& p) {
  Json j = Json::object();
  j["symbol"] = p.symbol;
  j["meaning"] = p.meaning;
  j["is_random"] = p.is_random ? 1 : 0;
  j["value"] = tensor_to_json(p.value);
  if (p.samples) {
    Json arr = Json::array();
    for (const auto& s : *p.samples) arr.push_back(tensor_to_json(s));
    j["sample"] = arr;
  } else {
    j["sample"] = nullptr;
  }
  j["type"] = var_kind_to_string(p.type);
  Json shape = Json::array();
  for (auto d : p.shape) shape.push_back(d);
  j["shape"] = shape;
  j["is_non_negative"] = p.is_non_negative ? 1 : 0;
  for (auto it = p.extra.begin(); it != p.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

DecisionSpec parse_decision(const Json& j, const std::string& file) {
  if (!j.is_object()) fail("MalformedDocument", file + ": decision entry must be an object");
  DecisionSpec d;
  auto it = j.find("symbol");
  if (it == j.end() || !it->is_string())
    fail("MalformedDocument", file + ": decision missing string field 'symbol'");
  d.symbol = it->get<std::string>();
  const std::string ctx = file + ": decision '" + d.symbol + "'";
  d.meaning = j.contains("meaning") && j["meaning"].is_string() ? j["meaning"].get<std::string>() : "";
  auto sh = j.find("shape");
  if (sh == j.end()) fail("MalformedDocument", ctx + ": missing 'shape'");
  d.shape = parse_shape(*sh, ctx + ".shape");
  // type and is_non_negative are optional in decision_symbol.txt
  d.type = j.contains("type") ? parse_type(j["type"], ctx, /*is_parameter=*/false)
                              : VarKind::Continuous;
  d.is_non_negative =
      j.contains("is_non_negative") ? parse_flag(j["is_non_negative"], ctx) : false;
  d.extra = collect_extra(j, kDecisionKeys, std::size(kDecisionKeys));
  return d;
}

Json decision_to_json(const DecisionSpec& d) {
  Json j = Json::object();
  j["symbol"] = d.symbol;
  j["meaning"] = d.meaning;
  j["type"] = var_kind_to_string(d.type);
  Json shape = Json::array();
  for (auto s : d.shape) shape.push_back(s);
  j["shape"] = shape;
  j["is_non_negative"] = d.is_non_negative ? 1 : 0;
  for (auto it = d.extra.begin(); it != d.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

SampleSet parse_sample_set(const Json& j, SampleRole role, const std::string& file) {
  if (!j.is_object()) fail("MalformedDocument", file + ": expected an object");
  SampleSet set;
  set.role = role;
  auto ss = j.find("sample_size");
  if (ss == j.end() || !ss->is_number_integer())
    fail("MalformedDocument", file + ": missing integer 'sample_size'");
  set.sample_size = ss->get<std::int64_t>();
  auto params = j.find("parameters");
  if (params == j.end() || !params->is_array())
    fail("MalformedDocument", file + ": missing 'parameters' list");
  for (const auto& p : *params) set.parameters.push_back(parse_parameter(p, file));
  static const char* kTopKeys[] = {"sample_size", "parameters"};
  set.extra = collect_extra(j, kTopKeys, std::size(kTopKeys));
  return set;
}

TruthSpec parse_truth(const Json& j, const std::string& file) {
  if (!j.is_object()) fail("MalformedDocument", file + ": expected an object");
  TruthSpec t;
  auto cs = j.find("constraints");
  if (cs == j.end() || !cs->is_array())
    fail("MalformedDocument", file + ": missing 'constraints' list");
  for (const auto& c : *cs) {
    if (!c.is_string()) fail("MalformedDocument", file + ": constraints must be strings");
    t.constraints.push_back(c.get<std::string>());
  }
  auto obj = j.find("objective");
  if (obj == j.end() || !obj->is_string())
    fail("MalformedDocument", file + ": missing string 'objective'");
  t.objective = obj->get<std::string>();
  auto pt = j.find("problem_type");
  if (pt == j.end() || !pt->is_string())
    fail("MalformedDocument", file + ": missing string 'problem_type'");
  const std::string s = pt->get<std::string>();
  if (s == "min") t.problem_type = Sense::Min;
  else if (s == "max") t.problem_type = Sense::Max;
  else fail("MalformedDocument", file + ": problem_type must be 'min' or 'max'");
  return t;
}

bool tensor_close(const Tensor& a, const Tensor& b, double tol) {
  if (a.shape() != b.shape()) return false;
  for (std::int64_t i = 0; i < a.size(); ++i)
    if (std::fabs(a.flat(i) - b.flat(i)) > tol) return false;
  return true;
}

Tensor elementwise_mean(const std::vector<Tensor>& samples) {
  Tensor mean(samples.front().shape());
  for (const auto& s : samples)
    for (std::int64_t i = 0; i < s.size(); ++i) mean.flat(i) += s.flat(i);
  for (std::int64_t i = 0; i < mean.size(); ++i)
    mean.flat(i) /= static_cast<double>(samples.size());
  return mean;
}

class Validator {
 public:
  explicit Validator(const ProblemBundle& bundle) : b_(bundle) {}

  ValidationReport run() {
    check_symbols();
    check_decisions();
    check_sample_set(b_.training, "training_sample.json");
    if (b_.testing) {
      check_sample_set(*b_.testing, "testing_sample.json");
      check_role_consistency();
    }
    check_truth();
    return std::move(report_);
  }

 private:
  void error(std::string code, std::string where, std::string message) {
    report_.entries.push_back(
        {Severity::ErrorEntry, std::move(code), std::move(where), std::move(message)});
  }
  void warn(std::string code, std::string where, std::string message) {
    report_.entries.push_back(
        {Severity::Warning, std::move(code), std::move(where), std::move(message)});
  }

  void check_symbols() {
    std::set<std::string> seen;
    auto add = [&](const std::string& s, const char* what) {
      if (s.empty()) error("MalformedDocument", s, std::string(what) + " with empty symbol");
      if (s == "is_integer" || s == "is_binary" || s.rfind("np.", 0) == 0)
        error("ReservedSymbol", s, "symbol collides with a reserved function name");
      if (!seen.insert(s).second)
        error("DuplicateSymbol", s, "symbol declared more than once");
    };
    for (const auto& d : b_.decisions) add(d.symbol, "decision");
    for (const auto& p : b_.parameters()) add(p.symbol, "parameter");
  }

  void check_decisions() {
    for (const auto& d : b_.decisions) {
      if (d.shape.size() > 2)
        error("ShapeMismatch", d.symbol,
              "decision shape has " + std::to_string(d.shape.size()) +
                  " dimensions; at most 2 are supported");
    }
  }

  void check_sample_set(const SampleSet& set, const std::string& file) {
    if (set.sample_size < 1)
      error("SampleSizeInvalid", file, "sample_size must be >= 1");
    for (const auto& p : set.parameters) {
      const std::string where = file + ":" + p.symbol;
      if (p.value.shape() != p.shape)
        error("ShapeMismatch", where, "value shape does not match declared shape");
      if (!p.is_random) {
        if (p.samples)
          error("UnexpectedSamples", where, "deterministic parameter carries samples");
        if (p.type == VarKind::Integer) check_integral(p.value, where + ".value");
        continue;
      }
      if (!p.samples || p.samples->empty()) {
        error("EmptySamples", where, "random parameter has no samples");
        continue;
      }
      if (static_cast<std::int64_t>(p.samples->size()) != set.sample_size)
        error("SampleCountMismatch", where,
              "parameter has " + std::to_string(p.samples->size()) + " samples, sample_size is " +
                  std::to_string(set.sample_size));
      bool shapes_ok = true;
      for (const auto& s : *p.samples)
        if (s.shape() != p.shape) {
          error("ShapeMismatch", where,
                "sample with shape " + shape_to_string(s.shape()) + " for a " +
                    shape_to_string(p.shape) + "-shaped parameter");
          shapes_ok = false;
          break;
        }
      if (shapes_ok) {
        if (!tensor_close(elementwise_mean(*p.samples), p.value, kMeanTol))
          warn("MeanMismatch", where, "'value' is not the elementwise mean of the samples");
        if (p.type == VarKind::Integer)
          for (const auto& s : *p.samples) check_integral(s, where + ".sample");
      }
    }
  }

  void check_integral(const Tensor& t, const std::string& where) {
    for (std::int64_t i = 0; i < t.size(); ++i)
      if (std::fabs(t.flat(i) - std::nearbyint(t.flat(i))) > kIntegerTol) {
        error("NonIntegralValue", where, "Integer-typed entry is not integral");
        return;
      }
  }

  void check_role_consistency() {
    const SampleSet& test = *b_.testing;
    for (const auto& p : b_.parameters()) {
      const ParameterSpec* q = test.find(p.symbol);
      if (!q) {
        error("UnknownSymbol", p.symbol, "parameter missing from testing_sample.json");
        continue;
      }
      if (q->shape != p.shape)
        error("ShapeMismatch", p.symbol, "testing shape differs from training shape");
      if (q->is_random != p.is_random)
        error("RoleMismatch", p.symbol, "is_random differs between training and testing");
    }
    for (const auto& q : test.parameters)
      if (!b_.training.find(q.symbol))
        error("UnknownSymbol", q.symbol, "parameter missing from training_sample.json");
  }

  void check_truth() {
    std::set<std::string> declared;
    for (const auto& d : b_.decisions) declared.insert(d.symbol);
    for (const auto& p : b_.parameters()) declared.insert(p.symbol);

    auto check_idents = [&](const expr::NodePtr& ast, const std::string& where) {
      for (const auto& name : expr::free_identifiers(ast))
        if (!declared.count(name)) error("UnknownSymbol", where, name);
    };

    for (std::size_t i = 0; i < b_.truth.constraints.size(); ++i) {
      const std::string where = "truth.json:constraints[" + std::to_string(i) + "]";
      try {
        auto ast = expr::parse_expr(b_.truth.constraints[i]);
        if (!expr::is_constraint_expr(ast))
          error("NotAConstraint", where, "constraint must compare or test integrality");
        else if (expr::has_nested_compare(ast))
          error("NestedCompare", where, "comparisons may only appear at the top level");
        check_idents(ast, where);
      } catch (const Error& e) {
        error(e.code(), where, e.what());
      }
    }
    if (b_.truth.objective.empty()) {
      error("MalformedDocument", "truth.json", "objective is empty");
      return;
    }
    try {
      auto obj = expr::parse_expr(b_.truth.objective);
      if (expr::is_constraint_expr(obj) || expr::has_nested_compare(obj))
        error("NotAValue", "truth.json:objective", "objective must not contain a comparison");
      check_idents(obj, "truth.json:objective");
    } catch (const Error& e) {
      error(e.code(), "truth.json:objective", e.what());
    }
  }

  const ProblemBundle& b_;
  ValidationReport report_;
};

}  // namespace

bool ParameterSpec::operator==(const ParameterSpec& o) const {
  return symbol == o.symbol && meaning == o.meaning && is_random == o.is_random &&
         value == o.value && samples == o.samples && type == o.type && shape == o.shape &&
         is_non_negative == o.is_non_negative && extra == o.extra;
}

bool DecisionSpec::operator==(const DecisionSpec& o) const {
  return symbol == o.symbol && meaning == o.meaning && type == o.type && shape == o.shape &&
         is_non_negative == o.is_non_negative && extra == o.extra;
}

const ParameterSpec* SampleSet::find(const std::string& symbol) const {
  for (const auto& p : parameters)
    if (p.symbol == symbol) return &p;
  return nullptr;
}

bool SampleSet::operator==(const SampleSet& o) const {
  return role == o.role && sample_size == o.sample_size && parameters == o.parameters &&
         extra == o.extra;
}

TrainingView::TrainingView(const SampleSet& s) : set_(&s) {
  if (s.role != SampleRole::Training)
    fail("PreconditionFailure", "counterpart builders only accept training-role sample sets");
}

const DecisionSpec* ProblemBundle::find_decision(const std::string& symbol) const {
  for (const auto& d : decisions)
    if (d.symbol == symbol) return &d;
  return nullptr;
}

bool ProblemBundle::operator==(const ProblemBundle& o) const {
  return description == o.description && decisions == o.decisions && truth == o.truth &&
         training == o.training && testing == o.testing;
}

bool ValidationReport::ok() const { return error_count() == 0; }

std::size_t ValidationReport::error_count() const {
  std::size_t n = 0;
  for (const auto& e : entries)
    if (e.severity == Severity::ErrorEntry) ++n;
  return n;
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& e : entries) {
    out += e.severity == Severity::ErrorEntry ? "error" : "warning";
    out += " [" + e.code + "] " + e.where + ": " + e.message + "\n";
  }
  return out;
}

ProblemBundle load_bundle_lenient(const std::filesystem::path& root, ValidationReport* report) {
  ProblemBundle b;
  b.description = read_text_file((root / "description.txt").string());

  const std::string decision_file = (root / "decision_symbol.txt").string();
  Json dj = load_json_file(decision_file);
  auto dv = dj.find("decision_variables");
  if (dv == dj.end() || !dv->is_array())
    fail("MalformedDocument", decision_file + ": missing 'decision_variables' list");
  for (const auto& d : *dv) b.decisions.push_back(parse_decision(d, "decision_symbol.txt"));

  b.truth = parse_truth(load_json_file((root / "truth.json").string()), "truth.json");
  b.training = parse_sample_set(load_json_file((root / "training_sample.json").string()),
                                SampleRole::Training, "training_sample.json");
  const auto testing_path = root / "testing_sample.json";
  if (std::filesystem::exists(testing_path))
    b.testing = parse_sample_set(load_json_file(testing_path.string()), SampleRole::Testing,
                                 "testing_sample.json");
  // format_description.json, when present, is auxiliary and ignored

  ValidationReport r = validate_bundle(b);
  if (report) *report = std::move(r);
  else if (!r.ok()) {
    const auto& first = *std::find_if(r.entries.begin(), r.entries.end(), [](const auto& e) {
      return e.severity == Severity::ErrorEntry;
    });
    fail(first.code, first.where + ": " + first.message);
  }
  return b;
}

ProblemBundle load_bundle(const std::filesystem::path& root) {
  return load_bundle_lenient(root, nullptr);
}

ValidationReport validate_bundle(const ProblemBundle& bundle) {
  return Validator(bundle).run();
}

Json sample_set_to_json(const SampleSet& set) {
  Json j = Json::object();
  j["sample_size"] = set.sample_size;
  Json params = Json::array();
  for (const auto& p : set.parameters) params.push_back(parameter_to_json(p));
  j["parameters"] = params;
  for (auto it = set.extra.begin(); it != set.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

void write_sample_set(const SampleSet& set, const std::filesystem::path& path) {
  if (set.sample_size < 1) fail("SampleSizeInvalid", "sample_size must be >= 1");
  write_text_file(path.string(), sample_set_to_json(set).dump(2) + "\n");
}

SampleSet read_sample_set(const std::filesystem::path& path, SampleRole role) {
  return parse_sample_set(load_json_file(path.string()), role,
                          path.filename().string());
}

Json decisions_to_json(const std::vector<DecisionSpec>& decisions) {
  Json j = Json::object();
  Json arr = Json::array();
  for (const auto& d : decisions) arr.push_back(decision_to_json(d));
  j["decision_variables"] = arr;
  return j;
}

Json truth_to_json(const TruthSpec& truth) {
  Json j = Json::object();
  j["constraints"] = truth.constraints;
  j["objective"] = truth.objective;
  j["problem_type"] = sense_to_string(truth.problem_type);
  return j;
}

void write_bundle(const ProblemBundle& bundle, const std::filesystem::path& root) {
  std::filesystem::create_directories(root);
  write_text_file((root / "description.txt").string(), bundle.description);
  write_text_file((root / "decision_symbol.txt").string(),
                  decisions_to_json(bundle.decisions).dump(2) + "\n");
  write_text_file((root / "truth.json").string(), truth_to_json(bundle.truth).dump(2) + "\n");
  write_sample_set(bundle.training, root / "training_sample.json");
  if (bundle.testing) write_sample_set(*bundle.testing, root / "testing_sample.json");
}

}  // namespace duopt
