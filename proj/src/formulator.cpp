#include "duopt/formulator.hpp"

#include <cstdlib>

#ifdef DUOPT_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "duopt/errors.hpp"

namespace duopt {

LinearModel author_with_truth(const ProblemBundle& bundle) {
  if (bundle.truth.empty())
    fail("PreconditionFailure", "bundle has no truth.json to author from");
  return lower_to_model(bundle.truth, bundle);
}

namespace {

std::string strip_fences(const std::string& text) {
  // accept raw JSON or a ```json ... ``` block; fall back to the outermost
  // object braces
  const auto first_brace = text.find('{');
  const auto last_brace = text.rfind('}');
  if (first_brace == std::string::npos || last_brace == std::string::npos ||
      last_brace < first_brace)
    fail("MalformedModelDocument", "response contains no JSON object");
  return text.substr(first_brace, last_brace - first_brace + 1);
}

Shape shape_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) fail("MalformedModelDocument", where + ": shape must be a list");
  Shape s;
  for (const auto& el : j) {
    if (!el.is_number_integer() || el.get<std::int64_t>() <= 0)
      fail("MalformedModelDocument", where + ": shape entries must be positive integers");
    s.push_back(el.get<std::int64_t>());
  }
  return s;
}

}  // namespace

ModelDocument parse_model_document(const std::string& response) {
  Json j;
  try {
    j = Json::parse(strip_fences(response));
  } catch (const nlohmann::json::parse_error& e) {
    fail("MalformedModelDocument", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("MalformedModelDocument", "document must be a JSON object");
  ModelDocument doc;
  auto cs = j.find("constraints");
  if (cs == j.end() || !cs->is_array())
    fail("MalformedModelDocument", "missing 'constraints' list");
  for (const auto& c : *cs) {
    if (!c.is_string()) fail("MalformedModelDocument", "constraints must be strings");
    doc.constraints.push_back(c.get<std::string>());
  }
  auto obj = j.find("objective");
  if (obj == j.end() || !obj->is_string())
    fail("MalformedModelDocument", "missing string 'objective'");
  doc.objective = obj->get<std::string>();
  auto pt = j.find("problem_type");
  if (pt == j.end() || !pt->is_string())
    fail("MalformedModelDocument", "missing string 'problem_type'");
  if (pt->get<std::string>() == "min") doc.problem_type = Sense::Min;
  else if (pt->get<std::string>() == "max") doc.problem_type = Sense::Max;
  else fail("MalformedModelDocument", "problem_type must be 'min' or 'max'");

  auto dv = j.find("decision_variables");
  if (dv == j.end()) dv = j.find("decision variables");
  if (dv != j.end()) {
    if (!dv->is_array()) fail("MalformedModelDocument", "'decision_variables' must be a list");
    std::vector<DecisionSpec> decisions;
    for (const auto& d : *dv) {
      DecisionSpec spec;
      if (!d.is_object() || !d.contains("symbol") || !d["symbol"].is_string())
        fail("MalformedModelDocument", "decision entry needs a string 'symbol'");
      spec.symbol = d["symbol"].get<std::string>();
      if (d.contains("shape")) spec.shape = shape_from_json(d["shape"], spec.symbol);
      decisions.push_back(std::move(spec));
    }
    doc.decisions = std::move(decisions);
  }
  auto pv = j.find("parameters");
  if (pv != j.end()) {
    if (!pv->is_array()) fail("MalformedModelDocument", "'parameters' must be a list");
    std::vector<ModelDocument::ParameterDecl> params;
    for (const auto& p : *pv) {
      ModelDocument::ParameterDecl decl;
      if (!p.is_object() || !p.contains("symbol") || !p["symbol"].is_string())
        fail("MalformedModelDocument", "parameter entry needs a string 'symbol'");
      decl.symbol = p["symbol"].get<std::string>();
      if (p.contains("shape")) decl.shape = shape_from_json(p["shape"], decl.symbol);
      if (p.contains("is_random")) {
        const auto& r = p["is_random"];
        if (r.is_boolean()) decl.is_random = r.get<bool>();
        else if (r.is_number_integer()) decl.is_random = r.get<std::int64_t>() != 0;
      }
      params.push_back(std::move(decl));
    }
    doc.parameters = std::move(params);
  }
  return doc;
}

std::vector<std::string> validate_model_document(const ModelDocument& doc,
                                                 const ProblemBundle& bundle) {
  std::vector<std::string> feedback;
  if (doc.decisions) {
    for (const auto& d : *doc.decisions) {
      const DecisionSpec* ref = bundle.find_decision(d.symbol);
      if (!ref) {
        feedback.push_back("decision '" + d.symbol + "' is not in the required output format");
        continue;
      }
      if (!d.shape.empty() && d.shape != ref->shape)
        feedback.push_back("decision '" + d.symbol + "' shape " + shape_to_string(d.shape) +
                           " must be " + shape_to_string(ref->shape));
    }
    for (const auto& d : bundle.decisions) {
      bool found = false;
      for (const auto& given : *doc.decisions) found = found || given.symbol == d.symbol;
      if (!found)
        feedback.push_back("required decision '" + d.symbol + "' is missing from the document");
    }
  }
  if (doc.parameters) {
    for (const auto& p : *doc.parameters) {
      const ParameterSpec* ref = bundle.training.find(p.symbol);
      if (!ref) {
        feedback.push_back("parameter '" + p.symbol + "' is not part of the problem data");
        continue;
      }
      if (!p.shape.empty() && p.shape != ref->shape)
        feedback.push_back("parameter '" + p.symbol + "' shape " + shape_to_string(p.shape) +
                           " must be " + shape_to_string(ref->shape));
      if (p.is_random && *p.is_random != ref->is_random)
        feedback.push_back("parameter '" + p.symbol + "' has the wrong is_random flag");
    }
  }
  if (doc.constraints.empty()) feedback.push_back("document declares no constraints");
  if (doc.objective.empty()) feedback.push_back("document declares no objective");
  return feedback;
}

LinearModel lower_model_document(const ModelDocument& doc, const ProblemBundle& bundle) {
  TruthSpec truth;
  truth.constraints = doc.constraints;
  truth.objective = doc.objective;
  truth.problem_type = doc.problem_type;
  return lower_to_model(truth, bundle);
}

std::string MockChatTransport::complete(const Json& request) {
  requests_.push_back(request);
  if (next_ >= responses_.size())
    fail("TransportFailure", "mock transport has no response for attempt " +
                                 std::to_string(next_ + 1));
  return responses_[next_++];
}

LlmEndpoint LlmEndpoint::from_file(const std::string& path) {
  const Json j = load_json_file(path);
  if (!j.is_object()) fail("MalformedDocument", path + ": endpoint config must be an object");
  LlmEndpoint e;
  e.base_url = j.value("base_url", "");
  e.api_key = j.value("api_key", "");
  e.model = j.value("model", "");
  e.path = j.value("path", e.path);
  return e;
}

std::optional<LlmEndpoint> LlmEndpoint::from_env() {
  LlmEndpoint e;
  bool configured = false;
  if (const char* file = std::getenv("DUOPT_LLM_CONFIG"); file && *file) {
    e = from_file(file);
    configured = !e.base_url.empty();
  }
  if (const char* base = std::getenv("DUOPT_LLM_BASE_URL"); base && *base) {
    e.base_url = base;
    configured = true;
  }
  if (const char* key = std::getenv("DUOPT_LLM_API_KEY"); key && *key) e.api_key = key;
  if (const char* model = std::getenv("DUOPT_LLM_MODEL"); model && *model) e.model = model;
  if (!configured) return std::nullopt;
  return e;
}

namespace {

class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(LlmEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

  std::string complete(const Json& request) override {
    httplib::Client client(endpoint_.base_url);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!endpoint_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
    auto res = client.Post(endpoint_.path, headers, request.dump(), "application/json");
    if (!res)
      fail("TransportFailure", "request to " + endpoint_.base_url + " failed: " +
                                   httplib::to_string(res.error()));
    if (res->status / 100 != 2)
      fail("TransportFailure",
           "endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
      const Json body = Json::parse(res->body);
      return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      fail("TransportFailure", std::string("unexpected response body: ") + e.what());
    }
  }

 private:
  LlmEndpoint endpoint_;
};

}  // namespace

std::unique_ptr<ChatTransport> make_http_transport(const LlmEndpoint& endpoint) {
  return std::make_unique<HttpChatTransport>(endpoint);
}

Json build_author_payload(const ProblemBundle& bundle, const LlmAuthorConfig& config,
                          const std::vector<AttemptLog>& history) {
  std::string problem = bundle.description;
  problem += "\n\nRequired output format (decision_variables):\n";
  problem += decisions_to_json(bundle.decisions).dump(2);
  problem += "\n\nTraining data summary:\n";
  for (const auto& p : bundle.parameters()) {
    problem += "- " + p.symbol + " (" + (p.is_random ? "random" : "deterministic") + ", " +
               var_kind_to_string(p.type) + ", shape " + shape_to_string(p.shape) + "): " +
               p.meaning + "; ";
    if (p.is_random) {
      problem += "mean of " + std::to_string(p.samples ? p.samples->size() : 0) +
                 " historical samples = " + tensor_to_json(p.value).dump();
    } else {
      problem += "value = " + tensor_to_json(p.value).dump();
    }
    problem += "\n";
  }

  std::string prompt = config.prompt_template;
  const std::string placeholder = "{problem}";
  if (auto pos = prompt.find(placeholder); pos != std::string::npos)
    prompt.replace(pos, placeholder.size(), problem);
  else
    prompt += "\n" + problem;

  Json messages = Json::array();
  messages.push_back({{"role", "user"}, {"content", prompt}});
  for (const auto& log : history) {
    messages.push_back({{"role", "assistant"}, {"content", log.response}});
    std::string fb = "The previous model document was rejected:\n";
    for (const auto& f : log.feedback) fb += "- " + f + "\n";
    fb += "Return a corrected JSON document with the same format.";
    messages.push_back({{"role", "user"}, {"content", fb}});
  }
  Json payload = Json::object();
  if (!config.model_name.empty()) payload["model"] = config.model_name;
  payload["messages"] = messages;
  payload["temperature"] = 0;
  return payload;
}

AuthorResult author_with_llm(const ProblemBundle& bundle, ChatTransport& transport,
                             const ReflexionPolicy& policy, const LlmAuthorConfig& config) {
  AuthorResult result;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    const Json payload = build_author_payload(bundle, config, result.transcript);
    std::string response;
    try {
      response = transport.complete(payload);
    } catch (const Error& e) {
      result.failure_code = e.code();
      result.transcript.push_back({attempt, "", {e.what()}});
      return result;
    }
    AttemptLog log{attempt, response, {}};
    try {
      const ModelDocument doc = parse_model_document(response);
      log.feedback = validate_model_document(doc, bundle);
      if (log.feedback.empty()) {
        LinearModel model = lower_model_document(doc, bundle);
        result.transcript.push_back(std::move(log));
        result.model = std::move(model);
        return result;
      }
    } catch (const Error& e) {
      log.feedback.push_back(std::string(e.what()));
    }
    result.transcript.push_back(std::move(log));
  }
  result.failure_code = "AttemptsExhausted";
  return result;
}

std::string default_author_prompt() {
  return
      "You will be given a description of a real-world problem. Your task is to understand "
      "the real-world problem and format an optimization model according to the description. "
      "You need to follow these rules:\n"
      "- Recognize decision variables and parameters in the problem.\n"
      "- Identify the types (Continuous, Integer or Binary) and the shapes of the decision "
      "variables.\n"
      "- Identify whether these decision variables should be non-negative.\n"
      "- Identify whether these parameters are random or deterministic.\n"
      "- Identify the objective of the problem.\n"
      "- Identify all the constraints of the problem.\n"
      "\n"
      "The result should be summarized in the json format described as below:\n"
      "- It should contain five aspects: \"parameters\", \"decision_variables\", "
      "\"constraints\", \"objective\", \"problem_type\"\n"
      "- Each parameter consists of four attributes: \"symbol\", \"meaning\", \"is_random\", "
      "\"shape\".\n"
      "- Each decision variable consists of five attributes: \"symbol\", \"meaning\", "
      "\"type\", \"shape\", \"is_non_negative\". Use exactly the symbols and shapes from the "
      "required output format.\n"
      "- The constraints should be organized as a list, each one a string of the math "
      "expression using exactly the symbols provided by the reference.\n"
      "- Each constraint should function as a code representing a logical expression (can be "
      "vector or matrix).\n"
      "- The objective should be a string of the math expression with exactly the symbols "
      "provided by the reference. min or max should never appear in it.\n"
      "- The \"problem_type\" should be min or max denoting the problem type.\n"
      "- In your constraints and objective involving matrixes and vectors you need to "
      "transform these data into np.array using np.asarray(), and use numpy like np.sum() to "
      "better describe your constraints. Vector constraints are supported.\n"
      "- Only the functions np.asarray, np.sum, np.abs, np.maximum, np.minimum, is_integer "
      "and is_binary are available.\n"
      "\n"
      "Now the description is:\n{problem}\n"
      "Give only the json format and omit other information.";
}

}  // namespace duopt
