#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "duopt/bundle.hpp"
#include "duopt/json_util.hpp"
#include "duopt/linear_model.hpp"

namespace duopt {

/// Deterministic baseline author: compiles the bundle's own truth
/// specification. Throws PreconditionFailure when the bundle has no truth.
LinearModel author_with_truth(const ProblemBundle& bundle);

/// Declarative model document returned by an external author: the structured
/// description contract (parameters / decision_variables) extended with the
/// constraint and objective expressions needed to build a model. Documents
/// are validated and lowered, never executed.
struct ModelDocument {
  std::vector<std::string> constraints;
  std::string objective;
  Sense problem_type = Sense::Min;
  std::optional<std::vector<DecisionSpec>> decisions;
  struct ParameterDecl {
    std::string symbol;
    Shape shape;
    std::optional<bool> is_random;
  };
  std::optional<std::vector<ParameterDecl>> parameters;
};

/// Parse a chat response into a document (markdown fences tolerated). Throws
/// "MalformedModelDocument".
ModelDocument parse_model_document(const std::string& response);

/// Cross-check a document against the bundle declarations; returns feedback
/// entries, empty when the document is acceptable.
std::vector<std::string> validate_model_document(const ModelDocument& doc,
                                                 const ProblemBundle& bundle);

/// Lower a validated document with the bundle's data.
LinearModel lower_model_document(const ModelDocument& doc, const ProblemBundle& bundle);

struct ReflexionPolicy {
  int max_attempts = 3;
};

struct AttemptLog {
  int attempt = 0;
  std::string response;
  std::vector<std::string> feedback;  // empty on success
};

/// Transport for chat-completion style endpoints. Implementations either
/// return the assistant text or throw "TransportFailure".
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const Json& request) = 0;
};

/// Scripted transport for offline tests; records every request it sees.
class MockChatTransport : public ChatTransport {
 public:
  explicit MockChatTransport(std::vector<std::string> responses)
      : responses_(std::move(responses)) {}
  std::string complete(const Json& request) override;
  const std::vector<Json>& requests() const { return requests_; }

 private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
  std::vector<Json> requests_;
};

struct LlmEndpoint {
  std::string base_url;   // e.g. https://api.example.com
  std::string api_key;
  std::string model;
  std::string path = "/v1/chat/completions";

  /// Resolve the endpoint: DUOPT_LLM_CONFIG (a JSON file with base_url /
  /// api_key / model / path) provides the base configuration, and the
  /// DUOPT_LLM_BASE_URL / DUOPT_LLM_API_KEY / DUOPT_LLM_MODEL variables
  /// override individual fields.
  static std::optional<LlmEndpoint> from_env();
  static LlmEndpoint from_file(const std::string& path);
};

std::unique_ptr<ChatTransport> make_http_transport(const LlmEndpoint& endpoint);

struct LlmAuthorConfig {
  std::string prompt_template;  // authoring prompt with a {problem} placeholder
  std::string model_name;       // echoed into the request payload
};

struct AuthorResult {
  std::optional<LinearModel> model;
  std::vector<AttemptLog> transcript;
  std::string failure_code;  // AttemptsExhausted / TransportFailure when !model

  bool ok() const { return model.has_value(); }
};

/// Information firewall: the request an external author sees is assembled
/// here from the description, the decision contract and a training-data
/// summary only. Truth expressions and testing samples never enter it.
Json build_author_payload(const ProblemBundle& bundle, const LlmAuthorConfig& config,
                          const std::vector<AttemptLog>& history);

/// Reflexion loop: request a model document, validate, feed the structured
/// errors back, retry up to policy.max_attempts.
AuthorResult author_with_llm(const ProblemBundle& bundle, ChatTransport& transport,
                             const ReflexionPolicy& policy, const LlmAuthorConfig& config);

/// The default authoring prompt shipped with the toolkit.
std::string default_author_prompt();

}  // namespace duopt
