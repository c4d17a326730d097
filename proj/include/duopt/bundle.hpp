#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "duopt/json_util.hpp"
#include "duopt/tensor.hpp"
#include "duopt/types.hpp"

namespace duopt {

/// One problem parameter as declared in training_sample.json /
/// testing_sample.json. A random parameter carries per-sample realizations;
/// `value` is its nominal value, documented to be the sample mean.
struct ParameterSpec {
  std::string symbol;
  std::string meaning;
  bool is_random = false;
  Tensor value;
  std::optional<std::vector<Tensor>> samples;
  VarKind type = VarKind::Continuous;  // Binary is rejected for parameters
  Shape shape;
  bool is_non_negative = false;
  Json extra = Json::object();  // unknown fields, preserved on round-trip

  bool operator==(const ParameterSpec& o) const;
};

struct DecisionSpec {
  std::string symbol;
  std::string meaning;
  VarKind type = VarKind::Continuous;
  Shape shape;  // at most 2 dimensions; empty = scalar
  bool is_non_negative = false;
  Json extra = Json::object();

  bool operator==(const DecisionSpec& o) const;
};

struct TruthSpec {
  std::vector<std::string> constraints;
  std::string objective;
  Sense problem_type = Sense::Min;

  bool empty() const { return objective.empty() && constraints.empty(); }
  bool operator==(const TruthSpec& o) const = default;
};

/// The full content of one sample file: sample_size plus every parameter with
/// its data for that role. Realization i across random parameters is one
/// joint scenario.
struct SampleSet {
  SampleRole role = SampleRole::Training;
  std::int64_t sample_size = 0;
  std::vector<ParameterSpec> parameters;
  Json extra = Json::object();

  const ParameterSpec* find(const std::string& symbol) const;
  bool operator==(const SampleSet& o) const;
};

/// Access token for model construction: constructible from training-role
/// sample sets only, so counterpart builders cannot receive testing data.
class TrainingView {
 public:
  explicit TrainingView(const SampleSet& s);
  const SampleSet& set() const { return *set_; }

 private:
  const SampleSet* set_;
};

struct ProblemBundle {
  std::string description;
  std::vector<DecisionSpec> decisions;
  TruthSpec truth;
  SampleSet training;
  std::optional<SampleSet> testing;

  const std::vector<ParameterSpec>& parameters() const { return training.parameters; }
  const DecisionSpec* find_decision(const std::string& symbol) const;
  bool operator==(const ProblemBundle& o) const;
};

enum class Severity { Warning, ErrorEntry };

struct ValidationEntry {
  Severity severity;
  std::string code;   // e.g. MeanMismatch, ShapeMismatch, UnknownSymbol
  std::string where;  // symbol / file / constraint index
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool ok() const;          // no errors (warnings allowed)
  std::size_t error_count() const;
  std::string to_string() const;
};

/// Load a bundle directory (description.txt, decision_symbol.txt, truth.json,
/// training_sample.json, optional testing_sample.json) and validate it.
/// Throws Error with codes MissingFile, MalformedDocument, UnknownSymbol or
/// ShapeMismatch; warnings from validation are tolerated.
ProblemBundle load_bundle(const std::filesystem::path& root);

/// Load without enforcing validation errors; `report`, when given, receives
/// the full rule results. Parse-level failures still throw.
ProblemBundle load_bundle_lenient(const std::filesystem::path& root,
                                  ValidationReport* report = nullptr);

/// Run every schema invariant over an in-memory bundle.
ValidationReport validate_bundle(const ProblemBundle& bundle);

/// Serialize a sample set in the published field layout. Requires
/// sample_size >= 1; numbers survive a round-trip bit-exactly.
void write_sample_set(const SampleSet& set, const std::filesystem::path& path);

SampleSet read_sample_set(const std::filesystem::path& path, SampleRole role);

/// Write a complete bundle directory (used by generators and round-trip tests).
void write_bundle(const ProblemBundle& bundle, const std::filesystem::path& root);

Json sample_set_to_json(const SampleSet& set);
Json decisions_to_json(const std::vector<DecisionSpec>& decisions);
Json truth_to_json(const TruthSpec& truth);

}  // namespace duopt
