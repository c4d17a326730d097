#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "duopt/evaluator.hpp"
#include "duopt/formulator.hpp"
#include "duopt/paradigms.hpp"
#include "duopt/sampler.hpp"

namespace duopt::cli {

namespace fs = std::filesystem;

enum class AuthorKind { Truth, Llm };

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitInvalid = 2;

struct RunConfig {
  fs::path dataset_root;
  fs::path out_dir;
  std::vector<ParadigmConfig> paradigms;
  SampleFamily family = SampleFamily::Lognormal;
  double cv = 0.3;
  double halfwidth_rel = 0.1;
  std::vector<std::uint64_t> seeds;
  std::int64_t n_in = 50;
  std::int64_t n_out = 1000;
  double tol = 1e-6;
  AuthorKind author = AuthorKind::Truth;
  int workers = 1;
  bool mps_export = false;
  std::string prompt_template;  // empty = built-in default (llm author only)
};

Json record_to_json(const DecisionRecord& record);
DecisionRecord record_from_json(const Json& j);
Json eval_report_to_json(const EvalReport& report);

/// Load + validate; prints the report. Exit 0 when there are no errors.
int run_validate(const fs::path& bundle_dir, std::ostream& out);

/// Regenerate training/testing samples around the seed problem's nominal
/// values; description/decision_symbol/truth are copied byte-identically and
/// the generator configuration is echoed into gen_manifest.json.
int run_gen(const fs::path& seed_dir, const fs::path& out_dir, const GeneratorConfig& base,
            std::int64_t n_in, std::int64_t n_out, std::ostream& out);

struct SolveOutcome {
  DecisionRecord record;
  std::optional<ConcreteLP> lp;  // populated for MPS export
  std::vector<AttemptLog> transcript;
  std::string error;  // author/solver failure description
  bool success = false;
};

/// author -> counterpart -> solve (in memory).
SolveOutcome solve_problem(const ProblemBundle& bundle, const std::string& problem_id,
                           const ParadigmConfig& paradigm, AuthorKind author,
                           ChatTransport* transport = nullptr,
                           const std::string& prompt_template = {});

int run_solve(const fs::path& bundle_dir, const ParadigmConfig& paradigm, AuthorKind author,
              const fs::path& record_path, bool mps_export, std::ostream& out);

int run_eval(const fs::path& bundle_dir, const fs::path& record_path,
             const fs::path& report_path, double tol, std::ostream& out);

struct BenchCell {
  std::string problem;
  std::string paradigm;
  std::uint64_t seed = 0;
  bool success = false;
  std::string error;
  std::optional<EvalReport> report;
};

struct BenchResult {
  std::vector<BenchCell> cells;                    // canonical order
  std::vector<std::pair<std::string, DatasetSummary>> rows;  // per paradigm
  int exit_code = kExitOk;
};

/// Full sweep problems x paradigms x seeds with per-cell isolation; summaries
/// are written as TSV, aligned text and JSON under config.out_dir.
BenchResult run_bench(const RunConfig& config, std::ostream& out);

std::string summary_table_tsv(const std::vector<std::pair<std::string, DatasetSummary>>& rows);
std::string summary_table_text(const std::vector<std::pair<std::string, DatasetSummary>>& rows);

/// Problem directories under root (root itself when it holds description.txt),
/// sorted by name.
std::vector<fs::path> discover_problems(const fs::path& root);

}  // namespace duopt::cli
