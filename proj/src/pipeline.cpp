#include "duopt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "duopt/errors.hpp"

namespace duopt::cli {

namespace {

std::string format_metric(const std::optional<double>& v, const char* fmt = "%.4f") {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), fmt, *v);
  return buf;
}

Tensor tensor_from_flat(const std::vector<double>& x, std::int32_t begin, const Shape& shape) {
  Tensor t(shape);
  for (std::int64_t i = 0; i < t.size(); ++i)
    t.flat(i) = x[static_cast<std::size_t>(begin + i)];
  return t;
}

}  // namespace

Json record_to_json(const DecisionRecord& record) {
  Json j = Json::object();
  j["problem"] = record.problem_id;
  j["paradigm"] = record.paradigm;
  j["status"] = lp_status_to_string(record.status);
  j["v_in"] = record.v_in;
  Json decisions = Json::object();
  for (const auto& [symbol, tensor] : record.decisions)
    decisions[symbol] = tensor_to_json(tensor);
  j["decisions"] = decisions;
  return j;
}

DecisionRecord record_from_json(const Json& j) {
  DecisionRecord r;
  r.problem_id = j.value("problem", "");
  r.paradigm = j.value("paradigm", "");
  const std::string status = j.value("status", "infeasible");
  if (status == "optimal") r.status = LpStatus::Optimal;
  else if (status == "unbounded") r.status = LpStatus::Unbounded;
  else if (status == "iteration_limit") r.status = LpStatus::IterationLimit;
  else if (status == "node_limit") r.status = LpStatus::NodeLimit;
  else r.status = LpStatus::Infeasible;
  r.v_in = j.value("v_in", 0.0);
  if (j.contains("decisions"))
    for (auto it = j["decisions"].begin(); it != j["decisions"].end(); ++it)
      r.decisions[it.key()] = tensor_from_json(it.value(), "decisions." + it.key());
  return r;
}

Json eval_report_to_json(const EvalReport& report) {
  Json j = Json::object();
  j["v_in"] = report.v_in;
  j["n_out"] = report.n_out;
  j["n_feas"] = report.n_feas;
  j["fr"] = report.fr;
  j["obj"] = report.obj ? Json(*report.obj) : Json(nullptr);
  j["opr"] = report.opr ? Json(*report.opr) : Json(nullptr);
  Json per = Json::object();
  per["feasible"] = report.feasible;
  per["objective"] = report.v_out;
  j["per_sample"] = per;
  return j;
}

int run_validate(const fs::path& bundle_dir, std::ostream& out) {
  ValidationReport report;
  try {
    (void)load_bundle_lenient(bundle_dir, &report);
  } catch (const Error& e) {
    out << "error [" << e.code() << "] " << e.what() << "\n";
    return kExitInvalid;
  }
  out << report.to_string();
  if (!report.ok()) {
    out << "invalid: " << report.error_count() << " error(s)\n";
    return kExitInvalid;
  }
  out << "ok\n";
  return kExitOk;
}

int run_gen(const fs::path& seed_dir, const fs::path& out_dir, const GeneratorConfig& base,
            std::int64_t n_in, std::int64_t n_out, std::ostream& out) {
  const ProblemBundle seed = load_bundle(seed_dir);
  fs::create_directories(out_dir);
  // the seed problem's text files carry over byte-identically
  for (const char* name : {"description.txt", "decision_symbol.txt", "truth.json"})
    write_text_file((out_dir / name).string(), read_text_file((seed_dir / name).string()));

  GeneratorConfig cfg = base;
  cfg.n = n_in;
  write_sample_set(generate_samples(seed.parameters(), cfg, SampleRole::Training),
                   out_dir / "training_sample.json");
  cfg.n = n_out;
  write_sample_set(generate_samples(seed.parameters(), cfg, SampleRole::Testing),
                   out_dir / "testing_sample.json");

  Json manifest = Json::object();
  manifest["family"] = sample_family_to_string(base.family);
  manifest["cv"] = base.cv;
  manifest["halfwidth_rel"] = base.halfwidth_rel;
  manifest["seed"] = base.seed;
  manifest["n_in"] = n_in;
  manifest["n_out"] = n_out;
  manifest["clip_nonnegative"] = base.clip_nonnegative;
  manifest["round_integers"] = base.round_integers;
  write_text_file((out_dir / "gen_manifest.json").string(), manifest.dump(2) + "\n");
  out << "generated " << out_dir.string() << " (n_in=" << n_in << ", n_out=" << n_out << ")\n";
  return kExitOk;
}

SolveOutcome solve_problem(const ProblemBundle& bundle, const std::string& problem_id,
                           const ParadigmConfig& paradigm, AuthorKind author,
                           ChatTransport* transport, const std::string& prompt_template) {
  SolveOutcome outcome;
  outcome.record.problem_id = problem_id;
  outcome.record.paradigm = paradigm.to_string();
  try {
    LinearModel model;
    if (author == AuthorKind::Truth) {
      model = author_with_truth(bundle);
    } else {
      if (!transport) fail("PreconditionFailure", "LLM author needs a configured transport");
      LlmAuthorConfig cfg;
      cfg.prompt_template = prompt_template.empty() ? default_author_prompt() : prompt_template;
      AuthorResult res = author_with_llm(bundle, *transport, ReflexionPolicy{}, cfg);
      outcome.transcript = res.transcript;
      if (!res.ok()) {
        outcome.error = res.failure_code;
        return outcome;
      }
      model = std::move(*res.model);
    }
    const TrainingView training(bundle.training);
    ConcreteLP lp = build_counterpart(model, training, paradigm);
    const LPSolution sol = lp.has_integers() ? solve_milp(lp) : solve_lp(lp);
    outcome.record.status = sol.status;
    if (sol.status != LpStatus::Optimal) {
      outcome.error = "solver: " + lp_status_to_string(sol.status);
      outcome.lp = std::move(lp);
      return outcome;
    }
    outcome.record.v_in = sol.objective;
    for (const auto& d : bundle.decisions) {
      const auto span = model.decision_spans.at(d.symbol);
      outcome.record.decisions[d.symbol] = tensor_from_flat(sol.x, span.first, d.shape);
    }
    outcome.lp = std::move(lp);
    outcome.success = true;
  } catch (const Error& e) {
    outcome.error = e.what();
  }
  return outcome;
}

int run_solve(const fs::path& bundle_dir, const ParadigmConfig& paradigm, AuthorKind author,
              const fs::path& record_path, bool mps_export, std::ostream& out) {
  ProblemBundle bundle;
  try {
    bundle = load_bundle(bundle_dir);
  } catch (const Error& e) {
    out << "error [" << e.code() << "] " << e.what() << "\n";
    return kExitInvalid;
  }
  std::unique_ptr<ChatTransport> transport;
  std::string prompt_template;
  if (author == AuthorKind::Llm) {
    auto endpoint = LlmEndpoint::from_env();
    if (!endpoint) {
      out << "error [PreconditionFailure] DUOPT_LLM_BASE_URL is not set\n";
      return kExitInvalid;
    }
    transport = make_http_transport(*endpoint);
    if (const char* file = std::getenv("DUOPT_AUTHOR_PROMPT_FILE"))
      prompt_template = read_text_file(file);
  }
  const std::string problem_id = bundle_dir.filename().string();
  const SolveOutcome outcome =
      solve_problem(bundle, problem_id, paradigm, author, transport.get(), prompt_template);
  write_text_file(record_path.string(), record_to_json(outcome.record).dump(2) + "\n");
  if (!outcome.transcript.empty()) {
    Json t = Json::array();
    for (const auto& log : outcome.transcript)
      t.push_back({{"attempt", log.attempt},
                   {"response", log.response},
                   {"feedback", log.feedback}});
    fs::path tp = record_path;
    tp.replace_extension(".transcript.json");
    write_text_file(tp.string(), t.dump(2) + "\n");
  }
  if (mps_export && outcome.lp) {
    fs::path mp = record_path;
    mp.replace_extension(".mps");
    write_text_file(mp.string(), to_mps(*outcome.lp, problem_id));
  }
  if (!outcome.success) {
    out << "solve failed: " << outcome.error << "\n";
    return kExitPartial;
  }
  out << "solved " << problem_id << " [" << paradigm.to_string()
      << "] v_in=" << outcome.record.v_in << "\n";
  return kExitOk;
}

int run_eval(const fs::path& bundle_dir, const fs::path& record_path,
             const fs::path& report_path, double tol, std::ostream& out) {
  try {
    const ProblemBundle bundle = load_bundle(bundle_dir);
    const DecisionRecord record = record_from_json(load_json_file(record_path.string()));
    if (!record.solved()) {
      out << "record has status " << lp_status_to_string(record.status) << "; nothing to evaluate\n";
      return kExitInvalid;
    }
    const EvalReport report = evaluate_decision(record, bundle, tol);
    write_text_file(report_path.string(), eval_report_to_json(report).dump(2) + "\n");
    out << "fr=" << report.fr << " obj=" << format_metric(report.obj)
        << " opr=" << format_metric(report.opr) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    out << "error [" << e.code() << "] " << e.what() << "\n";
    return kExitInvalid;
  }
}

std::vector<fs::path> discover_problems(const fs::path& root) {
  std::vector<fs::path> out;
  if (fs::exists(root / "description.txt")) {
    out.push_back(root);
    return out;
  }
  if (!fs::is_directory(root)) return out;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && fs::exists(entry.path() / "description.txt"))
      out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string summary_table_tsv(const std::vector<std::pair<std::string, DatasetSummary>>& rows) {
  std::string out = "model\tSR\tFR\tObj\tOpR\n";
  for (const auto& [name, s] : rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", s.sr);
    out += name + "\t" + buf + "\t" + format_metric(s.fr) + "\t" +
           format_metric(s.obj, "%.4g") + "\t" + format_metric(s.opr) + "\n";
  }
  return out;
}

std::string summary_table_text(const std::vector<std::pair<std::string, DatasetSummary>>& rows) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-12s %8s %8s %12s %8s\n", "model", "SR", "FR", "Obj", "OpR");
  out += line;
  for (const auto& [name, s] : rows) {
    std::snprintf(line, sizeof(line), "%-12s %8.4f %8s %12s %8s\n", name.c_str(), s.sr,
                  format_metric(s.fr).c_str(), format_metric(s.obj, "%.6g").c_str(),
                  format_metric(s.opr).c_str());
    out += line;
  }
  return out;
}

BenchResult run_bench(const RunConfig& config, std::ostream& out) {
  BenchResult result;
  if (config.seeds.empty() || config.paradigms.empty() || config.n_in < 1 || config.n_out < 1) {
    out << "error [PreconditionFailure] bench needs seeds, paradigms and positive sizes\n";
    result.exit_code = kExitInvalid;
    return result;
  }
  const std::vector<fs::path> problems = discover_problems(config.dataset_root);
  if (problems.empty()) {
    out << "error [MissingFile] no problems under " << config.dataset_root.string() << "\n";
    result.exit_code = kExitInvalid;
    return result;
  }

  struct Task {
    fs::path problem_dir;
    std::string problem;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& dir : problems)
    for (const auto seed : config.seeds)
      tasks.push_back({dir, dir.filename().string(), seed});

  std::unique_ptr<ChatTransport> transport;
  if (config.author == AuthorKind::Llm) {
    auto endpoint = LlmEndpoint::from_env();
    if (!endpoint) {
      out << "error [PreconditionFailure] DUOPT_LLM_BASE_URL is not set\n";
      result.exit_code = kExitInvalid;
      return result;
    }
    transport = make_http_transport(*endpoint);
  }

  // cells in canonical order (problem, paradigm, seed)
  const std::size_t n_paradigms = config.paradigms.size();
  result.cells.resize(tasks.size() * n_paradigms);

  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task& task = tasks[t];
      const fs::path instance_dir =
          config.out_dir / "instances" / task.problem / ("seed" + std::to_string(task.seed));
      ProblemBundle bundle;
      std::string gen_error;
      try {
        GeneratorConfig gen;
        gen.family = config.family;
        gen.cv = config.cv;
        gen.halfwidth_rel = config.halfwidth_rel;
        gen.seed = task.seed;
        std::ostringstream sink;
        run_gen(task.problem_dir, instance_dir, gen, config.n_in, config.n_out, sink);
        bundle = load_bundle(instance_dir);
      } catch (const Error& e) {
        gen_error = e.what();
      }
      for (std::size_t pi = 0; pi < n_paradigms; ++pi) {
        BenchCell& cell = result.cells[t * n_paradigms + pi];
        cell.problem = task.problem;
        cell.paradigm = config.paradigms[pi].to_string();
        cell.seed = task.seed;
        if (!gen_error.empty()) {
          cell.error = gen_error;
          continue;
        }
        const fs::path cell_dir = config.out_dir / "cells" / task.problem / cell.paradigm /
                                  ("seed" + std::to_string(task.seed));
        try {
          const SolveOutcome solved =
              solve_problem(bundle, task.problem, config.paradigms[pi], config.author,
                            transport.get(), config.prompt_template);
          fs::create_directories(cell_dir);
          write_text_file((cell_dir / "record.json").string(),
                          record_to_json(solved.record).dump(2) + "\n");
          if (!solved.transcript.empty()) {
            Json t = Json::array();
            for (const auto& log : solved.transcript)
              t.push_back({{"attempt", log.attempt},
                           {"response", log.response},
                           {"feedback", log.feedback}});
            write_text_file((cell_dir / "transcript.json").string(), t.dump(2) + "\n");
          }
          if (config.mps_export && solved.lp)
            write_text_file((cell_dir / "model.mps").string(), to_mps(*solved.lp, cell.paradigm));
          Json manifest = Json::object();
          manifest["problem"] = task.problem;
          manifest["paradigm"] = cell.paradigm;
          manifest["seed"] = task.seed;
          manifest["n_in"] = config.n_in;
          manifest["n_out"] = config.n_out;
          manifest["family"] = sample_family_to_string(config.family);
          manifest["cv"] = config.cv;
          manifest["tol"] = config.tol;
          manifest["status"] =
              solved.success ? "ok" : (solved.error.empty() ? "failed" : solved.error);
          write_text_file((cell_dir / "manifest.json").string(), manifest.dump(2) + "\n");
          if (!solved.success) {
            cell.error = solved.error;
            continue;
          }
          const EvalReport report = evaluate_decision(solved.record, bundle, config.tol);
          write_text_file((cell_dir / "eval.json").string(),
                          eval_report_to_json(report).dump(2) + "\n");
          cell.report = report;
          cell.success = true;
        } catch (const Error& e) {
          cell.error = e.what();
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
      }
      std::lock_guard<std::mutex> lock(io_mutex);
      out << "[" << (t + 1) << "/" << tasks.size() << "] " << task.problem << " seed "
          << task.seed << "\n";
    }
  };
  const int n_workers = std::max(1, config.workers);
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // aggregate per paradigm over (problem, seed) cells
  bool any_failed = false;
  for (std::size_t pi = 0; pi < n_paradigms; ++pi) {
    std::vector<ProblemOutcome> outcomes;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const BenchCell& cell = result.cells[t * n_paradigms + pi];
      ProblemOutcome o;
      o.id = cell.problem + "/seed" + std::to_string(cell.seed);
      o.success = cell.success;
      o.report = cell.report;
      outcomes.push_back(std::move(o));
      any_failed = any_failed || !cell.success;
    }
    result.rows.emplace_back(config.paradigms[pi].to_string(), aggregate_dataset(outcomes));
  }

  fs::create_directories(config.out_dir);
  write_text_file((config.out_dir / "summary.tsv").string(), summary_table_tsv(result.rows));
  write_text_file((config.out_dir / "summary.txt").string(), summary_table_text(result.rows));
  Json raw = Json::array();
  for (const auto& cell : result.cells) {
    Json c = Json::object();
    c["problem"] = cell.problem;
    c["paradigm"] = cell.paradigm;
    c["seed"] = cell.seed;
    c["success"] = cell.success;
    if (!cell.error.empty()) c["error"] = cell.error;
    if (cell.report) c["eval"] = eval_report_to_json(*cell.report);
    raw.push_back(std::move(c));
  }
  Json summary = Json::object();
  Json rows = Json::array();
  for (const auto& [name, s] : result.rows) {
    Json r = Json::object();
    r["model"] = name;
    r["SR"] = s.sr;
    r["FR"] = s.fr ? Json(*s.fr) : Json(nullptr);
    r["Obj"] = s.obj ? Json(*s.obj) : Json(nullptr);
    r["OpR"] = s.opr ? Json(*s.opr) : Json(nullptr);
    r["opr_excluded_cells"] = s.n_opr_excluded;
    rows.push_back(std::move(r));
  }
  summary["rows"] = rows;
  summary["cells"] = raw;
  write_text_file((config.out_dir / "summary.json").string(), summary.dump(2) + "\n");

  out << summary_table_text(result.rows);
  result.exit_code = any_failed ? kExitPartial : kExitOk;
  return result;
}

}  // namespace duopt::cli
