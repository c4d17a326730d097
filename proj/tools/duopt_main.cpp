#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "duopt/errors.hpp"
#include "duopt/pipeline.hpp"

namespace {

using namespace duopt;
using namespace duopt::cli;

GroundNorm parse_norm(const std::string& s) {
  if (s == "l1" || s == "L1") return GroundNorm::L1;
  if (s == "linf" || s == "Linf" || s == "LINF") return GroundNorm::Linf;
  if (s == "l2" || s == "L2") return GroundNorm::L2;
  fail("PreconditionFailure", "unknown norm '" + s + "' (expected l1|l2|linf)");
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const std::string part = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const auto dots = part.find("..");
    if (dots != std::string::npos) {
      const auto lo = std::stoull(part.substr(0, dots));
      const auto hi = std::stoull(part.substr(dots + 2));
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else if (!part.empty()) {
      seeds.push_back(std::stoull(part));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven optimization under uncertainty: build, solve and "
               "evaluate deterministic, sample-average, box-robust and "
               "Wasserstein-robust counterparts of problem bundles"};
  app.require_subcommand(1);

  std::string dataset, out_path, family = "lognormal", norm = "l1", author = "truth";
  std::string record_path, seeds_text = "1";
  std::vector<std::string> paradigm_texts;
  double cv = 0.3, tol = 1e-6, halfwidth = 0.1;
  std::int64_t n_in = 50, n_out = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  bool mps_export = false;

  auto* validate = app.add_subcommand("validate", "Check a problem bundle directory");
  validate->add_option("--dataset", dataset, "bundle directory")->required();

  auto* gen = app.add_subcommand("gen", "Generate a sampled instance from a seed problem");
  gen->add_option("--dataset", dataset, "seed problem directory")->required();
  gen->add_option("--out", out_path, "output directory")->required();
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--n-in", n_in, "training sample size");
  gen->add_option("--n-out", n_out, "testing sample size");
  gen->add_option("--cv", cv, "coefficient of variation");
  gen->add_option("--family", family, "lognormal|normal|uniform");
  gen->add_option("--halfwidth", halfwidth, "relative half-width (uniform family)");

  auto* solve = app.add_subcommand("solve", "Author, build a counterpart and solve");
  solve->add_option("--dataset", dataset, "bundle directory")->required();
  solve->add_option("--paradigm", paradigm_texts, "dm|saa|ro|dro:<base>")->required();
  solve->add_option("--out", out_path, "record file")->required();
  solve->add_option("--norm", norm, "DRO ground norm (l1|linf)");
  solve->add_option("--author", author, "truth|llm");
  solve->add_flag("--mps-export", mps_export, "write the solved LP next to the record");

  auto* eval = app.add_subcommand("eval", "Evaluate a decision record out of sample");
  eval->add_option("--dataset", dataset, "bundle directory")->required();
  eval->add_option("--record", record_path, "decision record file")->required();
  eval->add_option("--out", out_path, "report file")->required();
  eval->add_option("--tol", tol, "feasibility tolerance");

  auto* bench = app.add_subcommand("bench", "Sweep problems x paradigms x seeds");
  bench->add_option("--dataset", dataset, "dataset root")->required();
  bench->add_option("--out", out_path, "output directory")->required();
  bench->add_option("--paradigm", paradigm_texts, "dm|saa|ro|dro:<base> (repeatable)");
  bench->add_option("--seeds", seeds_text, "comma list / a..b range");
  bench->add_option("--n-in", n_in, "training sample size");
  bench->add_option("--n-out", n_out, "testing sample size");
  bench->add_option("--cv", cv, "coefficient of variation");
  bench->add_option("--family", family, "lognormal|normal|uniform");
  bench->add_option("--halfwidth", halfwidth, "relative half-width (uniform family)");
  bench->add_option("--tol", tol, "feasibility tolerance");
  bench->add_option("--author", author, "truth|llm");
  bench->add_option("--norm", norm, "DRO ground norm (l1|linf)");
  bench->add_option("--workers", workers, "concurrent sweep workers");
  bench->add_flag("--mps-export", mps_export, "export each solved LP");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return run_validate(dataset, std::cout);
    if (gen->parsed()) {
      GeneratorConfig cfg;
      cfg.family = sample_family_from_string(family);
      cfg.cv = cv;
      cfg.halfwidth_rel = halfwidth;
      cfg.seed = seed;
      return run_gen(dataset, out_path, cfg, n_in, n_out, std::cout);
    }
    if (solve->parsed()) {
      if (paradigm_texts.size() != 1) {
        std::cerr << "solve takes exactly one --paradigm\n";
        return kExitInvalid;
      }
      const auto paradigm = ParadigmConfig::parse(paradigm_texts[0], parse_norm(norm));
      const AuthorKind kind = author == "llm" ? AuthorKind::Llm : AuthorKind::Truth;
      return run_solve(dataset, paradigm, kind, out_path, mps_export, std::cout);
    }
    if (eval->parsed()) return run_eval(dataset, record_path, out_path, tol, std::cout);
    if (bench->parsed()) {
      RunConfig cfg;
      cfg.dataset_root = dataset;
      cfg.out_dir = out_path;
      if (paradigm_texts.empty())
        paradigm_texts = {"ro", "dro:0.5", "dro:0.1", "dro:0", "dm"};
      for (const auto& p : paradigm_texts)
        cfg.paradigms.push_back(ParadigmConfig::parse(p, parse_norm(norm)));
      cfg.family = sample_family_from_string(family);
      cfg.cv = cv;
      cfg.halfwidth_rel = halfwidth;
      cfg.seeds = parse_seeds(seeds_text);
      cfg.n_in = n_in;
      cfg.n_out = n_out;
      cfg.tol = tol;
      cfg.author = author == "llm" ? AuthorKind::Llm : AuthorKind::Truth;
      cfg.workers = workers;
      cfg.mps_export = mps_export;
      return run_bench(cfg, std::cout).exit_code;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "] " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
