#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "duopt/bundle.hpp"

namespace duopt::testing {

namespace fs = std::filesystem;

inline fs::path fixture_dir() { return fs::path(DUOPT_FIXTURE_DIR); }
inline fs::path transportation_dir() { return fixture_dir() / "transportation"; }

inline ProblemBundle load_transportation() { return load_bundle(transportation_dir()); }

/// Self-deleting scratch directory for file-based tests.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    dir_ = fs::temp_directory_path() /
           ("duopt_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter.fetch_add(1)));
    fs::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  const fs::path& path() const { return dir_; }

 private:
  fs::path dir_;
};

inline void copy_dir(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  for (const auto& entry : fs::directory_iterator(from))
    fs::copy_file(entry.path(), to / entry.path().filename(),
                  fs::copy_options::overwrite_existing);
}

/// Minimal in-memory bundle: one decision vector x of size n (non-negative)
/// plus caller-supplied parameters and truth expressions.
inline ProblemBundle make_bundle(std::vector<ParameterSpec> params,
                                 std::vector<std::string> constraints, std::string objective,
                                 Sense sense = Sense::Min, Shape x_shape = {1}) {
  ProblemBundle b;
  b.description = "synthetic test problem";
  DecisionSpec x;
  x.symbol = "x";
  x.meaning = "decision";
  x.shape = std::move(x_shape);
  x.is_non_negative = true;
  b.decisions.push_back(std::move(x));
  b.truth.constraints = std::move(constraints);
  b.truth.objective = std::move(objective);
  b.truth.problem_type = sense;
  b.training.role = SampleRole::Training;
  b.training.sample_size = 1;
  for (auto& p : params) {
    if (p.is_random && p.samples)
      b.training.sample_size = static_cast<std::int64_t>(p.samples->size());
  }
  b.training.parameters = std::move(params);
  return b;
}

inline ParameterSpec det_param(const std::string& symbol, Tensor value) {
  ParameterSpec p;
  p.symbol = symbol;
  p.meaning = symbol;
  p.is_random = false;
  p.shape = value.shape();
  p.value = std::move(value);
  return p;
}

inline ParameterSpec random_param(const std::string& symbol, std::vector<Tensor> samples) {
  ParameterSpec p;
  p.symbol = symbol;
  p.meaning = symbol;
  p.is_random = true;
  p.shape = samples.front().shape();
  Tensor mean(p.shape);
  for (const auto& s : samples)
    for (std::int64_t i = 0; i < s.size(); ++i) mean.flat(i) += s.flat(i);
  for (std::int64_t i = 0; i < mean.size(); ++i)
    mean.flat(i) /= static_cast<double>(samples.size());
  p.value = std::move(mean);
  p.samples = std::move(samples);
  return p;
}

inline Tensor vec(std::vector<double> v) {
  Shape s{static_cast<std::int64_t>(v.size())};
  return Tensor(std::move(s), std::move(v));
}

}  // namespace duopt::testing
