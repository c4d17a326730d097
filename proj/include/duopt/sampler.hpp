#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "duopt/bundle.hpp"
#include "duopt/tensor.hpp"
#include "duopt/types.hpp"

namespace duopt {

/// Counter-based generator: output i of a stream is
/// splitmix64_mix(key + (i+1)*GAMMA), so streams are random-access and two
/// streams with different keys never interact. Keys come from
/// derive_stream_key, which hashes (seed, label, role), giving every
/// (parameter, role) pair its own substream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return at(counter_++); }

  /// Uniform double in the open interval (0, 1).
  double next_unit() { return unit_at(counter_++); }

  std::uint64_t at(std::uint64_t i) const;
  double unit_at(std::uint64_t i) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t derive_stream_key(std::uint64_t seed, std::string_view label, SampleRole role);

/// Inverse standard-normal CDF (Wichura's double-precision rational
/// approximation); u must lie in (0, 1).
double normal_quantile(double u);

enum class SampleFamily { Lognormal, Normal, Uniform };

SampleFamily sample_family_from_string(const std::string& s);
std::string sample_family_to_string(SampleFamily f);

struct GeneratorConfig {
  SampleFamily family = SampleFamily::Lognormal;
  double cv = 0.3;               // Lognormal / Normal coefficient of variation
  double halfwidth_rel = 0.1;    // Uniform relative half-width
  std::uint64_t seed = 0;
  std::int64_t n = 1;
  bool clip_nonnegative = true;  // floor non-negative parameters at zero
  bool round_integers = true;    // round Integer-typed parameters half-to-even
};

/// Draw a sample set around each parameter's nominal value. Deterministic
/// parameters pass through unchanged; each random parameter gets `config.n`
/// independent draws (lognormal draws are moment-matched so the distribution
/// mean is the nominal value and its stddev is cv * mean) and its `value`
/// becomes the empirical mean. Same (seed, config, nominal) gives identical
/// output. Throws NonPositiveMean for Lognormal with a nominal entry <= 0.
SampleSet generate_samples(const std::vector<ParameterSpec>& nominal,
                           const GeneratorConfig& config, SampleRole role);

/// Multiplicative uniform perturbations: sample k entry j is
/// nominal_j * (1 + rho * u) with u ~ U[-1, 1]. The underlying draws do not
/// depend on rho, so scaling rho rescales the same perturbations.
std::vector<Tensor> perturb_relative(const Tensor& nominal, double rho, std::uint64_t seed,
                                     std::int64_t n);

}  // namespace duopt
