#pragma once

#include <optional>
#include <string>
#include <vector>

#include "duopt/bundle.hpp"
#include "duopt/linear_model.hpp"
#include "duopt/lp.hpp"

namespace duopt {

enum class ParadigmKind { DM, SAA, RO_Box, DRO_Wasserstein };

enum class GroundNorm { L1, L2, Linf };

struct ParadigmConfig {
  ParadigmKind kind = ParadigmKind::DM;
  double dro_base_radius = 0.0;       // DRO only
  GroundNorm dro_norm = GroundNorm::L1;

  std::string to_string() const;
  /// Parse "dm" | "saa" | "ro" | "dro:<base>"; optional norm applies to DRO.
  static ParadigmConfig parse(const std::string& text, GroundNorm norm = GroundNorm::L1);
};

/// Coordinatewise box calibrated from training samples; every calibration
/// sample lies inside it by construction.
struct BoxSet {
  std::vector<double> lower;  // per uncertain entry, model ordering
  std::vector<double> upper;

  double center(std::size_t k) const { return 0.5 * (lower[k] + upper[k]); }
  double halfwidth(std::size_t k) const { return 0.5 * (upper[k] - lower[k]); }
};

struct WassersteinBall {
  std::vector<std::vector<double>> samples;  // joint uncertain-entry vectors
  double radius = 0.0;
  GroundNorm norm = GroundNorm::L1;
};

/// Joint training realizations ordered like model.params; scenario i collects
/// sample i of every random parameter. Throws EmptySamples / ShapeMismatch.
std::vector<std::vector<double>> joint_training_samples(const LinearModel& model,
                                                        const TrainingView& training);

std::vector<double> joint_sample_mean(const std::vector<std::vector<double>>& samples);

/// Elementwise min/max box over the training samples.
BoxSet calibrate_box(const LinearModel& model, const TrainingView& training);

/// Wasserstein radius: base radius times the mean absolute empirical mean
/// over all uncertain entries. All-zero means give radius 0.
double scale_radius(const ParadigmConfig& config, const LinearModel& model,
                    const TrainingView& training);

/// DM: substitute the empirical training means.
ConcreteLP build_dm(const LinearModel& model, const TrainingView& training);

/// SAA: objective averaged over scenarios (folds to one affine objective);
/// every uncertain constraint is enforced per scenario.
ConcreteLP build_saa(const LinearModel& model, const TrainingView& training);

/// Box RO: exact worst case of every uncertain row over the box via the
/// split p = center + diag(halfwidth) * zeta, zeta in [-1,1]^d; an uncertain
/// objective is epigraph-lifted and robustified the same way.
ConcreteLP build_ro_box(const LinearModel& model, const BoxSet& box);

/// Wasserstein DRO with unbounded support. The objective uses the exact
/// worst-case expectation (1/N) sum_i l(x, p_i) + radius * dualnorm(c(x))
/// via an epigraph; uncertain constraints are enforced per scenario with the
/// same dual-norm margin, so radius 0 coincides with build_saa exactly.
/// L2 ground norm is rejected (UnsupportedNorm).
ConcreteLP build_dro_wasserstein(const LinearModel& model, const WassersteinBall& ball);

/// Dispatch on the paradigm kind.
ConcreteLP build_counterpart(const LinearModel& model, const TrainingView& training,
                             const ParadigmConfig& config);

}  // namespace duopt
