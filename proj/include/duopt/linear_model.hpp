#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "duopt/bundle.hpp"
#include "duopt/lp.hpp"
#include "duopt/types.hpp"

namespace duopt {

/// Scalar of the bi-affine IR: affine in decision entries with coefficients
/// affine in uncertain-parameter entries,
///   value(x, p) = c + sum_j dx[j]*x_j + sum_k dp[k]*p_k + sum_{k,j} dpx[k,j]*p_k*x_j.
/// Products that would create decision*decision or parameter*parameter terms
/// throw at construction and are never stored.
struct BiAffineScalar {
  double c = 0.0;
  std::map<std::int32_t, double> dx;
  std::map<std::int32_t, double> dp;
  std::map<std::pair<std::int32_t, std::int32_t>, double> dpx;  // (param, decision)

  static BiAffineScalar constant(double v);
  static BiAffineScalar decision(std::int32_t index);
  static BiAffineScalar parameter(std::int32_t index);

  bool is_constant() const { return dx.empty() && dp.empty() && dpx.empty(); }
  bool depends_on_params() const { return !dp.empty() || !dpx.empty(); }
  bool depends_on_decisions() const { return !dx.empty() || !dpx.empty(); }

  /// Numeric value at a full assignment (used by consistency checks and the
  /// stress test).
  double value_at(const std::vector<double>& x, const std::vector<double>& p) const;

  /// Coefficient of p_k as an affine function of x: (constant, x-coeffs).
  std::pair<double, std::map<std::int32_t, double>> param_coefficient(std::int32_t k) const;

  BiAffineScalar operator+(const BiAffineScalar& o) const;
  BiAffineScalar operator-(const BiAffineScalar& o) const;
  BiAffineScalar operator*(const BiAffineScalar& o) const;  // throws on degree violations
  BiAffineScalar operator/(const BiAffineScalar& o) const;  // rhs must be a nonzero constant
  BiAffineScalar operator-() const;

  bool operator==(const BiAffineScalar& o) const = default;
};

enum class Rel { Le, Eq };  // body <= 0 or body == 0

struct ModelConstraint {
  BiAffineScalar body;
  Rel rel = Rel::Le;
  int origin = -1;  // index into the source constraint list
};

struct DecisionEntry {
  std::string name;  // symbol with multi-index, e.g. x[1,3]
  double lower;
  double upper;
  VarKind kind = VarKind::Continuous;
};

struct ParamEntry {
  std::string name;
  double nominal = 0.0;
};

/// Bi-affine linear model: constraints normalized to body <= 0 / body == 0,
/// pure decision bounds hoisted out of the rows, deterministic parameters
/// already folded into constants.
struct LinearModel {
  Sense sense = Sense::Min;
  BiAffineScalar objective;
  std::vector<ModelConstraint> constraints;
  std::vector<DecisionEntry> decisions;
  std::vector<ParamEntry> params;  // uncertain entries only
  std::map<std::string, std::pair<std::int32_t, std::int32_t>> decision_spans;  // symbol -> [begin,end)
  std::map<std::string, std::pair<std::int32_t, std::int32_t>> param_spans;
  std::vector<int> bound_origins;  // constraints fully hoisted into bounds

  bool has_uncertainty() const { return !params.empty(); }
  std::vector<double> nominal_params() const;
};

/// Lower a truth specification against the bundle's declarations into the
/// bi-affine IR. Throws NonlinearInDecisions / NonlinearInParameters /
/// NonAffine (message names the offending constraint), UnknownSymbol, and
/// expression errors.
LinearModel lower_to_model(const TruthSpec& truth, const ProblemBundle& bundle);

/// Substitute a full uncertain-parameter assignment (keyed by symbol), leaving
/// a decisions-only LP. Throws MissingParameterValue when any symbolic entry
/// is uncovered. A model without symbolic parameters ignores the assignment.
ConcreteLP substitute_params(const LinearModel& model,
                             const std::map<std::string, Tensor>& values);

/// Flat-vector variant; `values` must cover all entries of model.params.
ConcreteLP substitute_params(const LinearModel& model, const std::vector<double>& values);

/// Fold a bi-affine scalar at a parameter point: constant plus sparse decision
/// coefficients (zero entries dropped).
std::pair<double, std::vector<std::pair<std::int32_t, double>>> fold_at(
    const BiAffineScalar& s, const std::vector<double>& p);

/// Human-readable report of rows, bounds and coefficient maps.
std::string dump_model(const LinearModel& model);

}  // namespace duopt
