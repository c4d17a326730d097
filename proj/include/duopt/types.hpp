#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace duopt {

/// Optimization sense of an objective.
enum class Sense { Min, Max };

/// Variable domain kinds shared by decisions and parameters.
enum class VarKind { Continuous, Integer, Binary };

/// Whether a sample set feeds model construction or out-of-sample evaluation.
enum class SampleRole { Training, Testing };

/// Tensor shape; empty means scalar. Dimensions are always positive.
using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_size(const Shape& s) {
  std::int64_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

std::string shape_to_string(const Shape& s);
std::string sense_to_string(Sense s);
std::string var_kind_to_string(VarKind k);

}  // namespace duopt
