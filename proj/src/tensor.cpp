#include "duopt/tensor.hpp"

namespace duopt {

std::string shape_to_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

std::string sense_to_string(Sense s) { return s == Sense::Min ? "min" : "max"; }

std::string var_kind_to_string(VarKind k) {
  switch (k) {
    case VarKind::Continuous: return "Continuous";
    case VarKind::Integer: return "Integer";
    case VarKind::Binary: return "Binary";
  }
  return "?";
}

std::optional<Shape> broadcast_shapes(const Shape& a, const Shape& b) {
  const std::size_t nd = std::max(a.size(), b.size());
  Shape out(nd, 1);
  for (std::size_t i = 0; i < nd; ++i) {
    const std::int64_t da = i < a.size() ? a[a.size() - 1 - i] : 1;
    const std::int64_t db = i < b.size() ? b[b.size() - 1 - i] : 1;
    if (da != db && da != 1 && db != 1) return std::nullopt;
    out[nd - 1 - i] = std::max(da, db);
  }
  return out;
}

std::vector<std::int64_t> row_major_strides(const Shape& s) {
  std::vector<std::int64_t> strides(s.size(), 1);
  for (int d = static_cast<int>(s.size()) - 2; d >= 0; --d)
    strides[d] = strides[d + 1] * s[d + 1];
  return strides;
}

std::vector<std::int64_t> broadcast_strides(const Shape& operand, const Shape& result) {
  const auto own = row_major_strides(operand);
  std::vector<std::int64_t> out(result.size(), 0);
  const std::size_t offset = result.size() - operand.size();
  for (std::size_t d = 0; d < operand.size(); ++d)
    out[offset + d] = (operand[d] == 1 && result[offset + d] != 1) ? 0 : own[d];
  return out;
}

}  // namespace duopt
