#include "duopt/json_util.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "duopt/errors.hpp"

namespace duopt {

namespace {

Json slice_to_json(const Tensor& t, int dim, std::int64_t offset, std::int64_t stride_prod) {
  if (dim == t.ndim()) return t.flat(offset);
  const std::int64_t len = t.shape()[dim];
  const std::int64_t inner = stride_prod / len;
  Json arr = Json::array();
  for (std::int64_t i = 0; i < len; ++i)
    arr.push_back(slice_to_json(t, dim + 1, offset + i * inner, inner));
  return arr;
}

void infer_shape(const Json& j, Shape& shape, const std::string& context) {
  if (j.is_array()) {
    if (j.empty()) fail("ShapeMismatch", context + ": empty array dimension");
    shape.push_back(static_cast<std::int64_t>(j.size()));
    infer_shape(j[0], shape, context);
  } else if (!j.is_number()) {
    fail("MalformedDocument", context + ": expected a number or nested array");
  }
}

void flatten(const Json& j, int dim, const Shape& shape, std::vector<double>& out,
             const std::string& context) {
  if (dim == static_cast<int>(shape.size())) {
    if (!j.is_number()) fail("MalformedDocument", context + ": ragged or non-numeric array");
    out.push_back(j.get<double>());
    return;
  }
  if (!j.is_array() || static_cast<std::int64_t>(j.size()) != shape[dim])
    fail("ShapeMismatch", context + ": ragged array");
  for (const auto& el : j) flatten(el, dim + 1, shape, out, context);
}

}  // namespace

Json tensor_to_json(const Tensor& t) {
  if (t.is_scalar()) return t.flat(0);
  return slice_to_json(t, 0, 0, t.size());
}

Tensor tensor_from_json(const Json& j, const std::string& context) {
  Shape shape;
  infer_shape(j, shape, context);
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(shape_size(shape)));
  flatten(j, 0, shape, data, context);
  return Tensor(std::move(shape), std::move(data));
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("MissingFile", path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail("MalformedDocument", path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("IoFailure", "cannot open " + path + " for writing");
  out << content;
  if (!out) fail("IoFailure", "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("MissingFile", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace duopt
