#pragma once

#include <json.hpp>

#include "duopt/tensor.hpp"

namespace duopt {

using Json = nlohmann::ordered_json;

/// Tensor <-> nested JSON arrays (scalars map to plain numbers).
Json tensor_to_json(const Tensor& t);

/// Parse a number or nested array into a Tensor. The inferred shape must be
/// rectangular; `context` names the field for error messages.
Tensor tensor_from_json(const Json& j, const std::string& context);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace duopt
