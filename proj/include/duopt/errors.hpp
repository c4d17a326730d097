#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace duopt {

/// Error carrying a stable machine-readable code next to the human message.
/// Codes are what tests and the CLI dispatch on; messages are free-form.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

}  // namespace duopt
