#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdig {

// Closed set of failure classes. Each maps to exactly one CLI exit code.
enum class ErrorCode {
  invalid_argument,
  construction_failure,
  configuration_error,
  certification_refused,
  reference_failure,
  divergence,
  io_error,
};

std::string_view error_code_name(ErrorCode code);
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::invalid_argument, message);
}

}  // namespace sdig
