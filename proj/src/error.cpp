#include "sdig/error.hpp"

namespace sdig {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::construction_failure: return "construction_failure";
    case ErrorCode::configuration_error: return "configuration_error";
    case ErrorCode::certification_refused: return "certification_refused";
    case ErrorCode::reference_failure: return "reference_failure";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::configuration_error: return 3;
    case ErrorCode::certification_refused: return 4;
    case ErrorCode::reference_failure: return 5;
    case ErrorCode::divergence: return 6;
    case ErrorCode::io_error: return 7;
    case ErrorCode::invalid_argument: return 8;
    case ErrorCode::construction_failure: return 9;
  }
  return 1;
}

}  // namespace sdig
