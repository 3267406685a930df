#include "expander/errors.hpp"

namespace expander {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::shape: return "E_SHAPE";
    case ErrorCode::domain: return "E_DOMAIN";
    case ErrorCode::format: return "E_FORMAT";
    case ErrorCode::size: return "E_SIZE";
    case ErrorCode::degenerate_graph: return "E_DEGENERATE";
    case ErrorCode::io: return "E_IO";
    case ErrorCode::config: return "E_CONFIG";
  }
  return "E_UNKNOWN";
}

int error_exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::io: return 2;
    case ErrorCode::format: return 3;
    case ErrorCode::config: return 4;
    case ErrorCode::domain: return 5;
    case ErrorCode::shape: return 6;
    case ErrorCode::size: return 7;
    case ErrorCode::degenerate_graph: return 8;
  }
  return 1;
}

}  // namespace expander
