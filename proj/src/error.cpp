#include "splap/error.hpp"

#include <cmath>
#include <sstream>

namespace splap {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::solver_failure: return "solver_failure";
    case Errc::config_error: return "config_error";
    case Errc::io_error: return "io_error";
    case Errc::path_failure: return "path_failure";
  }
  return "unknown";
}

void throw_invalid(const std::string& what) { throw Error(Errc::invalid_argument, what); }

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << name << " must be a positive finite number (got " << value << ")";
    throw_invalid(os.str());
  }
}

}  // namespace splap
