#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace splap {

/// Error categories. The numeric values are part of the C API.
enum class Errc : int {
  invalid_argument = 1,
  solver_failure = 2,
  config_error = 3,
  io_error = 4,
  path_failure = 5,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised when the resolvent minimization does not reach its tolerance.
/// Carries the last iterate so callers can inspect how far it got.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, std::vector<double> last_iterate, double residual,
                long step_index = -1)
      : Error(Errc::solver_failure, what),
        last_iterate_(std::move(last_iterate)),
        residual_(residual),
        step_index_(step_index) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }
  /// Time step at which the failure occurred, -1 when raised outside a time loop.
  long step_index() const noexcept { return step_index_; }

 private:
  std::vector<double> last_iterate_;
  double residual_;
  long step_index_;
};

/// A Monte Carlo path aborted; `path_index` names it, the nested cause is in what().
class PathFailure : public Error {
 public:
  PathFailure(Errc cause, std::size_t path_index, const std::string& what)
      : Error(Errc::path_failure, what), cause_(cause), path_index_(path_index) {}
  Errc cause() const noexcept { return cause_; }
  std::size_t path_index() const noexcept { return path_index_; }

 private:
  Errc cause_;
  std::size_t path_index_;
};

[[noreturn]] void throw_invalid(const std::string& what);

/// Throws invalid_argument naming `name` unless value > 0 (and finite).
void require_positive(double value, const char* name);

}  // namespace splap
