#pragma once

#include <stdexcept>
#include <string>

namespace c2trace {

enum class ErrorKind { validation, infeasible, convergence };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct InfeasibleError : Error {
  explicit InfeasibleError(const std::string& what) : Error(ErrorKind::infeasible, what) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& what) : Error(ErrorKind::convergence, what) {}
};

// Process exit status used by the command line tool.
constexpr int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return 2;
    case ErrorKind::infeasible: return 3;
    case ErrorKind::convergence: return 4;
  }
  return 1;
}

}  // namespace c2trace
