#pragma once

#include <stdexcept>
#include <string>

namespace rpf {

/// Broad failure class. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Domain,     // precondition or argument violation
  Numerical,  // degenerate variance, rank deficiency, no feasible point
  Config,     // malformed input files or configuration
};

/// Library-wide exception. `module()` names the component that raised it
/// ("model", "design", "pickfreeze", "lasso", "bounds", "recovery", "cli").
class Error : public std::runtime_error {
 public:
  Error(std::string module, ErrorKind kind, const std::string& message);

  const std::string& module() const noexcept { return module_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string module_;
  ErrorKind kind_;
};

}  // namespace rpf
