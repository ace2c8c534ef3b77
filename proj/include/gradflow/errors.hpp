#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gradflow {

/// Two operands live on different grids, or a buffer does not match its grid.
class GridMismatch : public std::invalid_argument {
 public:
  explicit GridMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// A per-mode system (alpha + c*s) or a 2x2 block is not invertible.
class SingularOperator : public std::runtime_error {
 public:
  explicit SingularOperator(const std::string& what) : std::runtime_error(what) {}
};

/// The scalar multiplier equation has no root on the searched bracket.
class NoRootFound : public std::runtime_error {
 public:
  explicit NoRootFound(const std::string& what) : std::runtime_error(what) {}
};

/// The quadratic energy constraint a*eta^2 + b*eta + c <= E admits no eta.
class EmptyFeasibleSet : public std::runtime_error {
 public:
  explicit EmptyFeasibleSet(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the integrators when a time step cannot be completed.
///
/// Carries the step index, the branch that was being taken and the residual
/// history of the scalar solve so the failure can be diagnosed post hoc.
class StepAborted : public std::runtime_error {
 public:
  StepAborted(long step, std::string branch, std::string reason,
              std::vector<double> residual_history = {})
      : std::runtime_error(format(step, branch, reason)),
        step_(step),
        branch_(std::move(branch)),
        reason_(std::move(reason)),
        residuals_(std::move(residual_history)) {}

  long step() const noexcept { return step_; }
  const std::string& branch() const noexcept { return branch_; }
  const std::string& reason() const noexcept { return reason_; }
  const std::vector<double>& residual_history() const noexcept { return residuals_; }

 private:
  static std::string format(long step, const std::string& branch, const std::string& reason) {
    return "step " + std::to_string(step) + " aborted on " + branch + " branch: " + reason +
           " (try reducing the time step)";
  }

  long step_;
  std::string branch_;
  std::string reason_;
  std::vector<double> residuals_;
};

}  // namespace gradflow
