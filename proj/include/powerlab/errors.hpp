#pragma once

#include <stdexcept>
#include <string>

namespace powerlab {

// Invalid parameters or configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (shape mismatch, out-of-range index).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Input outside the mathematical domain of a function (negative SNR, zero gain).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iterative solver did not reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Non-finite values during training.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace powerlab
