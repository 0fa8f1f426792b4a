#pragma once

#include <stdexcept>
#include <string>

namespace qsense {

// Input outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The adaptive integrator could not make progress.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// Linear fit could not produce a usable slope.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Control law evaluated where it is singular (v_z = 0).
class SingularControlError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace qsense
