#pragma once

#include <stdexcept>
#include <string>

namespace bicons {

/// An input violated a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A formula was evaluated outside its domain (log of zero, vanishing denominator, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An ODE right-hand side hit one of its singular denominators.
class SingularDenominator : public DomainError {
 public:
  SingularDenominator(const std::string& what, double value) : DomainError(what), value_(value) {}
  double value() const { return value_; }

 private:
  double value_;
};

class BracketingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Surface synthesis produced nodes off the product manifold.
class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command line or configuration.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace bicons
