#pragma once

#include <stdexcept>
#include <string>

namespace resonance {

// Malformed input data. field() names the offending entry, e.g. "segments[1].lo".
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Argument outside the domain of a mathematical function (branch point, k = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iteration failed to converge or a count could not be made reliable.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs violate the hypotheses an algorithm relies on.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Internal cross-checks disagree (e.g. root multiplicities vs. winding number).
class InconsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace resonance
