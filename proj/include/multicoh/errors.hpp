#pragma once

#include <stdexcept>
#include <string>

namespace multicoh {

// Base for every error raised by the library. Model-level failures
// (invalid tables, inadmissible parameters, bad configs) derive from
// ModelError; file-system and parse failures of persisted artifacts derive
// from IoError. The CLI maps the two families onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

// A probability table that is not a distribution (negative entries beyond
// round-off, entries above one, or a total mass different from one).
class ValidityError : public ModelError {
 public:
  using ModelError::ModelError;
};

// A moment vector whose inclusion-exclusion inverse is not a distribution.
// `outcome` is the bit mask of the offending outcome (bit k = layer k+1).
class CompatibilityError : public ModelError {
 public:
  CompatibilityError(const std::string& what, unsigned outcome)
      : ModelError(what), outcome_(outcome) {}
  unsigned outcome() const { return outcome_; }

 private:
  unsigned outcome_;
};

enum class BoundSide { lower, upper };

// A correlation outside the attainable range for the given marginals.
class AdmissibilityError : public ModelError {
 public:
  AdmissibilityError(const std::string& what, BoundSide side, double bound)
      : ModelError(what), side_(side), bound_(bound) {}
  BoundSide side() const { return side_; }
  double bound() const { return bound_; }

 private:
  BoundSide side_;
  double bound_;
};

// A quantity that needs positive variance (or positive mass) was asked of a
// degenerate input.
class DegenerateError : public ModelError {
 public:
  using ModelError::ModelError;
};

class ConfigError : public ModelError {
 public:
  using ModelError::ModelError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace multicoh
