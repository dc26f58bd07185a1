#pragma once

#include <stdexcept>
#include <string>

namespace fvtl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented shape or dimension contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// A matrix or measure is not a valid stochastic object (negative entry, bad row sum).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotIrreducible : public Error {
 public:
  using Error::Error;
};

/// An entry that must be strictly positive is not.
class PositivityError : public Error {
 public:
  using Error::Error;
};

class DegenerateTilt : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed to reach its tolerance.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Two independent computations of the same quantity disagree.
class NumericalInconsistency : public Error {
 public:
  NumericalInconsistency(const std::string& what, double first, double second)
      : Error(what), first_(first), second_(second) {}
  double first() const noexcept { return first_; }
  double second() const noexcept { return second_; }

 private:
  double first_;
  double second_;
};

class TruncationFailure : public Error {
 public:
  using Error::Error;
};

/// No T within the cap satisfies the mixing threshold.
class MixingTooSlow : public Error {
 public:
  MixingTooSlow(const std::string& what, double distance_at_cap)
      : Error(what), distance_at_cap_(distance_at_cap) {}
  double distance_at_cap() const noexcept { return distance_at_cap_; }

 private:
  double distance_at_cap_;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class GenerationFailure : public Error {
 public:
  using Error::Error;
};

/// Short class name of a library error, "Error" for anything else.
inline std::string error_name(const std::exception& e) {
  if (dynamic_cast<const MixingTooSlow*>(&e)) return "MixingTooSlow";
  if (dynamic_cast<const NotIrreducible*>(&e)) return "NotIrreducible";
  if (dynamic_cast<const NumericalFailure*>(&e)) return "NumericalFailure";
  if (dynamic_cast<const NumericalInconsistency*>(&e)) return "NumericalInconsistency";
  if (dynamic_cast<const TruncationFailure*>(&e)) return "TruncationFailure";
  if (dynamic_cast<const PositivityError*>(&e)) return "PositivityError";
  if (dynamic_cast<const DegenerateTilt*>(&e)) return "DegenerateTilt";
  if (dynamic_cast<const GenerationFailure*>(&e)) return "GenerationFailure";
  if (dynamic_cast<const SpecError*>(&e)) return "SpecError";
  if (dynamic_cast<const ShapeError*>(&e)) return "ShapeError";
  if (dynamic_cast<const IndexError*>(&e)) return "IndexError";
  if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
  return "Error";
}

}  // namespace fvtl
