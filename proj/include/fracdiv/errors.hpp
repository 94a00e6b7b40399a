#pragma once

#include <stdexcept>
#include <string>

namespace fracdiv {

// Caller supplied something outside an operation's domain (bad dimension,
// non-unit vector, malformed rotation, unreadable file).  The CLI maps this
// family to exit status 2.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class InvalidRotation : public InputError {
 public:
  using InputError::InputError;
};

class NoFixedPoint : public std::runtime_error {
 public:
  explicit NoFixedPoint(const std::string& what) : std::runtime_error(what) {}
};

class BasisConstructionError : public std::runtime_error {
 public:
  BasisConstructionError(const std::string& what, double best_condition)
      : std::runtime_error(what), best_condition_(best_condition) {}
  double best_condition() const noexcept { return best_condition_; }

 private:
  double best_condition_;
};

class NotSingularError : public std::runtime_error {
 public:
  explicit NotSingularError(const std::string& what) : std::runtime_error(what) {}
};

class ZeroWitnessError : public InputError {
 public:
  using InputError::InputError;
};

// A computation reached a state its derivation rules out.  Exit status 3.
class InternalInconsistency : public std::logic_error {
 public:
  explicit InternalInconsistency(const std::string& what) : std::logic_error(what) {}
};

}  // namespace fracdiv
