#pragma once

#include <stdexcept>
#include <string>

namespace rpovm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class UnknownSubsystem : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

class NotPositive : public Error {
 public:
  using Error::Error;
};

class NotNormalized : public Error {
 public:
  using Error::Error;
};

class NotUnitary : public Error {
 public:
  using Error::Error;
};

// Kraus/POVM validity failures (completeness, shape, element positivity).
class InvalidMeasurement : public Error {
 public:
  using Error::Error;
};

// Hermitian roots whose Pauli coefficient columns are not orthogonal.
class NotOrthogonalEquivalent : public Error {
 public:
  using Error::Error;
};

// A party touched a subsystem it does not own, or read information it has
// not received.
class LocalityViolation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace rpovm
