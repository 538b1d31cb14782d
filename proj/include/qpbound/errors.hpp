#pragma once

#include <stdexcept>
#include <string>

namespace qpb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed model or configuration text.
class ParseError : public Error {
 public:
  using Error::Error;
};

class NoIntersection : public Error {
 public:
  using Error::Error;
};

class DegenerateMass : public Error {
 public:
  using Error::Error;
};

class UnsupportedReward : public Error {
 public:
  using Error::Error;
};

/// A geometric term does not satisfy the interior balance equation.
class NotOnQ : public Error {
 public:
  using Error::Error;
};

class NegativeRate : public Error {
 public:
  using Error::Error;
};

class NegativeCoefficient : public Error {
 public:
  using Error::Error;
};

/// The perturbed axis rates do not dominate the original ones, so the
/// explicit bound does not apply.
class ThresholdViolated : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class BoundViolated : public Error {
 public:
  BoundViolated(const std::string& what, double margin) : Error(what), margin_(margin) {}
  /// Amount by which the observed error exceeded the bound (positive).
  double margin() const noexcept { return margin_; }

 private:
  double margin_;
};

class IllPosed : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class Unbounded : public Error {
 public:
  using Error::Error;
};

}  // namespace qpb
