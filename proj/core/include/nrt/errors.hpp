#pragma once

#include <stdexcept>
#include <string>

namespace nrt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// qcalc
class BranchPointError : public Error {
 public:
  using Error::Error;
};
class OverflowError : public Error {
 public:
  using Error::Error;
};
class PathThroughOriginError : public Error {
 public:
  using Error::Error;
};

// solutions / observables
class DegenerateInitialError : public Error {
 public:
  using Error::Error;
};
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};
class SingularTimeError : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class DivergentNormError : public Error {
 public:
  using Error::Error;
};

// dynamics
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double t) : Error(what), time_(t) {}
  /// Time at which the step size collapsed.
  double time() const noexcept { return time_; }

 private:
  double time_;
};
class StabilityError : public Error {
 public:
  using Error::Error;
};

// genfamily
class NonInvertibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace nrt
