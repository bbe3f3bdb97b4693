#pragma once

#include <stdexcept>
#include <string>

namespace umw {

/// Base class for every error raised by umwkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the support or parameter space.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure ran out of its iteration budget.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// A result is not representable in double precision.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class RankDeficientDesign : public Error {
 public:
  using Error::Error;
};

/// Standard errors were requested but the information matrix could not be inverted.
class SingularInformation : public Error {
 public:
  using Error::Error;
};

}  // namespace umw
