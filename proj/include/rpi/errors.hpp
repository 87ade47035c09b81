#pragma once

#include <stdexcept>
#include <string>

namespace rpi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed model or policy: bad indices, empty action lists, size mismatches.
class StructuralError : public Error {
  public:
    using Error::Error;
};

/// A transition vector lies outside its uncertainty set or the simplex.
class FeasibilityError : public Error {
  public:
    using Error::Error;
};

/// Out-of-range numeric parameter, e.g. a discount factor outside (0, 1).
class ParameterError : public Error {
  public:
    using Error::Error;
};

/// An exhaustive enumeration would exceed its guard.
class SizeError : public Error {
  public:
    using Error::Error;
};

/// Argument outside the mathematical domain of the operation.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A distribution coordinate fits none of the R/D/Z/I classes.
class ClassificationError : public Error {
  public:
    using Error::Error;
};

/// Unparseable or schema-violating input document.
class InputError : public Error {
  public:
    using Error::Error;
};

} // namespace rpi
