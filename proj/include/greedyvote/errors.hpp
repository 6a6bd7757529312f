#pragma once

#include <stdexcept>
#include <string>

namespace greedyvote {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument does not hold.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// An exact computation would exceed its enumeration budget.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

/// The requested combination of options is not supported (e.g. coupling with f != id).
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

/// The averaging weights vanish on every sampled node.
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

}  // namespace greedyvote
