#pragma once

#include <stdexcept>
#include <string>

namespace stagecast {

/// Base for all engine errors. User/input problems derive from this;
/// internal invariant violations use InternalError.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct SchemaError : Error {
  using Error::Error;
};

struct ArgumentError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

struct InternalError : Error {
  using Error::Error;
};

}  // namespace stagecast
