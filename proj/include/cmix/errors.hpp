#pragma once

#include <stdexcept>
#include <string>

namespace cmix {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
  using Error::Error;
};
struct MissingColumnError : Error {
  using Error::Error;
};
struct UnknownCategoryError : Error {
  using Error::Error;
};
struct SchemaMismatchError : Error {
  using Error::Error;
};
struct EmptyClassError : Error {
  using Error::Error;
};
struct ShapeMismatchError : Error {
  using Error::Error;
};
struct IndexOutOfRangeError : Error {
  using Error::Error;
};
struct TapeReuseError : Error {
  using Error::Error;
};
struct NonFiniteError : Error {
  using Error::Error;
};
struct DegenerateBatchError : Error {
  using Error::Error;
};
struct TooFewPointsError : Error {
  using Error::Error;
};
struct ConvergenceFailureError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace cmix
