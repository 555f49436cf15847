#pragma once

#include <stdexcept>

namespace oac {

// Base for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data: wrong field count, unparsable number, bad record.
struct FormatError : Error {
  using Error::Error;
};

// A repeated tuple carries two different values in a valued context.
struct FunctionalityViolation : Error {
  using Error::Error;
};

// An operation was called outside its contract (e.g. tuple not in the relation).
struct PreconditionError : Error {
  using Error::Error;
};

// Invalid or inconsistent configuration (e.g. delta operator on an unvalued context).
struct ConfigError : Error {
  using Error::Error;
};

// A pipeline stage received data violating the stage contract; signals a shuffle bug.
struct IntegrityError : Error {
  using Error::Error;
};

// Density requested for a cluster whose box is empty.
struct IoError : Error {
  using Error::Error;
};

struct UndefinedDensityError : Error {
  using Error::Error;
};

}  // namespace oac
