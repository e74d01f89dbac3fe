#pragma once

#include <stdexcept>
#include <string>

namespace edw {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dangling reference or malformed description detected outside the parser.
struct DescriptionError : Error {
  using Error::Error;
};

// Trace filtering removed every candidate state.
struct ContradictionError : Error {
  using Error::Error;
};

// A current cell was requested while the model is non-deterministic.
struct AmbiguityError : Error {
  using Error::Error;
};

struct UnsupportedError : Error {
  using Error::Error;
};

struct ArgumentError : Error {
  using Error::Error;
};

// Raised by the engine with a dump of the offending state attached.
struct EngineFault : Error {
  using Error::Error;
};

struct CompileError : Error {
  using Error::Error;
};

struct ImpossibleEvidence : Error {
  using Error::Error;
};

struct ImpossibleAnswer : Error {
  using Error::Error;
};

}  // namespace edw
