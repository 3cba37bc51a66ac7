#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctv {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Grid/kernel shapes do not line up.
struct DimensionError : Error {
  using Error::Error;
};

/// A constructor or solver parameter is out of its admissible range.
struct ParamError : Error {
  using Error::Error;
};

/// Malformed input data (PGM, kernel file, config). Carries the byte
/// offset at which parsing gave up.
struct ParseError : Error {
  std::size_t offset;
  ParseError(const std::string& what, std::size_t byte_offset,
             bool locate = true)
      : Error(locate ? what + " at byte " + std::to_string(byte_offset) : what),
        offset(byte_offset) {}
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace ctv
