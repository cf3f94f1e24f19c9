#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace notip {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experimental design cannot support the requested test (too few subjects, bad labels).
class InvalidDesign : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter is outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Input arrays are malformed: wrong dimensions, unsorted, non-finite, mismatched grids.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Raised while decoding a file; carries the byte (or line) offset at which decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class UnsupportedVersion : public FormatError {
 public:
  UnsupportedVersion(std::uint32_t found, std::uint32_t expected, std::uint64_t offset)
      : FormatError("unsupported format version " + std::to_string(found) + " (expected " +
                        std::to_string(expected) + ")",
                    offset),
        found_(found) {}

  std::uint32_t found() const noexcept { return found_; }

 private:
  std::uint32_t found_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace notip
