#pragma once

#include <stdexcept>
#include <string>

namespace mwrn {

// Shape / dimension mismatches and structurally invalid inputs.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed files: images, checkpoints, config files.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values, diverged training, failed numerical verification.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mwrn
