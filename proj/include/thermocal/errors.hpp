#pragma once

#include <stdexcept>
#include <string>

namespace thermocal {

// Invalid user input: bad config values, malformed geometry requests, bad CLI usage.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: singular system, factorization breakdown, non-finite values.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / parse failure on external files.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace thermocal
