#pragma once

#include <stdexcept>

namespace fkc {

// Shared error taxonomy. The CLI maps all of these to exit code 2
// (bad input / bad usage); anything else escaping to main is exit 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : Error { using Error::Error; };    // malformed on-disk data
struct DataError : Error { using Error::Error; };      // non-finite / out-of-domain values
struct IoError : Error { using Error::Error; };        // filesystem failures
struct ArgumentError : Error { using Error::Error; };  // violated call contracts
struct ConfigError : Error { using Error::Error; };    // bad user-supplied configuration text

}  // namespace fkc
