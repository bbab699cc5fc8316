#pragma once

#include <stdexcept>
#include <string>

namespace gnpass {

// Process exit codes used by the CLI.
enum class ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

// Bad invocation: unknown flags, invalid flag combinations, malformed config.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with input data or stores: missing files, empty corpora, failed
// integrity checks, lookup misses, shape mismatches.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric failures: NaN/Inf losses, non-finite inputs, degenerate networks.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gnpass
