#pragma once

#include <stdexcept>
#include <string>

namespace stelar {

// Caller passed something malformed: bad mode, mismatched shapes, rank too large.
struct UsageError : std::invalid_argument {
  explicit UsageError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Input data violates the schema: negative counts, duplicate rows, non-finite values.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine failed in a way valid inputs should never trigger.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace stelar
