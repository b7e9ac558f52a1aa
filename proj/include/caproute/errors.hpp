#pragma once

#include <stdexcept>
#include <string>

namespace caproute {

// Unusable invocation: unknown command, bad option value, malformed config.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unusable data: malformed files, missing records, inconsistent references.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace caproute
