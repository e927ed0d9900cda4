#pragma once

#include <stdexcept>
#include <string>

namespace sdnshield {

// Raised for problems the user can fix: bad config values, malformed input
// files, missing columns. The CLI maps these to exit code 2. Everything else
// (logic_error, runtime_error) is an internal failure and exits with 1.
class UserError : public std::runtime_error {
 public:
  explicit UserError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sdnshield
