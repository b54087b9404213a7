#pragma once

#include <stdexcept>
#include <string>

namespace meshtrack {

// Bad user input: missing files, malformed configs, violated CLI
// preconditions. The CLI maps this to exit code 1; everything else that
// escapes a pipeline stage maps to exit code 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace meshtrack
