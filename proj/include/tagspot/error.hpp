#pragma once

#include <stdexcept>
#include <string>

namespace tagspot {

// Bad input: malformed documents, violated preconditions, inconsistent
// parameters. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system and stream failures. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tagspot
