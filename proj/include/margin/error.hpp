#pragma once

#include <stdexcept>
#include <string>

namespace margin {

/// Invalid data or a violated precondition on otherwise well-formed input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command-line usage: unknown flag, missing mandatory option.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace margin
