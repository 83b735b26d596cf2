#pragma once

#include <stdexcept>
#include <string>

namespace helm {

/// A parameter, shape or precondition violated an operation's contract.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A controller or policy was queried before it had weights.
class NotReady : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed or schema-violating configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace helm
