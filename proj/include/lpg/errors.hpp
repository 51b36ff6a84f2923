#pragma once

#include <stdexcept>
#include <string>

namespace lpg {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : Error {
  using Error::Error;
};

struct InvariantError : Error {
  using Error::Error;
};

struct IdError : Error {
  using Error::Error;
};

struct UnknownNodeError : Error {
  using Error::Error;
};

struct UniverseMismatchError : Error {
  using Error::Error;
};

// Calling apply() on an action that did not pass check(). A programming
// error, not an agent-level failure.
struct PreconditionViolation : Error {
  using Error::Error;
};

struct WireError : Error {
  using Error::Error;
};

struct ReplayExhausted : Error {
  using Error::Error;
};

struct ReplayMismatch : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct SexprParseError : Error {
  using Error::Error;
};

struct BudgetExceeded : Error {
  using Error::Error;
};

struct NoCompatibleParent : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace lpg
