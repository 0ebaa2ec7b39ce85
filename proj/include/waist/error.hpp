// Structured error types. Every throwing path in the library uses one of
// these so callers can separate user errors (bad input) from numeric
// failures and can recover partial solver output.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace waist {

// Base for all library errors; `code` is a stable machine-readable tag.
class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

  private:
    std::string code_;
};

// Bad geometric input: dimension mismatches, invalid set parameters,
// points outside their sets where membership is required.
class GeometryError : public Error {
  public:
    using Error::Error;
};

// Malformed problem documents (schema violations, unknown keys); messages
// carry a path-qualified location such as "sets[0].parameters.radius".
class ParseError : public Error {
  public:
    using Error::Error;
};

}  // namespace waist
