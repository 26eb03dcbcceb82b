#pragma once

#include <stdexcept>
#include <string>

namespace etherwalk {

// Error categories map 1:1 onto CLI exit codes (parse=2, io=3, api=4, math=5).
enum class ErrorCategory { parse = 2, io = 3, api = 4, math = 5 };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

private:
  ErrorCategory category_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& message) : Error(ErrorCategory::parse, message) {}
};

struct IoError : Error {
  explicit IoError(const std::string& message) : Error(ErrorCategory::io, message) {}
};

struct ApiError : Error {
  explicit ApiError(const std::string& message) : Error(ErrorCategory::api, message) {}
};

// Transient transport failure; crawl retries these before surfacing.
struct TransportError : ApiError {
  explicit TransportError(const std::string& message) : ApiError(message) {}
};

struct MathError : Error {
  explicit MathError(const std::string& message) : Error(ErrorCategory::math, message) {}
};

}  // namespace etherwalk
