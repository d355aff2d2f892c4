#ifndef MLSA_ERRORS_HPP
#define MLSA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mlsa {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input data or configuration (CLI exit code 1).
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Malformed file content; message carries the line number where known.
class ParseError : public ValidationError {
public:
  explicit ParseError(const std::string& msg) : ValidationError(msg) {}
};

} // namespace mlsa

#endif
