#ifndef OFESI_ERRORS_HPP
#define OFESI_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ofesi {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based; 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateStepError : public ParseError {
 public:
  using ParseError::ParseError;
};

class OrderingError : public ParseError {
 public:
  using ParseError::ParseError;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class InvalidSplitError : public Error {
 public:
  using Error::Error;
};

class TooSmallError : public Error {
 public:
  using Error::Error;
};

class TooLargeError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

/// A structurally valid document whose counts break a model invariant.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace ofesi

#endif  // OFESI_ERRORS_HPP
