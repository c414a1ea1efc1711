#pragma once

#include <stdexcept>
#include <string>

namespace cascadia {

// Base class for data and validation failures raised by the library.
// The CLI maps these to exit code 2; usage problems exit with 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Parse failure tied to a 1-based line of an input stream. The line number
// is baked into what() so callers can just print the message.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cascadia
