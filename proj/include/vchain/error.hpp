#ifndef VCHAIN_ERROR_HPP
#define VCHAIN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace vchain {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input could not be parsed. `line()` is the 1-based physical line of the
/// offending record, or 0 when the problem is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace vchain

#endif  // VCHAIN_ERROR_HPP
