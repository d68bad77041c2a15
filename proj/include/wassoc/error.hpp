#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wassoc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file problem. what() reads "path:line: message"; line is 0 when the
// error is not tied to a particular line.
class LoadError : public Error {
 public:
  LoadError(std::string path, std::size_t line, const std::string& message);

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

// Input is well-formed but too small or too uniform for the requested
// analysis (empty slice, vocabulary pruned away, a single group).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace wassoc
