#ifndef CUMDIFF_ERROR_HPP_
#define CUMDIFF_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cumdiff {

// Base for every error raised by the library. The CLI maps these to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: empty populations, nonpositive weights, malformed rows.
class DataError : public Error {
 public:
  using Error::Error;
};

// Column mappings, layouts and variable maps that do not match the input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A single malformed row in an input file. `row` is 1-based and counts data
// rows (the CSV header is not counted).
class RowError : public DataError {
 public:
  RowError(std::size_t row, const std::string& what)
      : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace cumdiff

#endif  // CUMDIFF_ERROR_HPP_
