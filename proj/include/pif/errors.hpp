#ifndef PIF_ERRORS_HPP
#define PIF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pif {

// Error categories map onto CLI exit codes: config -> 2, data -> 3, numerical -> 4.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& path, long line, const std::string& msg)
      : DataError(path + ":" + std::to_string(line) + ": " + msg),
        line_number(line) {}
  long line_number;
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an observed count has no rate component that could explain it.
class ModelInconsistencyError : public NumericalError {
 public:
  ModelInconsistencyError(int row, int col)
      : NumericalError("observation (" + std::to_string(row) + ", " +
                       std::to_string(col) +
                       ") has no active rate component"),
        row(row),
        col(col) {}
  int row;
  int col;
};

}  // namespace pif

#endif
