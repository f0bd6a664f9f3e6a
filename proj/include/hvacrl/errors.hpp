#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hvacrl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid scenario, parameter set, or command-line configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite inputs or an iteration that failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Newton iteration on the hydraulic network did not reach tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual_kPa, int iterations)
      : Error(what), residual_kPa_(residual_kPa), iterations_(iterations) {}

  double residual_kPa() const noexcept { return residual_kPa_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_kPa_;
  int iterations_;
};

/// Malformed tabular input. Row is 1-based over data rows (0 = header).
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t row, std::string column)
      : Error(what), row_(row), column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class RecommendationError : public Error {
 public:
  enum class Kind { kMalformed, kMissingZone, kEmptySet, kOutOfRange };

  RecommendationError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace hvacrl
