#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cfg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Particle sets are stored column-wise: one column per point, one row per coordinate.
using Points = Eigen::MatrixXd;

/// Raised when a run produces non-finite particles or losses.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, long iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

/// Raised for malformed configuration; carries the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace cfg
