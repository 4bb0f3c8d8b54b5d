#ifndef SCALEBAYES_ERRORS_HPP
#define SCALEBAYES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace scalebayes {

// Bad user input: malformed config, invalid hyperparameters, violated
// preconditions that a caller could have checked. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at runtime: singular Gram matrix, overflow, a grid that
// cannot hold the posterior mass. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class DimensionError : public ConfigError {
 public:
  explicit DimensionError(const std::string& what) : ConfigError(what) {}
};

}  // namespace scalebayes

#endif
