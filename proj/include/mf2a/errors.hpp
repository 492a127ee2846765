#ifndef MF2A_ERRORS_HPP
#define MF2A_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mf2a {

// Invalid run configuration (bad flags, inconsistent hyperparameters). CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or malformed input data. CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (Cholesky breakdown, degenerate likelihoods). CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mf2a

#endif
