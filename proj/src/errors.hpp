#ifndef DDTWA_ERRORS_HPP
#define DDTWA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ddtwa {

// Invalid scenario/configuration input.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure during integration (non-finite state, tolerance abort).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// File I/O or format failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ddtwa

#endif
