#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace radwave {

// Parameter outside its admissible range (exponent, window, radius ordering).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scenario cannot be run as configured (support guard, bad grid, unknown key).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A probe, region or label does not sit on the space-time lattice,
// or an analysis asked for data that was not recorded.
class ProbeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that contradict each other (e.g. nonpositive energy for a nonzero state).
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error("divergence at step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace radwave
