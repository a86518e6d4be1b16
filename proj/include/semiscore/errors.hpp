#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace semiscore {

// Bad configuration or out-of-domain arguments. CLI maps this to exit code 2.
struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown: lost bracket, overflow, rejection sampler starvation.
// CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A single trajectory left the representable region. Carries enough to point
// at the offending (trajectory, step) pair; the batch as a whole survives.
struct diverged_error : numeric_error {
  diverged_error(std::uint64_t trajectory_, std::uint64_t step_, double magnitude_)
      : numeric_error("trajectory " + std::to_string(trajectory_) + " diverged at step " +
                      std::to_string(step_) + " (|state| = " + std::to_string(magnitude_) + ")"),
        trajectory(trajectory_), step(step_), magnitude(magnitude_) {}
  std::uint64_t trajectory;
  std::uint64_t step;
  double magnitude;
};

}  // namespace semiscore
