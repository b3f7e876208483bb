#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lipokin {

/// Thrown when the quasi-steady-state balance d(q) = m1(s)/V has no
/// nonnegative root. This happens exactly for kappa = 0 with m1(s)/V >= 1,
/// where the DG hydrolysis rate saturates below the demanded influx.
class NoRootError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Thrown when a time integration cannot be completed (step-size underflow,
/// non-finite right-hand side, step budget exhausted). Carries the last
/// accepted time and state so callers can report how far the run got.
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& what, double t, std::vector<double> y)
      : std::runtime_error(what), last_time(t), last_state(std::move(y)) {}

  double last_time;
  std::vector<double> last_state;
};

}  // namespace lipokin
