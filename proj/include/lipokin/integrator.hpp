#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lipokin/errors.hpp"

namespace lipokin {

enum class Method {
  Rosenbrock23,  // L-stable linearly implicit 2(3) pair, default
  Dopri45,       // explicit embedded 4(5) pair for nonstiff runs
};

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double t_end = 0.0;
  std::size_t max_steps = 5'000'000;
  double initial_step = 0.0;  // 0 = choose automatically
  Method method = Method::Rosenbrock23;
  bool store_trajectory = true;  // keep all accepted points (else endpoints)
  bool fixed_step = false;       // accept every step of size initial_step
  bool stop_after_events = false;  // stop once every requested event fired

  void validate() const;
};

/// Autonomous first-order ODE system x' = rhs(t, x). The time argument is
/// passed through for generality, but the linearly implicit method omits the
/// explicit time-derivative term, so the field must not depend on t.
/// `jacobian` (row-major dim x dim) is optional; when absent a forward
/// finite-difference Jacobian is used.
struct VectorField {
  std::size_t dim = 0;
  std::function<void(double, std::span<const double>, std::span<double>)> rhs;
  std::function<void(double, std::span<const double>, std::span<double>)>
      jacobian;
};

/// Scalar event function whose sign change triggers event recording.
/// direction +1: fires on crossings from negative to nonnegative,
/// direction -1: positive to nonpositive, 0: either.
struct EventSpec {
  std::string label;
  std::function<double(double, std::span<const double>)> target;
  int direction = 0;
};

struct EventRecord {
  std::string label;
  double time = 0.0;
  std::vector<double> state;
};

enum class StopReason { ReachedEnd, SteadyState, AllEventsFired };

/// Dense integration result. States and derivatives are stored flat,
/// point-major; interpolation between accepted points is cubic Hermite,
/// which matches the stored endpoint derivatives.
struct Solution {
  std::size_t dim = 0;
  std::vector<double> times;
  std::vector<double> states;  // times.size() * dim
  std::vector<double> derivs;  // times.size() * dim
  std::vector<EventRecord> events;
  StopReason reason = StopReason::ReachedEnd;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;

  std::size_t size() const { return times.size(); }
  std::span<const double> state(std::size_t i) const {
    return {states.data() + i * dim, dim};
  }
  std::span<const double> deriv(std::size_t i) const {
    return {derivs.data() + i * dim, dim};
  }
  void sample_into(double t, std::span<double> out) const;
  std::vector<double> sample(double t) const;
  const EventRecord* find_event(std::string_view label) const;
};

using StopCondition = std::function<bool(double, std::span<const double>)>;

/// Integrate x' = f(t, x) from t = 0 to cfg.t_end with adaptive embedded
/// error control: per-component local error below atol + rtol*|x|.
///
/// Events are resolved by bisection on the dense output to a time accuracy
/// of max(1e-10, atol) or better and reported in chronological order.
/// `stop` is an optional early-termination predicate checked on accepted
/// states; it only takes effect once every requested event has fired.
Solution integrate(const VectorField& f, std::span<const double> y0,
                   const IntegratorConfig& cfg,
                   std::span<const EventSpec> events = {},
                   const StopCondition& stop = {});

/// Advisory stiffness indicator: h times the dominant eigenvalue magnitude
/// of the local Jacobian (finite-difference unless the field carries an
/// analytic one), estimated by power iteration. Values well above 1 mean an
/// explicit method would be step-limited by stability at this state.
double stiffness_probe(const VectorField& f, std::span<const double> y,
                       double h);

}  // namespace lipokin
