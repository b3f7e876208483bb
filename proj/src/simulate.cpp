#include "lipokin/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lipokin/qssa.hpp"

namespace lipokin {

State Trajectory::state(std::size_t i) const {
  const std::span<const double> y = sol.state(i);
  if (model == ModelKind::Full) return {y[0], y[1], y[2], y[3]};
  const double s = std::max(y[0], 0.0);
  return {y[0], reconstruct_q(s, params, model), y[1], y[2]};
}

State Trajectory::at_time(double t) const {
  const std::vector<double> y = sol.sample(t);
  if (model == ModelKind::Full) return {y[0], y[1], y[2], y[3]};
  const double s = std::max(y[0], 0.0);
  return {y[0], reconstruct_q(s, params, model), y[1], y[2]};
}

VectorField full_vector_field(const ModelParams& p) {
  p.validate();
  VectorField field;
  field.dim = 4;
  field.rhs = [p](double, std::span<const double> y, std::span<double> dy) {
    const State d = rhs_full({y[0], y[1], y[2], y[3]}, p);
    dy[0] = d.s;
    dy[1] = d.q;
    dy[2] = d.p;
    dy[3] = d.f;
  };
  // Row-major Jacobian at the clamped state. Written out so that the two
  // conserved linear combinations annihilate it exactly (c^T J = 0), which
  // keeps the linearly implicit steps on the conservation planes.
  field.jacobian = [p](double, std::span<const double> y,
                       std::span<double> jac) {
    const double s = std::max(y[0], 0.0);
    const double q = std::max(y[1], 0.0);
    const double m1p = rate_m1_prime(s, p.K);
    const double m2p = rate_m2_prime(q);
    std::fill(jac.begin(), jac.end(), 0.0);
    jac[0 * 4 + 0] = -m1p;
    jac[0 * 4 + 1] = 2.0 * p.V * p.kappa * q;
    jac[1 * 4 + 0] = p.L * m1p;
    jac[1 * 4 + 1] = -p.L * p.V * (m2p + 4.0 * p.kappa * q);
    jac[2 * 4 + 1] = p.V * (m2p + 2.0 * p.kappa * q);
    jac[3 * 4 + 0] = m1p;
    jac[3 * 4 + 1] = p.V * m2p;
  };
  return field;
}

Trajectory simulate_full(const ModelParams& p, const IntegratorConfig& cfg,
                         std::span<const EventSpec> extra_events) {
  p.validate();
  std::vector<EventSpec> events;
  events.reserve(1 + extra_events.size());
  // q' sign change marks the end of the initial layer (the DG peak)
  events.push_back(
      {kQMaxEventLabel,
       [p](double, std::span<const double> y) {
         const double s = std::max(y[0], 0.0);
         const double q = std::max(y[1], 0.0);
         return p.L * (rate_m1(s, p.K) - p.V * rate_d(q, p.kappa));
       },
       -1});
  events.insert(events.end(), extra_events.begin(), extra_events.end());

  const std::vector<double> y0 = {1.0, p.q0, 0.0, 0.0};
  Trajectory traj;
  traj.params = p;
  traj.model = ModelKind::Full;
  traj.sol = integrate(full_vector_field(p), y0, cfg, events,
                       [](double, std::span<const double> y) {
                         return y[0] + y[1] < 1e-10;
                       });
  return traj;
}

Trajectory simulate_reduced(const ModelParams& p, ModelKind model,
                            const IntegratorConfig& cfg) {
  p.validate();
  if (model == ModelKind::Full)
    throw std::invalid_argument("simulate_reduced needs a reduced model kind");
  if (p.q0 != 0.0)
    throw std::invalid_argument(
        "reduced models start on the quasi-steady manifold and require q0 = 0");

  const std::vector<double> y0 = {1.0, 0.0, 0.0};
  Trajectory traj;
  traj.params = p;
  traj.model = model;
  traj.sol = integrate(reduced_vector_field(p, model), y0, cfg, {},
                       [](double, std::span<const double> y) {
                         return y[0] < 1e-10;
                       });
  return traj;
}

}  // namespace lipokin
