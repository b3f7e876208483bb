#pragma once

#include <vector>

#include "lipokin/integrator.hpp"
#include "lipokin/kinetics.hpp"
#include "lipokin/params.hpp"

namespace lipokin {

enum class ModelKind {
  Full,        // 4-dim closed system
  Qssa0L,      // large-L slow system, zero order, states (s, p, f)
  Qssa1L,      // large-L slow system with first-order correction
  Qssa1V,      // large-V reduced system, first order in 1/V
  Qssa1Kappa,  // large-kappa reduced system, first order in 1/sqrt(kappa)
};

/// Event label used by simulate_full for the sign change of q' (the DG peak).
inline constexpr const char* kQMaxEventLabel = "q_max";

/// Typed view over a 4-dim (full) or 3-dim (reduced) solution.
/// For reduced models the DG column is reconstructed from the stored s by
/// the model's own expansion, and q0 is required to be 0 (reduced systems
/// describe DG slaved to the quasi-steady manifold).
struct Trajectory {
  Solution sol;
  ModelParams params;
  ModelKind model = ModelKind::Full;

  std::size_t size() const { return sol.size(); }
  double time(std::size_t i) const { return sol.times[i]; }
  State state(std::size_t i) const;
  State at_time(double t) const;
  const std::vector<EventRecord>& events() const { return sol.events; }
  const EventRecord* find_event(std::string_view label) const {
    return sol.find_event(label);
  }
};

/// The closed 4-dim system as a vector field with analytic Jacobian.
VectorField full_vector_field(const ModelParams& p);

/// Integrate the full system from (1, q0, 0, 0). Always requests the q'
/// sign-change event (label kQMaxEventLabel) plus any extra events, and
/// stops early once s + q < 1e-10 with all events resolved.
Trajectory simulate_full(const ModelParams& p, const IntegratorConfig& cfg,
                         std::span<const EventSpec> extra_events = {});

/// Integrate one of the reduced models from (1, 0, 0) over (s, p, f).
Trajectory simulate_reduced(const ModelParams& p, ModelKind model,
                            const IntegratorConfig& cfg);

}  // namespace lipokin
