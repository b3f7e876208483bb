#pragma once

#include <array>
#include <vector>

#include "lipokin/integrator.hpp"
#include "lipokin/kinetics.hpp"
#include "lipokin/params.hpp"

namespace lipokin {

/// Derivatives of the four concentrations with respect to kappa.
struct SensitivityState {
  double ds = 0.0;
  double dq = 0.0;
  double dp = 0.0;
  double df = 0.0;
};

/// Forward sensitivity equations, obtained by differentiating the full
/// system in kappa (v = dx/dkappa):
///   vs' = -m1' vs + V q^2 + 2 V kappa q vq
///   vq' = L (m1' vs - 2 V q^2 - V (m2' + 4 kappa q) vq)
///   vp' = V (q^2 + (m2' + 2 kappa q) vq)
///   vf' = m1' vs + V m2' vq
/// Templated for exact-arithmetic tests of the differentiated conservation
/// laws (vs + vq/L + vp = 0 and 3vs + 2vq/L + vp + vf = 0 propagation).
template <class T>
constexpr std::array<T, 4> rhs_sensitivity_kernel(const std::array<T, 4>& x,
                                                  const std::array<T, 4>& v,
                                                  T K, T L, T V, T kappa) {
  const T one = T(1);
  const T ks = K + x[0];
  const T m1p = K / (ks * ks);
  const T oq = one + x[1];
  const T m2p = one / (oq * oq);
  const T q = x[1];
  const T qq = q * q;
  return {-m1p * v[0] + V * qq + T(2) * V * kappa * q * v[1],
          L * (m1p * v[0] - T(2) * V * qq -
               V * (m2p + T(4) * kappa * q) * v[1]),
          V * (qq + (m2p + T(2) * kappa * q) * v[1]),
          m1p * v[0] + V * m2p * v[1]};
}

SensitivityState rhs_sensitivity_full(const State& x, const SensitivityState& v,
                                      const ModelParams& p);

/// Augmented 8-dim field (x, dx/dkappa) with analytic Jacobian, so the
/// differentiated conservation laws are preserved exactly by the linearly
/// implicit integrator.
VectorField augmented_vector_field(const ModelParams& p);

/// Forward sensitivities along the full system from homogeneous initial
/// sensitivity data. Fields of the result: 8-dim solution, first four
/// components the concentrations, last four their kappa-derivatives.
Solution integrate_sensitivity_full(const ModelParams& p,
                                    const IntegratorConfig& cfg);

/// Quasi-steady sensitivity at a point of the slow flow:
///   mu       = m2'(q~) + 4 kappa q~
///   dq~/dk   = (m1'(s~) ds~/dk / V - 2 q~^2) / mu
///   dp~/dk   = -ds~/dk
/// and the slow evolution of v = ds~/dk:
///   v' = -m1'(s~)(1 - 2 kappa q~/mu) v + V q~^2 (1 - 4 kappa q~/mu).
struct QssaSensitivityPoint {
  double q_tilde = 0.0;
  double mu = 0.0;
  double dq_dk = 0.0;
  double dp_dk = 0.0;
  double vdot = 0.0;
};
QssaSensitivityPoint qssa_sensitivity_point(double s_tilde, double ds_dk,
                                            const ModelParams& p);

/// Integrate (s~, ds~/dk) on the zero-order slow flow from (1, 0).
Solution integrate_sensitivity_qssa(const ModelParams& p,
                                    const IntegratorConfig& cfg);

/// Central-difference oracle (x(kappa(1+h)) - x(kappa(1-h))) / (2 kappa h)
/// on a shared output grid, using two full-system runs at tolerances well
/// below the forward run's so the oracle is the more accurate side.
/// Requires kappa > 0 and h > 0.
std::vector<SensitivityState> fd_sensitivity_oracle(
    const ModelParams& p, std::span<const double> t_grid, double h = 1e-4,
    double rtol = 1e-12, double atol = 1e-14);

/// Earliest interval where the full-system dp/dkappa is positive while the
/// quasi-steady dp~/dkappa is not (the reduced model predicts the opposite
/// sign of the MG response). Values within zero_tol of 0 are treated as
/// signless.
struct DiscrepancyReport {
  bool found = false;
  double t_begin = 0.0;
  double t_end = 0.0;
  double duration() const { return found ? t_end - t_begin : 0.0; }
};
DiscrepancyReport sign_discrepancy_probe(const ModelParams& p,
                                         const IntegratorConfig& cfg,
                                         double zero_tol = 1e-9);

}  // namespace lipokin
