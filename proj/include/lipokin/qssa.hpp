#pragma once

#include <cstddef>
#include <vector>

#include "lipokin/integrator.hpp"
#include "lipokin/params.hpp"
#include "lipokin/simulate.hpp"

namespace lipokin {

/// Quasi-steady DG level q~ solving m1(s)/V = d(q~), together with how it
/// was obtained and whether it sits in the certified half-unit range.
struct QssaPoint {
  enum class How { ExactRoot, QuadraticApprox };

  double q_tilde = 0.0;
  double input_I = 0.0;  // demanded influx m1(s)/V
  How method = How::ExactRoot;
  bool valid_half = false;  // q_tilde <= 1/2
};

/// Root of d(q) = I for I >= 0. d is strictly increasing, so the root is
/// unique; it is bracketed by doubling and polished by bisection plus Newton
/// to residual |d(q) - I| < 1e-12. Throws NoRootError for kappa = 0 with
/// I >= 1 (hydrolysis alone saturates at rate 1).
double qssa_root(double I, double kappa);

/// Exact quasi-steady DG level at substrate s.
QssaPoint solve_qssa(double s, const ModelParams& p);

/// Closed-form root of the quadratic model 2*kappa*q^2 + q - q^2 = I that
/// drops the O(q^3) tail of m2:
///   q0~ = 2I / (sqrt(1 + 4I(2*kappa - 1)) + 1).
/// Throws std::domain_error when the discriminant is negative (possible for
/// 2*kappa < 1 with I > 1/(4(1-2*kappa))).
QssaPoint qssa_approx(double I, double kappa);

/// Sufficient condition V >= 4/(1+2*kappa) under which the quasi-steady
/// level stays below 1/2 for all s <= 1 and the quadratic model is close.
bool vkappa_condition(double V, double kappa);

/// Off-manifold perturbation pi(t) = q(t) - q~(s(t)) along a full-system
/// trajectory, with the sign identity sign(q') = -sign(pi) checked at every
/// stored point. Points where |pi| <= zero_tol count as on-manifold.
struct PerturbationSeries {
  std::vector<double> times;
  std::vector<double> pi;
  std::vector<double> qdot;
  std::size_t checked = 0;     // points with |pi| > zero_tol
  std::size_t violations = 0;  // checked points where the identity fails
};
PerturbationSeries perturbation(const Trajectory& traj, const ModelParams& p,
                                double zero_tol = 1e-10);

/// Relaxation / processing timescale diagnostics built from the DG peak.
///   t1 = 2(K+1) q~m / L
///   t2 = (2(K+1)^2/K) (q~m/q~0) theta0
///   t3 = (2(K+s_m)^2/K) (theta_m / psi)
///   t_estimate = 1 / (1/t1 + 1/t2 + 1/t3)
///   t_bound    = 2(K+1)^2 / ((L/q~m)(K+1) + (3/4)K)
/// theta(q) = V q d'(q) / m1 evaluated at q~0 (with m1(1)) and at q~m (with
/// m1(s_m)); psi = (m1 - V kappa q~m^2)/m1 at s_m.
/// The reference time at which `percentile`% of TG still remains on the slow
/// reference flow s' = -(3/4) m1(s), i.e. s(t_ref) = rho:
///   exact:     (4/3)((1-rho) + K ln(1/rho)),  rho = percentile/100
///   shorthand: (4/3)(1-rho)(1+K)
/// Validity flags compare t_bound against the shorthand (c = 3/(2(1-rho)),
/// c = 15 for the default percentile 90):
///   full:   L/q~m >= c - (3/4) K/(K+1)
///   simple: q~m <= L/c
/// plus the explicit parameter versions of the simple condition obtained by
/// inserting q~m <= L/c into the quasi-steady balance with m1 <= 1:
///   kappa >= (c/(2L)) (c/(LV) - 1/(1+L/c))
///   V     >= 1 / (2 kappa L^2/c^2 + 1/(1+c/L))
struct TimescaleReport {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
  double t_estimate = 0.0;
  double t_bound = 0.0;
  double t_ref_exact = 0.0;
  double t_ref_simple = 0.0;
  double percentile = 90.0;
  double t_m = 0.0;        // time of the DG peak
  double s_m = 0.0;        // substrate at the peak
  double q_tilde_m = 0.0;  // DG at the peak
  double q_tilde_0 = 0.0;  // quasi-steady DG at s(0)
  double theta0 = 0.0;
  double theta_m = 0.0;
  double psi = 0.0;
  double kappa_bound = 0.0;  // explicit lower bound on kappa
  double v_bound = 0.0;      // explicit lower bound on V
  bool condition_full = false;
  bool condition_simple = false;
  bool condition_kappa = false;  // kappa >= kappa_bound
  bool condition_v = false;      // V >= v_bound
};
TimescaleReport timescales(const ModelParams& p, const Trajectory& traj,
                           double percentile = 90.0);

// ---------------------------------------------------------------------------
// Reduced slow systems over (s, p, f)
// ---------------------------------------------------------------------------

enum class Regime { LargeL, LargeV, LargeKappa };

/// The small parameter of each regime: 1/L, 1/V, 1/sqrt(kappa).
double regime_epsilon(const ModelParams& p, Regime regime);

/// Slow vector field of the requested regime and order (order is 0 or 1 for
/// LargeL; LargeV and LargeKappa are the first-order systems).
VectorField reduced_vector_field(const ModelParams& p, ModelKind model);

/// DG level the reduced model reports at substrate s (quasi-steady root plus
/// the model's correction terms).
double reconstruct_q(double s, const ModelParams& p, ModelKind model);

/// Partial sums of the DG expansions evaluated at substrate s.
/// Large V (terms 1..order, order <= 3):
///   q1 = m1/V
///   q2 = (m1/V^2)(-(2k-1) m1 + m1'/L)
///   q3 = (m1/V^3)((4-9k) m1' m1 / L + (2(2k-1)^2 - 1) m1^2
///                 + (m1'' m1 + m1'^2)/L^2)
double expansion_q_v(double s, const ModelParams& p, int order);
/// Large kappa (terms 1..order, order <= 2):
///   q1 = sqrt(m1/(2V kappa))
///   q2 = (1/kappa)(m1'/(16 L V) - 1/4)
double expansion_q_kappa(double s, const ModelParams& p, int order);

}  // namespace lipokin
