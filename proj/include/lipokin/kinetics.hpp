#pragma once

#include <array>

#include "lipokin/params.hpp"

namespace lipokin {

/// Dimensionless concentrations: s = TG/s0, q = DG/K2, p = MG/K2, f = FA/K2.
struct State {
  double s = 0.0;
  double q = 0.0;
  double p = 0.0;
  double f = 0.0;
};

// ---------------------------------------------------------------------------
// Rate kernels. Templated on the scalar type so tests can instantiate them
// with exact rational numbers; production code uses double.
// ---------------------------------------------------------------------------

/// Michaelis-Menten TG hydrolysis rate m1(s) = s/(K+s).
template <class T>
constexpr T rate_m1(T s, T K) {
  return s / (K + s);
}

/// Michaelis-Menten DG hydrolysis rate m2(q) = q/(1+q).
template <class T>
constexpr T rate_m2(T q) {
  return q / (T(1) + q);
}

/// Total DG consumption rate d(q) = m2(q) + 2*kappa*q^2 (hydrolysis plus
/// transacylation, which eats two DG per event).
template <class T>
constexpr T rate_d(T q, T kappa) {
  return rate_m2(q) + T(2) * kappa * q * q;
}

/// Right-hand side of the closed reaction system
///   s' = -m1 + V*kappa*q^2
///   q' = L*(m1 - V*(m2 + 2*kappa*q^2))
///   p' = V*(m2 + kappa*q^2)
///   f' = m1 + V*m2
/// Transacylation 2 DG -> TG + MG recycles one TG and releases one MG.
template <class T>
constexpr std::array<T, 4> rhs_full_kernel(const std::array<T, 4>& x, T K, T L,
                                           T V, T kappa) {
  const T m1 = rate_m1(x[0], K);
  const T m2 = rate_m2(x[1]);
  const T qq = x[1] * x[1];
  return {-m1 + V * kappa * qq,                    //
          L * (m1 - V * (m2 + T(2) * kappa * qq)),  //
          V * (m2 + kappa * qq),                    //
          m1 + V * m2};
}

// First and second derivatives of the rate laws.
inline double rate_m1_prime(double s, double K) {
  const double ks = K + s;
  return K / (ks * ks);
}
inline double rate_m1_second(double s, double K) {
  const double ks = K + s;
  return -2.0 * K / (ks * ks * ks);
}
inline double rate_m2_prime(double q) {
  const double oq = 1.0 + q;
  return 1.0 / (oq * oq);
}
inline double rate_m2_second(double q) {
  const double oq = 1.0 + q;
  return -2.0 / (oq * oq * oq);
}
/// d'(q) = 4*kappa*q + 1/(1+q)^2.
inline double rate_d_prime(double q, double kappa) {
  return 4.0 * kappa * q + rate_m2_prime(q);
}

// ---------------------------------------------------------------------------
// Double front ends. Negative inputs (transient floating-point drift) are
// clamped to zero before rate evaluation.
// ---------------------------------------------------------------------------

State clamp_nonnegative(const State& x);
State rhs_full(const State& x, const ModelParams& p);

/// Share of DG consumption going through transacylation rather than
/// hydrolysis: 2*kappa*q^2 / (2*kappa*q^2 + m2(q)). Defined as 0 at q = 0.
double transacylation_fraction(double q, double kappa);

/// Residuals of the two conserved linear combinations:
///   glycerol: s + q/L + p       - (1 + q0/L)
///   acyl:     3s + 2q/L + p + f - (3 + 2*q0/L)
struct ConservationResiduals {
  double glycerol = 0.0;
  double acyl = 0.0;
};
ConservationResiduals conservation_residuals(const State& x, double L,
                                             double q0);

/// Certified exponential decay envelope for (s, q):
///   alpha*L*s(t) + beta*q(t) <= (alpha*L + beta*q0) * exp(-c2 * t)
/// with s_max = 1 + 2*q0/(3L), q_max the quasi-steady level at s_max, and
///   c2 = min{ (alpha-beta)/(alpha*(K+s_max)), L*V/(1+q_max) }.
/// c1 = (alpha*L + beta*q0)/min(alpha*L, beta) bounds s and q individually.
/// Requires 0 < beta < alpha <= 2*beta and q0 below the quasi-steady level
/// at s_max (otherwise q may overshoot the envelope).
struct DecayEnvelope {
  double s_max = 0.0;
  double q_max = 0.0;
  double alpha = 1.0;
  double beta = 0.5;
  double c1 = 0.0;
  double c2 = 0.0;
};
DecayEnvelope decay_envelope(const ModelParams& p, double alpha = 1.0,
                             double beta = 0.5);

}  // namespace lipokin
