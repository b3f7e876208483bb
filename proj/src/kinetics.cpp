#include "lipokin/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lipokin/qssa.hpp"

namespace lipokin {

State clamp_nonnegative(const State& x) {
  return {std::max(x.s, 0.0), std::max(x.q, 0.0), std::max(x.p, 0.0),
          std::max(x.f, 0.0)};
}

State rhs_full(const State& x, const ModelParams& p) {
  const State c = clamp_nonnegative(x);
  const auto dx =
      rhs_full_kernel<double>({c.s, c.q, c.p, c.f}, p.K, p.L, p.V, p.kappa);
  return {dx[0], dx[1], dx[2], dx[3]};
}

double transacylation_fraction(double q, double kappa) {
  q = std::max(q, 0.0);
  if (q == 0.0) return 0.0;
  const double ta = 2.0 * kappa * q * q;
  return ta / (ta + rate_m2(q));
}

ConservationResiduals conservation_residuals(const State& x, double L,
                                             double q0) {
  ConservationResiduals r;
  r.glycerol = x.s + x.q / L + x.p - (1.0 + q0 / L);
  r.acyl = 3.0 * x.s + 2.0 * x.q / L + x.p + x.f - (3.0 + 2.0 * q0 / L);
  return r;
}

DecayEnvelope decay_envelope(const ModelParams& p, double alpha, double beta) {
  p.validate();
  if (!(beta > 0.0 && beta < alpha && alpha <= 2.0 * beta))
    throw std::invalid_argument(
        "envelope weights require 0 < beta < alpha <= 2*beta");

  DecayEnvelope env;
  env.alpha = alpha;
  env.beta = beta;
  env.s_max = 1.0 + 2.0 * p.q0 / (3.0 * p.L);
  // quasi-steady DG ceiling at the substrate ceiling
  env.q_max = qssa_root(rate_m1(env.s_max, p.K) / p.V, p.kappa);
  if (p.q0 > env.q_max)
    throw std::invalid_argument(
        "initial DG exceeds the quasi-steady level at s_max; "
        "the exponential envelope is not certified for this start");

  const double al = alpha * p.L;
  env.c1 = (al + beta * p.q0) / std::min(al, beta);
  env.c2 = std::min((alpha - beta) / (alpha * (p.K + env.s_max)),
                    p.L * p.V / (1.0 + env.q_max));
  return env;
}

}  // namespace lipokin
