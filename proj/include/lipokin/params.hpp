#pragma once

#include <stdexcept>

namespace lipokin {

/// Dimensional kinetic constants of the two-enzyme lipolysis chain plus the
/// transacylation rate constant sigma and the initial concentrations.
/// Units: rates in concentration/time, Michaelis constants and initial
/// concentrations in concentration, sigma in 1/(concentration*time).
struct DimensionalParams {
  double v1_max = 0.0;  // TG hydrolysis max rate V1
  double k1_m = 0.0;    // TG hydrolysis Michaelis constant K1
  double v2_max = 0.0;  // DG hydrolysis max rate V2
  double k2_m = 0.0;    // DG hydrolysis Michaelis constant K2
  double sigma = 0.0;   // DG transacylation mass-action constant
  double s0 = 0.0;      // initial TG concentration
  double q0 = 0.0;      // initial DG concentration

  void validate() const {
    if (!(v1_max > 0.0) || !(k1_m > 0.0) || !(v2_max > 0.0) || !(k2_m > 0.0) ||
        !(s0 > 0.0))
      throw std::invalid_argument(
          "dimensional parameters v1_max, k1_m, v2_max, k2_m, s0 must be > 0");
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    if (!(q0 >= 0.0)) throw std::invalid_argument("q0 must be >= 0");
  }
};

/// Dimensionless parameter group. TG is scaled by s0, DG/MG/FA by K2, time
/// by s0/V1:
///   K = K1/s0, L = s0/K2, V = V2/V1, kappa = sigma*K2^2/V2, q0 = q0_dim/K2.
struct ModelParams {
  double K = 1.0;
  double L = 1.0;
  double V = 1.0;
  double kappa = 1.0;
  double q0 = 0.0;  // initial DG in units of K2

  void validate() const {
    if (!(K > 0.0) || !(L > 0.0) || !(V > 0.0))
      throw std::invalid_argument("K, L, V must be > 0");
    if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
    if (!(q0 >= 0.0)) throw std::invalid_argument("q0 must be >= 0");
  }
};

/// Collapse dimensional constants into the dimensionless group.
ModelParams nondimensionalize(const DimensionalParams& p);

}  // namespace lipokin
