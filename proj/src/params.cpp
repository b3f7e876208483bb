#include "lipokin/params.hpp"

namespace lipokin {

ModelParams nondimensionalize(const DimensionalParams& p) {
  p.validate();
  ModelParams out;
  out.K = p.k1_m / p.s0;
  out.L = p.s0 / p.k2_m;
  out.V = p.v2_max / p.v1_max;
  out.kappa = p.sigma * p.k2_m * p.k2_m / p.v2_max;
  out.q0 = p.q0 / p.k2_m;
  out.validate();
  return out;
}

}  // namespace lipokin
