#include "lipokin/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lipokin/qssa.hpp"
#include "lipokin/simulate.hpp"

namespace lipokin {

SensitivityState rhs_sensitivity_full(const State& x, const SensitivityState& v,
                                      const ModelParams& p) {
  const State xc = clamp_nonnegative(x);
  const std::array<double, 4> dv = rhs_sensitivity_kernel<double>(
      {xc.s, xc.q, xc.p, xc.f}, {v.ds, v.dq, v.dp, v.df}, p.K, p.L, p.V,
      p.kappa);
  return {dv[0], dv[1], dv[2], dv[3]};
}

VectorField augmented_vector_field(const ModelParams& p) {
  p.validate();
  VectorField field;
  field.dim = 8;
  field.rhs = [p](double, std::span<const double> y, std::span<double> dy) {
    const State x{y[0], y[1], y[2], y[3]};
    const SensitivityState v{y[4], y[5], y[6], y[7]};
    const State dx = rhs_full(x, p);
    const SensitivityState dv = rhs_sensitivity_full(x, v, p);
    dy[0] = dx.s;
    dy[1] = dx.q;
    dy[2] = dx.p;
    dy[3] = dx.f;
    dy[4] = dv.ds;
    dy[5] = dv.dq;
    dy[6] = dv.dp;
    dy[7] = dv.df;
  };
  // Analytic Jacobian of the augmented system. Both the state block and the
  // sensitivity block are annihilated by the conserved combinations, so the
  // differentiated conservation laws hold exactly along implicit steps.
  field.jacobian = [p](double, std::span<const double> y,
                       std::span<double> jac) {
    const double s = std::max(y[0], 0.0);
    const double q = std::max(y[1], 0.0);
    const double vs = y[4], vq = y[5];
    const double m1p = rate_m1_prime(s, p.K);
    const double m1pp = rate_m1_second(s, p.K);
    const double m2p = rate_m2_prime(q);
    const double m2pp = rate_m2_second(q);
    const double V = p.V, L = p.L, k = p.kappa;
    std::fill(jac.begin(), jac.end(), 0.0);
    auto at = [&jac](std::size_t r, std::size_t c) -> double& {
      return jac[r * 8 + c];
    };
    // state rows
    at(0, 0) = -m1p;
    at(0, 1) = 2.0 * V * k * q;
    at(1, 0) = L * m1p;
    at(1, 1) = -L * V * (m2p + 4.0 * k * q);
    at(2, 1) = V * (m2p + 2.0 * k * q);
    at(3, 0) = m1p;
    at(3, 1) = V * m2p;
    // sensitivity rows
    at(4, 0) = -m1pp * vs;
    at(4, 1) = 2.0 * V * q + 2.0 * V * k * vq;
    at(4, 4) = -m1p;
    at(4, 5) = 2.0 * V * k * q;
    at(5, 0) = L * m1pp * vs;
    at(5, 1) = L * (-4.0 * V * q - V * (m2pp + 4.0 * k) * vq);
    at(5, 4) = L * m1p;
    at(5, 5) = -L * V * (m2p + 4.0 * k * q);
    at(6, 1) = V * (2.0 * q + (m2pp + 2.0 * k) * vq);
    at(6, 5) = V * (m2p + 2.0 * k * q);
    at(7, 0) = m1pp * vs;
    at(7, 1) = V * m2pp * vq;
    at(7, 4) = m1p;
    at(7, 5) = V * m2p;
  };
  return field;
}

Solution integrate_sensitivity_full(const ModelParams& p,
                                    const IntegratorConfig& cfg) {
  p.validate();
  const std::vector<double> y0 = {1.0, p.q0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  return integrate(augmented_vector_field(p), y0, cfg);
}

QssaSensitivityPoint qssa_sensitivity_point(double s_tilde, double ds_dk,
                                            const ModelParams& p) {
  p.validate();
  if (!(s_tilde >= 0.0)) throw std::invalid_argument("s must be >= 0");
  QssaSensitivityPoint pt;
  const double m1p = rate_m1_prime(s_tilde, p.K);
  pt.q_tilde = qssa_root(rate_m1(s_tilde, p.K) / p.V, p.kappa);
  pt.mu = rate_m2_prime(pt.q_tilde) + 4.0 * p.kappa * pt.q_tilde;
  pt.dq_dk = (m1p * ds_dk / p.V - 2.0 * pt.q_tilde * pt.q_tilde) / pt.mu;
  pt.dp_dk = -ds_dk;
  pt.vdot = -m1p * (1.0 - 2.0 * p.kappa * pt.q_tilde / pt.mu) * ds_dk +
            p.V * pt.q_tilde * pt.q_tilde *
                (1.0 - 4.0 * p.kappa * pt.q_tilde / pt.mu);
  return pt;
}

Solution integrate_sensitivity_qssa(const ModelParams& p,
                                    const IntegratorConfig& cfg) {
  p.validate();
  VectorField field;
  field.dim = 2;  // (s~, ds~/dkappa) on the zero-order slow flow
  field.rhs = [p](double, std::span<const double> y, std::span<double> dy) {
    const double s = std::max(y[0], 0.0);
    const double qt = qssa_root(rate_m1(s, p.K) / p.V, p.kappa);
    dy[0] = -rate_m1(s, p.K) + p.V * p.kappa * qt * qt;
    dy[1] = qssa_sensitivity_point(s, y[1], p).vdot;
  };
  const std::vector<double> y0 = {1.0, 0.0};
  return integrate(field, y0, cfg);
}

std::vector<SensitivityState> fd_sensitivity_oracle(const ModelParams& p,
                                                    std::span<const double> t_grid,
                                                    double h, double rtol,
                                                    double atol) {
  p.validate();
  if (!(p.kappa > 0.0))
    throw std::invalid_argument(
        "central differences in kappa need kappa > 0");
  if (!(h > 0.0) || !(h < 1.0)) throw std::invalid_argument("need 0 < h < 1");
  if (t_grid.empty()) throw std::invalid_argument("empty output grid");

  IntegratorConfig cfg;
  cfg.rtol = rtol;
  cfg.atol = atol;
  cfg.t_end = *std::max_element(t_grid.begin(), t_grid.end());
  if (!(cfg.t_end > 0.0)) throw std::invalid_argument("grid must reach t > 0");

  const std::vector<double> y0 = {1.0, p.q0, 0.0, 0.0};
  ModelParams plus = p, minus = p;
  plus.kappa = p.kappa * (1.0 + h);
  minus.kappa = p.kappa * (1.0 - h);
  const Solution up = integrate(full_vector_field(plus), y0, cfg);
  const Solution dn = integrate(full_vector_field(minus), y0, cfg);

  const double denom = 2.0 * p.kappa * h;
  std::vector<SensitivityState> out;
  out.reserve(t_grid.size());
  std::vector<double> yu(4), yd(4);
  for (const double t : t_grid) {
    up.sample_into(t, yu);
    dn.sample_into(t, yd);
    out.push_back({(yu[0] - yd[0]) / denom, (yu[1] - yd[1]) / denom,
                   (yu[2] - yd[2]) / denom, (yu[3] - yd[3]) / denom});
  }
  return out;
}

DiscrepancyReport sign_discrepancy_probe(const ModelParams& p,
                                         const IntegratorConfig& cfg,
                                         double zero_tol) {
  p.validate();
  if (!(zero_tol >= 0.0)) throw std::invalid_argument("zero_tol must be >= 0");
  const Solution full = integrate_sensitivity_full(p, cfg);
  const Solution slow = integrate_sensitivity_qssa(p, cfg);

  DiscrepancyReport rep;
  std::vector<double> ys(2);
  bool in_run = false;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const double t = full.times[i];
    const double dp_full = full.state(i)[6];
    slow.sample_into(t, ys);
    const double dp_slow = -ys[1];  // dp~/dk = -ds~/dk
    const bool contradicts = dp_full > zero_tol && dp_slow <= zero_tol;
    if (contradicts && !rep.found) {
      rep.found = true;
      rep.t_begin = t;
      rep.t_end = t;
      in_run = true;
    } else if (contradicts && in_run) {
      rep.t_end = t;
    } else if (in_run) {
      break;  // earliest contiguous interval only
    }
  }
  return rep;
}

}  // namespace lipokin
