#include "lipokin/qssa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lipokin/errors.hpp"
#include "lipokin/kinetics.hpp"

namespace lipokin {

double qssa_root(double I, double kappa) {
  if (!std::isfinite(I)) throw std::invalid_argument("influx I must be finite");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  if (I <= 0.0) return 0.0;
  if (kappa == 0.0 && I >= 1.0)
    throw NoRootError(
        "d(q) = q/(1+q) saturates below the demanded influx (kappa = 0, "
        "I >= 1)");

  // d is strictly increasing with d(0) = 0, so double an upper bracket and
  // then run safeguarded Newton inside it.
  double lo = 0.0, hi = 1.0;
  while (rate_d(hi, kappa) < I) hi *= 2.0;

  double q = std::min(I, 0.5 * hi);  // d(q) >= q near 0, so q <= I is typical
  if (q <= lo || q >= hi) q = 0.5 * (lo + hi);
  double r = rate_d(q, kappa) - I;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(r) < 1e-13) break;
    if (r > 0.0)
      hi = q;
    else
      lo = q;
    const double step = r / rate_d_prime(q, kappa);
    double next = q - step;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (next == q) break;  // bracket exhausted at machine precision
    q = next;
    r = rate_d(q, kappa) - I;
  }
  return q;
}

QssaPoint solve_qssa(double s, const ModelParams& p) {
  p.validate();
  if (!(s >= 0.0)) throw std::invalid_argument("s must be >= 0");
  QssaPoint pt;
  pt.input_I = rate_m1(s, p.K) / p.V;
  pt.q_tilde = qssa_root(pt.input_I, p.kappa);
  pt.method = QssaPoint::How::ExactRoot;
  pt.valid_half = pt.q_tilde <= 0.5;
  return pt;
}

QssaPoint qssa_approx(double I, double kappa) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  QssaPoint pt;
  pt.input_I = I;
  pt.method = QssaPoint::How::QuadraticApprox;
  if (I <= 0.0) {
    pt.valid_half = true;
    return pt;
  }
  const double disc = 1.0 + 4.0 * I * (2.0 * kappa - 1.0);
  if (disc < 0.0)
    throw std::domain_error(
        "quadratic model 2*kappa*q^2 + q - q^2 = I has no real root "
        "(2*kappa < 1 and I too large)");
  pt.q_tilde = 2.0 * I / (std::sqrt(disc) + 1.0);
  pt.valid_half = pt.q_tilde <= 0.5;
  return pt;
}

bool vkappa_condition(double V, double kappa) {
  if (!(V > 0.0) || !(kappa >= 0.0))
    throw std::invalid_argument("need V > 0 and kappa >= 0");
  return V >= 4.0 / (1.0 + 2.0 * kappa);
}

PerturbationSeries perturbation(const Trajectory& traj, const ModelParams& p,
                                double zero_tol) {
  p.validate();
  if (traj.model != ModelKind::Full)
    throw std::invalid_argument(
        "perturbation series needs a full-system trajectory");
  if (!(zero_tol >= 0.0)) throw std::invalid_argument("zero_tol must be >= 0");

  PerturbationSeries out;
  const std::size_t n = traj.size();
  out.times.reserve(n);
  out.pi.reserve(n);
  out.qdot.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const State x = traj.state(i);
    const double s = std::max(x.s, 0.0);
    const double q = std::max(x.q, 0.0);
    const double q_tilde = qssa_root(rate_m1(s, p.K) / p.V, p.kappa);
    const double pi = x.q - q_tilde;
    const double qdot =
        p.L * (rate_m1(s, p.K) - p.V * rate_d(q, p.kappa));
    out.times.push_back(traj.time(i));
    out.pi.push_back(pi);
    out.qdot.push_back(qdot);
    if (std::abs(pi) > zero_tol) {
      ++out.checked;
      const bool opposite = (pi > 0.0 && qdot < 0.0) || (pi < 0.0 && qdot > 0.0);
      if (!opposite) ++out.violations;
    }
  }
  return out;
}

TimescaleReport timescales(const ModelParams& p, const Trajectory& traj,
                           double percentile) {
  p.validate();
  if (!(percentile > 0.0 && percentile < 100.0))
    throw std::invalid_argument("percentile must lie in (0, 100)");
  if (traj.model != ModelKind::Full)
    throw std::invalid_argument("timescales needs a full-system trajectory");
  const EventRecord* peak = traj.find_event(kQMaxEventLabel);
  if (peak == nullptr)
    throw std::runtime_error(
        "trajectory has no DG-peak event (q' never changed sign; integrate "
        "longer or start below the quasi-steady level)");

  TimescaleReport r;
  r.percentile = percentile;
  r.t_m = peak->time;
  r.s_m = std::max(peak->state[0], 0.0);

  const double s0 = std::max(traj.state(0).s, 0.0);
  const double m1_0 = rate_m1(s0, p.K);
  const double m1_m = rate_m1(r.s_m, p.K);
  r.q_tilde_0 = qssa_root(m1_0 / p.V, p.kappa);
  r.q_tilde_m = qssa_root(m1_m / p.V, p.kappa);
  r.theta0 = p.V * r.q_tilde_0 * rate_d_prime(r.q_tilde_0, p.kappa) / m1_0;
  r.theta_m = p.V * r.q_tilde_m * rate_d_prime(r.q_tilde_m, p.kappa) / m1_m;
  r.psi = (m1_m - p.V * p.kappa * r.q_tilde_m * r.q_tilde_m) / m1_m;

  // the three contributions to the averaged relaxation speed of pi
  r.t1 = 2.0 * r.q_tilde_m / (m1_0 * p.L);
  r.t2 = (2.0 / rate_m1_prime(s0, p.K)) * (r.q_tilde_m / r.q_tilde_0) * r.theta0;
  r.t3 = (2.0 / rate_m1_prime(r.s_m, p.K)) * (r.theta_m / r.psi);
  r.t_estimate = 1.0 / (1.0 / r.t1 + 1.0 / r.t2 + 1.0 / r.t3);
  r.t_bound = 2.0 * (p.K + 1.0) * (p.K + 1.0) /
              ((p.L / r.q_tilde_m) * (p.K + 1.0) + 0.75 * p.K);

  const double rho = percentile / 100.0;
  r.t_ref_exact = (4.0 / 3.0) * ((1.0 - rho) + p.K * std::log(1.0 / rho));
  r.t_ref_simple = (4.0 / 3.0) * (1.0 - rho) * (1.0 + p.K);

  const double c = 3.0 / (2.0 * (1.0 - rho));
  r.condition_full = p.L / r.q_tilde_m >= c - 0.75 * p.K / (p.K + 1.0);
  r.condition_simple = r.q_tilde_m <= p.L / c;
  r.kappa_bound =
      (c / (2.0 * p.L)) * (c / (p.L * p.V) - 1.0 / (1.0 + p.L / c));
  r.v_bound =
      1.0 / (2.0 * p.kappa * p.L * p.L / (c * c) + 1.0 / (1.0 + c / p.L));
  r.condition_kappa = p.kappa >= r.kappa_bound;
  r.condition_v = p.V >= r.v_bound;
  return r;
}

double regime_epsilon(const ModelParams& p, Regime regime) {
  p.validate();
  switch (regime) {
    case Regime::LargeL:
      return 1.0 / p.L;
    case Regime::LargeV:
      return 1.0 / p.V;
    case Regime::LargeKappa:
      if (!(p.kappa > 0.0))
        throw std::invalid_argument(
            "the large-kappa regime needs kappa > 0");
      return 1.0 / std::sqrt(p.kappa);
  }
  throw std::invalid_argument("unknown regime");
}

namespace {

// Shared slow right-hand sides over y = (s, p, f); s is clamped so stage
// values slightly past 0 stay evaluable.

void rhs_qssa0_l(const ModelParams& p, std::span<const double> y,
                 std::span<double> dy) {
  const double s = std::max(y[0], 0.0);
  const double m1 = rate_m1(s, p.K);
  const double qt = qssa_root(m1 / p.V, p.kappa);
  const double ta = p.kappa * qt * qt;
  dy[0] = -m1 + p.V * ta;
  dy[1] = p.V * (rate_m2(qt) + ta);
  dy[2] = m1 + p.V * rate_m2(qt);
}

void rhs_qssa1_l(const ModelParams& p, std::span<const double> y,
                 std::span<double> dy) {
  const double eps = 1.0 / p.L;
  const double s = std::max(y[0], 0.0);
  const double m1 = rate_m1(s, p.K);
  const double m1p = rate_m1_prime(s, p.K);
  const double qt = qssa_root(m1 / p.V, p.kappa);
  const double vdp = p.V * rate_d_prime(qt, p.kappa);
  const double sdot0 = -m1 + p.V * p.kappa * qt * qt;
  const double q1 = -m1p * sdot0 / (vdp * vdp);
  dy[0] = (1.0 - 2.0 * eps * qt * m1p / (vdp * vdp)) * sdot0;
  dy[1] = p.V * p.kappa * qt * qt + p.V * rate_m2(qt) +
          eps * p.V * (2.0 * p.kappa * qt + rate_m2_prime(qt)) * q1;
  dy[2] = m1 + p.V * rate_m2(qt) + eps * p.V * rate_m2_prime(qt) * q1;
}

void rhs_qssa1_v(const ModelParams& p, std::span<const double> y,
                 std::span<double> dy) {
  const double eps = 1.0 / p.V;
  const double s = std::max(y[0], 0.0);
  const double m1 = rate_m1(s, p.K);
  const double m1p = rate_m1_prime(s, p.K);
  const double cross = eps * m1p * m1 / p.L;
  const double ta = eps * p.kappa * m1 * m1;
  dy[0] = -m1 + ta;
  dy[1] = m1 + cross - ta;
  dy[2] = 2.0 * m1 + cross - 2.0 * ta;
}

void rhs_qssa1_kappa(const ModelParams& p, std::span<const double> y,
                     std::span<double> dy) {
  const double eps = 1.0 / std::sqrt(p.kappa);
  const double s = std::max(y[0], 0.0);
  const double m1 = rate_m1(s, p.K);
  const double m1p = rate_m1_prime(s, p.K);
  const double burst = std::sqrt(p.V * m1 / 8.0);
  const double drift = (m1p / (8.0 * p.L)) * std::sqrt(m1 / (2.0 * p.V));
  dy[0] = -0.5 * m1 - eps * burst + eps * drift;
  dy[1] = 0.5 * m1 + eps * burst + eps * drift;
  dy[2] = m1 + eps * std::sqrt(p.V * m1 / 2.0);
}

}  // namespace

VectorField reduced_vector_field(const ModelParams& p, ModelKind model) {
  p.validate();
  VectorField field;
  field.dim = 3;
  switch (model) {
    case ModelKind::Qssa0L:
      field.rhs = [p](double, std::span<const double> y, std::span<double> dy) {
        rhs_qssa0_l(p, y, dy);
      };
      break;
    case ModelKind::Qssa1L:
      field.rhs = [p](double, std::span<const double> y, std::span<double> dy) {
        rhs_qssa1_l(p, y, dy);
      };
      break;
    case ModelKind::Qssa1V:
      field.rhs = [p](double, std::span<const double> y, std::span<double> dy) {
        rhs_qssa1_v(p, y, dy);
      };
      break;
    case ModelKind::Qssa1Kappa:
      if (!(p.kappa > 0.0))
        throw std::invalid_argument(
            "the large-kappa reduced model needs kappa > 0");
      field.rhs = [p](double, std::span<const double> y, std::span<double> dy) {
        rhs_qssa1_kappa(p, y, dy);
      };
      break;
    case ModelKind::Full:
      throw std::invalid_argument("Full is not a reduced model");
  }
  return field;
}

double reconstruct_q(double s, const ModelParams& p, ModelKind model) {
  p.validate();
  if (!(s >= 0.0)) throw std::invalid_argument("s must be >= 0");
  switch (model) {
    case ModelKind::Qssa0L:
      return qssa_root(rate_m1(s, p.K) / p.V, p.kappa);
    case ModelKind::Qssa1L: {
      const double m1 = rate_m1(s, p.K);
      const double m1p = rate_m1_prime(s, p.K);
      const double qt = qssa_root(m1 / p.V, p.kappa);
      const double vdp = p.V * rate_d_prime(qt, p.kappa);
      const double sdot0 = -m1 + p.V * p.kappa * qt * qt;
      return qt - (1.0 / p.L) * m1p * sdot0 / (vdp * vdp);
    }
    case ModelKind::Qssa1V:
      return expansion_q_v(s, p, 2);
    case ModelKind::Qssa1Kappa:
      return expansion_q_kappa(s, p, 2);
    case ModelKind::Full:
      throw std::invalid_argument("Full has no reconstructed DG column");
  }
  throw std::invalid_argument("unknown model kind");
}

double expansion_q_v(double s, const ModelParams& p, int order) {
  p.validate();
  if (!(s >= 0.0)) throw std::invalid_argument("s must be >= 0");
  if (order < 0 || order > 3)
    throw std::invalid_argument("large-V expansion order must be in [0, 3]");
  const double m1 = rate_m1(s, p.K);
  const double m1p = rate_m1_prime(s, p.K);
  const double m1pp = rate_m1_second(s, p.K);
  const double tk = 2.0 * p.kappa - 1.0;
  double q = 0.0;
  if (order >= 1) q += m1 / p.V;
  if (order >= 2) q += (m1 / (p.V * p.V)) * (-tk * m1 + m1p / p.L);
  if (order >= 3)
    q += (m1 / (p.V * p.V * p.V)) *
         ((4.0 - 9.0 * p.kappa) * m1p * m1 / p.L + (2.0 * tk * tk - 1.0) * m1 * m1 +
          (m1pp * m1 + m1p * m1p) / (p.L * p.L));
  return q;
}

double expansion_q_kappa(double s, const ModelParams& p, int order) {
  p.validate();
  if (!(s >= 0.0)) throw std::invalid_argument("s must be >= 0");
  if (order < 0 || order > 2)
    throw std::invalid_argument(
        "large-kappa expansion order must be in [0, 2]");
  if (!(p.kappa > 0.0))
    throw std::invalid_argument("large-kappa expansion needs kappa > 0");
  const double m1 = rate_m1(s, p.K);
  const double m1p = rate_m1_prime(s, p.K);
  double q = 0.0;
  if (order >= 1) q += std::sqrt(m1 / (2.0 * p.V * p.kappa));
  if (order >= 2) q += (1.0 / p.kappa) * (m1p / (16.0 * p.L * p.V) - 0.25);
  return q;
}

}  // namespace lipokin
