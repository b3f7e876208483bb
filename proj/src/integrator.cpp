#include "lipokin/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace lipokin {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSqrt2 = 1.4142135623730951;
// Linearly implicit 2(3) pair: stage constant and error-stage weight.
constexpr double kRosD = 1.0 / (2.0 + kSqrt2);
constexpr double kRosE32 = 6.0 + kSqrt2;

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double rms(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return v.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(v.size()));
}

// Dense LU with partial pivoting; the systems here are at most 8-dim.
class DenseLU {
public:
  explicit DenseLU(std::size_t n) : n_(n), a_(n * n), piv_(n) {}

  bool factor(const double* m) {
    std::memcpy(a_.data(), m, n_ * n_ * sizeof(double));
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t imax = k;
      double amax = std::abs(a_[k * n_ + k]);
      for (std::size_t i = k + 1; i < n_; ++i) {
        const double v = std::abs(a_[i * n_ + k]);
        if (v > amax) {
          amax = v;
          imax = i;
        }
      }
      if (!(amax > 0.0) || !std::isfinite(amax)) return false;
      piv_[k] = imax;
      if (imax != k)
        for (std::size_t j = 0; j < n_; ++j)
          std::swap(a_[k * n_ + j], a_[imax * n_ + j]);
      const double inv = 1.0 / a_[k * n_ + k];
      for (std::size_t i = k + 1; i < n_; ++i) {
        const double l = a_[i * n_ + k] * inv;
        a_[i * n_ + k] = l;
        for (std::size_t j = k + 1; j < n_; ++j)
          a_[i * n_ + j] -= l * a_[k * n_ + j];
      }
    }
    return true;
  }

  void solve(double* b) const {
    for (std::size_t k = 0; k < n_; ++k) {
      if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
      for (std::size_t i = k + 1; i < n_; ++i) b[i] -= a_[i * n_ + k] * b[k];
    }
    for (std::size_t i = n_; i-- > 0;) {
      for (std::size_t j = i + 1; j < n_; ++j) b[i] -= a_[i * n_ + j] * b[j];
      b[i] /= a_[i * n_ + i];
    }
  }

private:
  std::size_t n_;
  std::vector<double> a_;
  std::vector<std::size_t> piv_;
};

void hermite_sample(double t0, const double* y0, const double* f0, double t1,
                    const double* y1, const double* f1, double t, std::size_t n,
                    double* out) {
  const double h = t1 - t0;
  if (h == 0.0) {
    std::memcpy(out, y1, n * sizeof(double));
    return;
  }
  const double u = (t - t0) / h;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
  const double h10 = u3 - 2.0 * u2 + u;
  const double h01 = -2.0 * u3 + 3.0 * u2;
  const double h11 = u3 - u2;
  for (std::size_t i = 0; i < n; ++i)
    out[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
}

// Forward finite-difference Jacobian, row-major.
void fd_jacobian(const VectorField& f, double t, std::span<const double> y,
                 std::span<const double> f0, std::vector<double>& yd,
                 std::vector<double>& fd, double* jac) {
  const std::size_t n = f.dim;
  yd.assign(y.begin(), y.end());
  for (std::size_t j = 0; j < n; ++j) {
    const double delta = std::sqrt(kEps) * std::max(std::abs(y[j]), 1e-3);
    const double saved = yd[j];
    yd[j] = saved + delta;
    f.rhs(t, yd, fd);
    const double inv = 1.0 / (yd[j] - saved);  // exact step after rounding
    for (std::size_t i = 0; i < n; ++i) jac[i * n + j] = (fd[i] - f0[i]) * inv;
    yd[j] = saved;
  }
}

struct StepWork {
  std::vector<double> jac, w, k1, k2, k3, stage, fs1, fs2, err;
  std::vector<double> yd, fdiff;                      // FD Jacobian scratch
  std::vector<double> d2, d3, d4, d5, d6;             // explicit stages
  explicit StepWork(std::size_t n)
      : jac(n * n), w(n * n), k1(n), k2(n), k3(n), stage(n), fs1(n), fs2(n),
        err(n), yd(n), fdiff(n), d2(n), d3(n), d4(n), d5(n), d6(n) {}
};

// One linearly implicit 2(3) step. Returns false when the step cannot be
// evaluated (singular W or non-finite stage); such steps are rejected.
bool ros23_step(const VectorField& f, double t, std::span<const double> y,
                std::span<const double> f0, double h, StepWork& wk,
                DenseLU& lu, std::vector<double>& y1, std::vector<double>& f1) {
  const std::size_t n = f.dim;
  if (f.jacobian)
    f.jacobian(t, y, wk.jac);
  else
    fd_jacobian(f, t, y, f0, wk.yd, wk.fdiff, wk.jac.data());
  if (!all_finite(wk.jac)) return false;

  const double hd = h * kRosD;
  for (std::size_t i = 0; i < n * n; ++i) wk.w[i] = -hd * wk.jac[i];
  for (std::size_t i = 0; i < n; ++i) wk.w[i * n + i] += 1.0;
  if (!lu.factor(wk.w.data())) return false;

  std::copy(f0.begin(), f0.end(), wk.k1.begin());
  lu.solve(wk.k1.data());

  for (std::size_t i = 0; i < n; ++i) wk.stage[i] = y[i] + 0.5 * h * wk.k1[i];
  f.rhs(t + 0.5 * h, wk.stage, wk.fs1);
  if (!all_finite(wk.fs1)) return false;

  for (std::size_t i = 0; i < n; ++i) wk.k2[i] = wk.fs1[i] - wk.k1[i];
  lu.solve(wk.k2.data());
  for (std::size_t i = 0; i < n; ++i) wk.k2[i] += wk.k1[i];

  for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + h * wk.k2[i];
  f.rhs(t + h, y1, wk.fs2);
  if (!all_finite(wk.fs2)) return false;

  for (std::size_t i = 0; i < n; ++i)
    wk.k3[i] = wk.fs2[i] - kRosE32 * (wk.k2[i] - wk.fs1[i]) -
               2.0 * (wk.k1[i] - f0[i]);
  lu.solve(wk.k3.data());

  for (std::size_t i = 0; i < n; ++i)
    wk.err[i] = (h / 6.0) * (wk.k1[i] - 2.0 * wk.k2[i] + wk.k3[i]);
  std::copy(wk.fs2.begin(), wk.fs2.end(), f1.begin());
  return true;
}

// One explicit 4(5) step (first-same-as-last; k1 = f0, f1 = stage 7).
bool dopri45_step(const VectorField& f, double t, std::span<const double> y,
                  std::span<const double> f0, double h, StepWork& wk,
                  std::vector<double>& y1, std::vector<double>& f1) {
  const std::size_t n = f.dim;
  const double* k1 = f0.data();
  double* k2 = wk.d2.data();
  double* k3 = wk.d3.data();
  double* k4 = wk.d4.data();
  double* k5 = wk.d5.data();
  double* k6 = wk.d6.data();
  auto& st = wk.stage;

  for (std::size_t i = 0; i < n; ++i) st[i] = y[i] + h * (1.0 / 5.0) * k1[i];
  f.rhs(t + h / 5.0, st, wk.fs1);
  if (!all_finite(wk.fs1)) return false;
  std::memcpy(k2, wk.fs1.data(), n * sizeof(double));

  for (std::size_t i = 0; i < n; ++i)
    st[i] = y[i] + h * (3.0 / 40.0 * k1[i] + 9.0 / 40.0 * k2[i]);
  f.rhs(t + 3.0 * h / 10.0, st, wk.fs1);
  if (!all_finite(wk.fs1)) return false;
  std::memcpy(k3, wk.fs1.data(), n * sizeof(double));

  for (std::size_t i = 0; i < n; ++i)
    st[i] = y[i] + h * (44.0 / 45.0 * k1[i] - 56.0 / 15.0 * k2[i] +
                        32.0 / 9.0 * k3[i]);
  f.rhs(t + 4.0 * h / 5.0, st, wk.fs1);
  if (!all_finite(wk.fs1)) return false;
  std::memcpy(k4, wk.fs1.data(), n * sizeof(double));

  for (std::size_t i = 0; i < n; ++i)
    st[i] = y[i] + h * (19372.0 / 6561.0 * k1[i] - 25360.0 / 2187.0 * k2[i] +
                        64448.0 / 6561.0 * k3[i] - 212.0 / 729.0 * k4[i]);
  f.rhs(t + 8.0 * h / 9.0, st, wk.fs1);
  if (!all_finite(wk.fs1)) return false;
  std::memcpy(k5, wk.fs1.data(), n * sizeof(double));

  for (std::size_t i = 0; i < n; ++i)
    st[i] = y[i] + h * (9017.0 / 3168.0 * k1[i] - 355.0 / 33.0 * k2[i] +
                        46732.0 / 5247.0 * k3[i] + 49.0 / 176.0 * k4[i] -
                        5103.0 / 18656.0 * k5[i]);
  f.rhs(t + h, st, wk.fs1);
  if (!all_finite(wk.fs1)) return false;
  std::memcpy(k6, wk.fs1.data(), n * sizeof(double));

  for (std::size_t i = 0; i < n; ++i)
    y1[i] = y[i] + h * (35.0 / 384.0 * k1[i] + 500.0 / 1113.0 * k3[i] +
                        125.0 / 192.0 * k4[i] - 2187.0 / 6784.0 * k5[i] +
                        11.0 / 84.0 * k6[i]);
  f.rhs(t + h, y1, f1);
  if (!all_finite(f1)) return false;

  // difference of the 5th- and 4th-order weights
  for (std::size_t i = 0; i < n; ++i)
    wk.err[i] = h * (71.0 / 57600.0 * k1[i] - 71.0 / 16695.0 * k3[i] +
                     71.0 / 1920.0 * k4[i] - 17253.0 / 339200.0 * k5[i] +
                     22.0 / 525.0 * k6[i] - 1.0 / 40.0 * f1[i]);
  return true;
}

double error_norm(std::span<const double> err, std::span<const double> y0,
                  std::span<const double> y1, double rtol, double atol) {
  double acc = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double w = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double e = err[i] / w;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

bool crossing(double g0, double g1, int direction) {
  const bool up = g0 < 0.0 && g1 >= 0.0;
  const bool down = g0 > 0.0 && g1 <= 0.0;
  if (direction > 0) return up;
  if (direction < 0) return down;
  return up || down;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0))
    throw std::invalid_argument("rtol and atol must be > 0");
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
  if (max_steps == 0) throw std::invalid_argument("max_steps must be > 0");
  if (initial_step < 0.0)
    throw std::invalid_argument("initial_step must be >= 0");
  if (fixed_step && !(initial_step > 0.0))
    throw std::invalid_argument("fixed_step requires initial_step > 0");
}

void Solution::sample_into(double t, std::span<double> out) const {
  if (size() == 0) throw std::out_of_range("empty solution");
  if (t <= times.front()) {
    std::copy_n(states.data(), dim, out.begin());
    return;
  }
  if (t >= times.back()) {
    std::copy_n(states.data() + (size() - 1) * dim, dim, out.begin());
    return;
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  hermite_sample(times[lo], states.data() + lo * dim, derivs.data() + lo * dim,
                 times[hi], states.data() + hi * dim, derivs.data() + hi * dim,
                 t, dim, out.data());
}

std::vector<double> Solution::sample(double t) const {
  std::vector<double> out(dim);
  sample_into(t, out);
  return out;
}

const EventRecord* Solution::find_event(std::string_view label) const {
  for (const auto& ev : events)
    if (ev.label == label) return &ev;
  return nullptr;
}

Solution integrate(const VectorField& f, std::span<const double> y0,
                   const IntegratorConfig& cfg,
                   std::span<const EventSpec> events,
                   const StopCondition& stop) {
  cfg.validate();
  if (f.dim == 0 || !f.rhs)
    throw std::invalid_argument("vector field has no dimension or rhs");
  if (y0.size() != f.dim)
    throw std::invalid_argument("initial state dimension mismatch");
  for (const auto& ev : events)
    if (!ev.target) throw std::invalid_argument("event target missing");

  const std::size_t n = f.dim;
  const bool ros = cfg.method == Method::Rosenbrock23;
  const double err_exp = ros ? 1.0 / 3.0 : 1.0 / 5.0;

  Solution sol;
  sol.dim = n;

  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> fy(n), y1(n), f1(n);
  double t = 0.0;
  f.rhs(t, y, fy);
  if (!all_finite(y) || !all_finite(fy))
    throw IntegrationError("non-finite initial state or right-hand side", t, y);

  auto push_point = [&](double tp, const std::vector<double>& yp,
                        const std::vector<double>& fp) {
    if (!cfg.store_trajectory && sol.times.size() >= 2) {
      sol.times.back() = tp;
      std::copy(yp.begin(), yp.end(), sol.states.end() - n);
      std::copy(fp.begin(), fp.end(), sol.derivs.end() - n);
      return;
    }
    sol.times.push_back(tp);
    sol.states.insert(sol.states.end(), yp.begin(), yp.end());
    sol.derivs.insert(sol.derivs.end(), fp.begin(), fp.end());
  };
  push_point(t, y, fy);

  std::vector<double> gprev(events.size());
  std::vector<char> fired(events.size(), 0);
  for (std::size_t i = 0; i < events.size(); ++i)
    gprev[i] = events[i].target(t, y);
  auto all_fired = [&] {
    for (char c : fired)
      if (!c) return false;
    return true;
  };

  double h = cfg.initial_step;
  if (h <= 0.0) {
    // conservative start; the controller expands it quickly
    const double dy = rms(y), df = rms(fy);
    h = std::clamp(0.01 * (1.0 + dy) / (1.0 + df), 1e-8, 0.1 * cfg.t_end);
  }
  h = std::min(h, cfg.t_end);

  StepWork wk(n);
  DenseLU lu(n);
  std::vector<double> ev_state(n);

  while (t < cfg.t_end) {
    if (sol.steps_accepted + sol.steps_rejected >= cfg.max_steps)
      throw IntegrationError("step budget exhausted", t, y);

    bool final_snap = false;
    if (t + h >= cfg.t_end) {
      h = cfg.t_end - t;
      final_snap = true;
    }
    const double hmin = 16.0 * kEps * std::max(1.0, std::abs(t));
    if (!final_snap && !cfg.fixed_step && h < hmin)
      throw IntegrationError("step size underflow", t, y);
    if (h <= 0.0) break;

    const bool usable =
        ros ? ros23_step(f, t, y, fy, h, wk, lu, y1, f1)
            : dopri45_step(f, t, y, fy, h, wk, y1, f1);
    double enorm = std::numeric_limits<double>::infinity();
    if (usable && all_finite(y1))
      enorm = error_norm(wk.err, y, y1, cfg.rtol, cfg.atol);

    const bool accept = cfg.fixed_step || (std::isfinite(enorm) && enorm <= 1.0);
    if (!accept) {
      ++sol.steps_rejected;
      if (!std::isfinite(enorm))
        h *= 0.5;
      else
        h *= std::clamp(0.9 * std::pow(enorm, -err_exp), 0.1, 0.5);
      continue;
    }

    const double t1 = t + h;

    // locate and record event crossings inside [t, t1]
    struct Hit {
      double time;
      std::size_t idx;
    };
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double g1 = events[i].target(t1, y1);
      if (crossing(gprev[i], g1, events[i].direction)) {
        double lo = t, hi = t1, glo = gprev[i];
        const double tol_t =
            std::max(1e-13 * std::max(1.0, std::abs(t1)), 4.0 * kEps * t1);
        while (hi - lo > tol_t) {
          const double mid = 0.5 * (lo + hi);
          hermite_sample(t, y.data(), fy.data(), t1, y1.data(), f1.data(), mid,
                         n, ev_state.data());
          const double gm = events[i].target(mid, ev_state);
          if (crossing(glo, gm, events[i].direction)) {
            hi = mid;
          } else {
            lo = mid;
            glo = gm;
          }
        }
        hits.push_back({hi, i});
        fired[i] = 1;
      }
      gprev[i] = g1;
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
      return a.time < b.time || (a.time == b.time && a.idx < b.idx);
    });
    for (const auto& hit : hits) {
      hermite_sample(t, y.data(), fy.data(), t1, y1.data(), f1.data(), hit.time,
                     n, ev_state.data());
      sol.events.push_back({events[hit.idx].label, hit.time, ev_state});
    }

    push_point(t1, y1, f1);
    ++sol.steps_accepted;
    t = t1;
    y.swap(y1);
    fy.swap(f1);

    const bool resolved = events.empty() || all_fired();
    if (stop && resolved && stop(t, y)) {
      sol.reason = StopReason::SteadyState;
      return sol;
    }
    if (cfg.stop_after_events && !events.empty() && all_fired()) {
      sol.reason = StopReason::AllEventsFired;
      return sol;
    }

    if (!cfg.fixed_step) {
      const double fac =
          enorm > 0.0 ? 0.9 * std::pow(enorm, -err_exp)
                      : 5.0;
      h *= std::clamp(fac, 0.2, 5.0);
    }
  }

  sol.reason = StopReason::ReachedEnd;
  return sol;
}

double stiffness_probe(const VectorField& f, std::span<const double> y,
                       double h) {
  if (f.dim == 0 || !f.rhs)
    throw std::invalid_argument("vector field has no dimension or rhs");
  if (y.size() != f.dim)
    throw std::invalid_argument("state dimension mismatch");
  if (!(h > 0.0)) throw std::invalid_argument("h must be > 0");

  const std::size_t n = f.dim;
  std::vector<double> jac(n * n), f0(n), yd(n), fd(n);
  f.rhs(0.0, y, f0);
  if (f.jacobian)
    f.jacobian(0.0, y, jac);
  else
    fd_jacobian(f, 0.0, y, f0, yd, fd, jac.data());

  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), w(n);
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    double nw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += jac[i * n + j] * v[j];
      w[i] = acc;
      nw += acc * acc;
    }
    nw = std::sqrt(nw);
    if (nw < 1e-300) return 0.0;
    lambda = nw;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  return h * lambda;
}

}  // namespace lipokin
