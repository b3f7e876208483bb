#include "lipokin/sweep.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lipokin/io.hpp"
#include "lipokin/kinetics.hpp"
#include "lipokin/simulate.hpp"

namespace lipokin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string percent_tag(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", percent);
  return buf;
}

EventSpec threshold_event(const ThresholdTarget& target, const ModelParams& p,
                          std::string label) {
  const double rho = target.percent / 100.0;
  switch (target.kind) {
    case ThresholdTarget::Kind::S: {
      const double level = 1.0 - rho;  // s starts at 1 and decays
      return {std::move(label),
              [level](double, std::span<const double> y) {
                return y[0] - level;
              },
              -1};
    }
    case ThresholdTarget::Kind::P: {
      const double level = rho * (1.0 + p.q0 / p.L);  // share of equilibrium MG
      return {std::move(label),
              [level](double, std::span<const double> y) {
                return y[2] - level;
              },
              +1};
    }
    case ThresholdTarget::Kind::F: {
      const double level = rho * (2.0 + p.q0 / p.L);  // share of equilibrium FA
      return {std::move(label),
              [level](double, std::span<const double> y) {
                return y[3] - level;
              },
              +1};
    }
  }
  throw std::invalid_argument("unknown threshold kind");
}

// Crossing times (and states) of a batch of thresholds from one integration.
struct CellTimes {
  bool failed = false;
  std::string error;
  std::vector<double> time;     // one per target, NaN when not reached
  std::vector<double> q_cross;  // DG level at the crossing, NaN likewise
};

CellTimes integrate_cell(const ModelParams& p,
                         const std::vector<ThresholdTarget>& targets,
                         const IntegratorConfig& cfg) {
  CellTimes cell;
  cell.time.assign(targets.size(), kNaN);
  cell.q_cross.assign(targets.size(), kNaN);
  std::vector<EventSpec> events;
  events.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    events.push_back(threshold_event(targets[i], p, "thr" + std::to_string(i)));

  IntegratorConfig run_cfg = cfg;
  run_cfg.store_trajectory = false;
  run_cfg.stop_after_events = true;
  try {
    const std::vector<double> y0 = {1.0, p.q0, 0.0, 0.0};
    const Solution sol = integrate(full_vector_field(p), y0, run_cfg, events);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (const EventRecord* ev = sol.find_event("thr" + std::to_string(i))) {
        cell.time[i] = ev->time;
        cell.q_cross[i] = ev->state[1];
      }
    }
  } catch (const std::exception& e) {
    cell.failed = true;
    cell.error = e.what();
  }
  return cell;
}

MetricOutcome not_ok(CellStatus status) { return {status, kNaN}; }

// Deterministic worker pool: tasks are claimed by atomic index and write
// results into preallocated slots, so the assembled output is independent of
// the thread count.
void run_indexed(std::size_t count, unsigned threads,
                 const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      task(i);
    }
  };
  const unsigned n = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

void ThresholdTarget::validate() const {
  if (!(percent > 0.0 && percent < 100.0))
    throw std::invalid_argument("threshold percent must lie in (0, 100)");
}

const char* cell_status_name(CellStatus s) {
  switch (s) {
    case CellStatus::Ok:
      return "ok";
    case CellStatus::NotReached:
      return "not_reached";
    case CellStatus::BaselineNotReached:
      return "baseline_not_reached";
    case CellStatus::Failed:
      return "failed";
  }
  return "unknown";
}

MetricOutcome time_to_threshold(const ModelParams& p,
                                const ThresholdTarget& target,
                                const IntegratorConfig& cfg) {
  p.validate();
  target.validate();
  const CellTimes cell = integrate_cell(p, {target}, cfg);
  if (cell.failed) return not_ok(CellStatus::Failed);
  if (std::isnan(cell.time[0])) return not_ok(CellStatus::NotReached);
  return {CellStatus::Ok, cell.time[0]};
}

MetricOutcome relative_change(const ModelParams& p,
                              const ThresholdTarget& target,
                              const IntegratorConfig& cfg) {
  ModelParams base = p;
  base.kappa = 0.0;
  const MetricOutcome t0 = time_to_threshold(base, target, cfg);
  if (t0.status == CellStatus::Failed) return not_ok(CellStatus::Failed);
  if (t0.status != CellStatus::Ok)
    return not_ok(CellStatus::BaselineNotReached);
  const MetricOutcome tk = time_to_threshold(p, target, cfg);
  if (tk.status != CellStatus::Ok) return not_ok(tk.status);
  return {CellStatus::Ok, (tk.value - t0.value) / t0.value};
}

MetricOutcome fraction_at_threshold(const ModelParams& p,
                                    const ThresholdTarget& target,
                                    const IntegratorConfig& cfg) {
  p.validate();
  target.validate();
  const CellTimes cell = integrate_cell(p, {target}, cfg);
  if (cell.failed) return not_ok(CellStatus::Failed);
  if (std::isnan(cell.q_cross[0])) return not_ok(CellStatus::NotReached);
  return {CellStatus::Ok,
          transacylation_fraction(std::max(cell.q_cross[0], 0.0), p.kappa)};
}

const char* metric_stem(Metric m) {
  switch (m) {
    case Metric::TimeS:
      return "time_s";
    case Metric::TimeP:
      return "time_p";
    case Metric::TimeF:
      return "time_f";
    case Metric::TaFraction:
      return "ta_fraction";
    case Metric::RelChangeS:
      return "rel_change_s";
    case Metric::RelChangeP:
      return "rel_change_p";
    case Metric::RelChangeF:
      return "rel_change_f";
  }
  return "unknown";
}

std::string metric_name(Metric m, double threshold_percent) {
  return std::string(metric_stem(m)) + "_" + percent_tag(threshold_percent);
}

std::vector<double> SweepGrid::log_spaced(double log10_lo, double log10_hi,
                                          std::size_t count) {
  if (count == 0) throw std::invalid_argument("count must be > 0");
  std::vector<double> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back(std::pow(10.0, log10_lo));
    return out;
  }
  const double step = (log10_hi - log10_lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(std::pow(10.0, log10_lo + step * static_cast<double>(i)));
  return out;
}

void SweepGrid::validate() const {
  if (v_values.empty() || kappa_values.empty())
    throw std::invalid_argument("sweep grid axes must be nonempty");
  for (double v : v_values)
    if (!(v > 0.0)) throw std::invalid_argument("grid V values must be > 0");
  for (double k : kappa_values)
    if (!(k >= 0.0))
      throw std::invalid_argument("grid kappa values must be >= 0");
  if (!(K > 0.0) || !(L > 0.0))
    throw std::invalid_argument("grid K and L must be > 0");
  if (!(q0 >= 0.0)) throw std::invalid_argument("grid q0 must be >= 0");
  if (thresholds.empty())
    throw std::invalid_argument("at least one threshold is required");
  for (double t : thresholds) ThresholdTarget{{}, t}.validate();
}

SweepResult run_sweep(const SweepGrid& grid, const std::vector<Metric>& metrics,
                      const IntegratorConfig& cfg, unsigned threads) {
  grid.validate();
  cfg.validate();
  if (metrics.empty()) throw std::invalid_argument("no metrics requested");

  const std::size_t nv = grid.v_values.size();
  const std::size_t nk = grid.kappa_values.size();
  const std::size_t nt = grid.thresholds.size();

  // every cell integrates once against the S/P/F events of every threshold
  std::vector<ThresholdTarget> targets;
  targets.reserve(3 * nt);
  for (double pct : grid.thresholds) {
    targets.push_back({ThresholdTarget::Kind::S, pct});
    targets.push_back({ThresholdTarget::Kind::P, pct});
    targets.push_back({ThresholdTarget::Kind::F, pct});
  }

  bool needs_baseline = false;
  for (Metric m : metrics)
    needs_baseline |= m == Metric::RelChangeS || m == Metric::RelChangeP ||
                      m == Metric::RelChangeF;

  auto cell_params = [&grid](double v, double kappa) {
    ModelParams p;
    p.K = grid.K;
    p.L = grid.L;
    p.V = v;
    p.kappa = kappa;
    p.q0 = grid.q0;
    return p;
  };

  // kappa = 0 baselines, one per V column
  std::vector<CellTimes> baselines(needs_baseline ? nv : 0);
  if (needs_baseline)
    run_indexed(nv, threads, [&](std::size_t iv) {
      baselines[iv] = integrate_cell(cell_params(grid.v_values[iv], 0.0),
                                     targets, cfg);
    });

  std::vector<CellTimes> cells(nv * nk);
  run_indexed(nv * nk, threads, [&](std::size_t c) {
    const std::size_t iv = c % nv;
    const std::size_t ik = c / nv;
    cells[c] = integrate_cell(
        cell_params(grid.v_values[iv], grid.kappa_values[ik]), targets, cfg);
  });

  SweepResult res;
  res.grid = grid;
  res.cfg = cfg;
  for (std::size_t iv = 0; needs_baseline && iv < nv; ++iv)
    if (baselines[iv].failed) {
      std::ostringstream msg;
      msg << "iv=" << iv << ",baseline: " << baselines[iv].error;
      res.cell_errors.push_back(msg.str());
      ++res.cells_failed;
    }
  for (std::size_t c = 0; c < nv * nk; ++c)
    if (cells[c].failed) {
      std::ostringstream msg;
      msg << "iv=" << c % nv << ",ik=" << c / nv << ": " << cells[c].error;
      res.cell_errors.push_back(msg.str());
      ++res.cells_failed;
    }

  // index of target (kind, threshold it) in the flat event batch
  auto target_index = [](Metric m, std::size_t it) {
    switch (m) {
      case Metric::TimeS:
      case Metric::TaFraction:
      case Metric::RelChangeS:
        return 3 * it + 0;
      case Metric::TimeP:
      case Metric::RelChangeP:
        return 3 * it + 1;
      default:
        return 3 * it + 2;  // TimeF, RelChangeF
    }
  };

  for (Metric m : metrics) {
    const bool is_rel = m == Metric::RelChangeS || m == Metric::RelChangeP ||
                        m == Metric::RelChangeF;
    for (std::size_t it = 0; it < nt; ++it) {
      MetricMap map;
      map.metric = m;
      map.threshold = grid.thresholds[it];
      map.values.assign(nv * nk, kNaN);
      map.status.assign(nv * nk, CellStatus::Ok);
      const std::size_t ti = target_index(m, it);
      for (std::size_t c = 0; c < nv * nk; ++c) {
        const std::size_t iv = c % nv;
        const CellTimes& cell = cells[c];
        auto put = [&](MetricOutcome out) {
          map.values[c] = out.value;
          map.status[c] = out.status;
        };
        if (cell.failed) {
          put(not_ok(CellStatus::Failed));
          continue;
        }
        if (is_rel && baselines[iv].failed) {
          put(not_ok(CellStatus::Failed));
          continue;
        }
        if (is_rel && std::isnan(baselines[iv].time[ti])) {
          put(not_ok(CellStatus::BaselineNotReached));
          continue;
        }
        if (std::isnan(cell.time[ti])) {
          put(not_ok(CellStatus::NotReached));
          continue;
        }
        if (m == Metric::TaFraction) {
          put({CellStatus::Ok,
               transacylation_fraction(std::max(cell.q_cross[ti], 0.0),
                                       grid.kappa_values[c / nv])});
        } else if (is_rel) {
          const double t0 = baselines[iv].time[ti];
          put({CellStatus::Ok, (cell.time[ti] - t0) / t0});
        } else {
          put({CellStatus::Ok, cell.time[ti]});
        }
      }
      res.maps.push_back(std::move(map));
    }
  }
  return res;
}

StagedCurves staged_relative_changes(const ModelParams& base,
                                     const std::vector<double>& v_values,
                                     const std::vector<double>& x_values,
                                     const IntegratorConfig& cfg,
                                     unsigned threads) {
  base.validate();
  cfg.validate();
  if (v_values.empty() || x_values.empty())
    throw std::invalid_argument("staged curves need V and x values");
  for (double v : v_values)
    if (!(v > 0.0)) throw std::invalid_argument("V values must be > 0");

  const std::size_t nv = v_values.size();
  const std::size_t nx = x_values.size();

  // stage x pairs x% TG processing with the complementary (100-x)% share of
  // the MG/FA products, so early TG stages probe early product formation
  std::vector<ThresholdTarget> targets;
  targets.reserve(3 * nx);
  for (double x : x_values) {
    ThresholdTarget s{ThresholdTarget::Kind::S, x};
    ThresholdTarget p{ThresholdTarget::Kind::P, 100.0 - x};
    ThresholdTarget f{ThresholdTarget::Kind::F, 100.0 - x};
    s.validate();
    p.validate();
    f.validate();
    targets.push_back(s);
    targets.push_back(p);
    targets.push_back(f);
  }

  std::vector<CellTimes> cells(nv), baselines(nv);
  run_indexed(nv, threads, [&](std::size_t iv) {
    ModelParams p = base;
    p.V = v_values[iv];
    baselines[iv] = integrate_cell([&] {
      ModelParams b = p;
      b.kappa = 0.0;
      return b;
    }(), targets, cfg);
    cells[iv] = integrate_cell(p, targets, cfg);
  });

  StagedCurves out;
  out.v_values = v_values;
  out.x_values = x_values;
  out.rel_s.assign(nx * nv, kNaN);
  out.rel_p.assign(nx * nv, kNaN);
  out.rel_f.assign(nx * nv, kNaN);
  out.status_s.assign(nx * nv, CellStatus::Ok);
  out.status_p.assign(nx * nv, CellStatus::Ok);
  out.status_f.assign(nx * nv, CellStatus::Ok);

  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iv = 0; iv < nv; ++iv) {
      const std::size_t slot = ix * nv + iv;
      auto fill = [&](std::size_t ti, std::vector<double>& rel,
                      std::vector<CellStatus>& status) {
        if (cells[iv].failed || baselines[iv].failed) {
          status[slot] = CellStatus::Failed;
          return;
        }
        const double t0 = baselines[iv].time[ti];
        const double tk = cells[iv].time[ti];
        if (std::isnan(t0)) {
          status[slot] = CellStatus::BaselineNotReached;
          return;
        }
        if (std::isnan(tk)) {
          status[slot] = CellStatus::NotReached;
          return;
        }
        rel[slot] = (tk - t0) / t0;
      };
      fill(3 * ix + 0, out.rel_s, out.status_s);
      fill(3 * ix + 1, out.rel_p, out.status_p);
      fill(3 * ix + 2, out.rel_f, out.status_f);
    }
  }
  return out;
}

void write_metric_map_csv(std::ostream& os, const SweepResult& res,
                          std::size_t map_index) {
  if (map_index >= res.maps.size())
    throw std::out_of_range("map index out of range");
  const MetricMap& map = res.maps[map_index];
  const std::size_t nv = res.grid.v_values.size();
  const std::size_t nk = res.grid.kappa_values.size();
  os << "log10_V,log10_kappa,value,status\n";
  for (std::size_t ik = 0; ik < nk; ++ik)
    for (std::size_t iv = 0; iv < nv; ++iv) {
      const std::size_t c = ik * nv + iv;
      os << format_g17(std::log10(res.grid.v_values[iv])) << ','
         << format_g17(std::log10(res.grid.kappa_values[ik])) << ','
         << format_g17(map.values[c]) << ',' << cell_status_name(map.status[c])
         << '\n';
    }
}

void write_staged_curves_csv(std::ostream& os, const StagedCurves& curves) {
  const std::size_t nv = curves.v_values.size();
  const std::size_t nx = curves.x_values.size();
  os << "x_percent,log10_V,rel_change_s,rel_change_p,rel_change_f,"
        "status_s,status_p,status_f\n";
  for (std::size_t ix = 0; ix < nx; ++ix)
    for (std::size_t iv = 0; iv < nv; ++iv) {
      const std::size_t c = ix * nv + iv;
      os << format_g17(curves.x_values[ix]) << ','
         << format_g17(std::log10(curves.v_values[iv])) << ','
         << format_g17(curves.rel_s[c]) << ',' << format_g17(curves.rel_p[c])
         << ',' << format_g17(curves.rel_f[c]) << ','
         << cell_status_name(curves.status_s[c]) << ','
         << cell_status_name(curves.status_p[c]) << ','
         << cell_status_name(curves.status_f[c]) << '\n';
    }
}

}  // namespace lipokin
