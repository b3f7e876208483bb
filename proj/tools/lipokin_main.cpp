// lipokin: simulate and analyze the TG -> DG -> MG hydrolysis chain with
// DG transacylation.
//
// Subcommands: simulate, qssa, asymptotics, sensitivity, timescales, sweep.
// Parameters come either from the dimensionless flags (--K --L --V --kappa
// --q0) or from a dimensional constants file (--dimensional-file); mixing
// the two is an error. --dump-config prints the fully resolved settings as
// JSON; feeding that back through --config reproduces the run exactly.
//
// Exit codes: 0 success, 2 invocation/parameter error, 3 runtime failure,
// 4 sweep finished with failed cells (partial output written).

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lipokin/errors.hpp"
#include "lipokin/integrator.hpp"
#include "lipokin/io.hpp"
#include "lipokin/kinetics.hpp"
#include "lipokin/params.hpp"
#include "lipokin/qssa.hpp"
#include "lipokin/sensitivity.hpp"
#include "lipokin/simulate.hpp"
#include "lipokin/sweep.hpp"

using nlohmann::ordered_json;
using namespace lipokin;

namespace {

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

struct Options {
  // model parameters (dimensionless block)
  double K = 1.0, L = 1.0, V = 1.0, kappa = 1.0, q0 = 0.0;
  std::string dimensional_file;
  std::string dimensional_source;  // informational, survives config dumps
  std::string config_file;

  // integrator
  double t_end = -1.0;  // -1 = per-command default
  double rtol = 1e-8;
  double atol = 1e-10;
  std::size_t max_steps = 5'000'000;
  std::string method = "rosenbrock23";

  // output
  std::string out;  // empty = stdout (table commands)
  std::string format = "csv";
  unsigned threads = 1;
  bool dump_config = false;

  // simulate / asymptotics
  std::string model = "full";

  // qssa table
  double s_lo = 0.01, s_hi = 1.0;
  std::size_t s_count = 100;

  // asymptotics
  std::size_t samples = 400;
  double window_factor = 3.0;

  // sensitivity
  bool fd_check = false;
  std::size_t sens_samples = 200;

  // timescales
  double percentile = 90.0;

  // sweep
  std::string v_log10 = "-2:2:9";
  std::string kappa_log10 = "-2:2:9";
  bool kappa_zero = false;
  std::string metrics = "all";
  double threshold = 50.0;
  std::string staged_x;  // comma list; nonempty selects staged mode
  bool gnuplot = false;
};

int fail(int code, const std::string& type, const std::string& message) {
  ordered_json e;
  e["error"] = {{"type", type}, {"message", message}};
  std::cerr << e.dump() << "\n";
  return code;
}

// ---------------------------------------------------------------------------
// Config file handling (defaults -> --config file -> explicit flags)
// ---------------------------------------------------------------------------

double jnum(const ordered_json& v) {
  if (v.is_string()) return std::strtod(v.get<std::string>().c_str(), nullptr);
  return v.get<double>();
}

template <class T>
void maybe(const ordered_json& j, const char* key, T& slot) {
  if (!j.contains(key)) return;
  if constexpr (std::is_same_v<T, double>)
    slot = jnum(j.at(key));
  else if constexpr (std::is_same_v<T, std::size_t> ||
                     std::is_same_v<T, unsigned>)
    slot = j.at(key).is_string()
               ? static_cast<T>(std::strtoull(
                     j.at(key).get<std::string>().c_str(), nullptr, 10))
               : j.at(key).get<T>();
  else
    slot = j.at(key).get<T>();
}

void load_config(const std::string& path, Options& o) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  ordered_json j = ordered_json::parse(in);
  if (j.contains("params")) {
    const auto& p = j["params"];
    maybe(p, "K", o.K);
    maybe(p, "L", o.L);
    maybe(p, "V", o.V);
    maybe(p, "kappa", o.kappa);
    maybe(p, "q0", o.q0);
  }
  maybe(j, "dimensional_source", o.dimensional_source);
  if (j.contains("integrator")) {
    const auto& c = j["integrator"];
    maybe(c, "t_end", o.t_end);
    maybe(c, "rtol", o.rtol);
    maybe(c, "atol", o.atol);
    maybe(c, "max_steps", o.max_steps);
    maybe(c, "method", o.method);
  }
  if (j.contains("output")) {
    const auto& u = j["output"];
    maybe(u, "format", o.format);
    maybe(u, "out", o.out);
    maybe(u, "threads", o.threads);
  }
  if (j.contains("simulate")) maybe(j["simulate"], "model", o.model);
  if (j.contains("qssa")) {
    maybe(j["qssa"], "s_lo", o.s_lo);
    maybe(j["qssa"], "s_hi", o.s_hi);
    maybe(j["qssa"], "s_count", o.s_count);
  }
  if (j.contains("asymptotics")) {
    maybe(j["asymptotics"], "model", o.model);
    maybe(j["asymptotics"], "samples", o.samples);
    maybe(j["asymptotics"], "window_factor", o.window_factor);
  }
  if (j.contains("sensitivity")) {
    maybe(j["sensitivity"], "fd_check", o.fd_check);
    maybe(j["sensitivity"], "samples", o.sens_samples);
  }
  if (j.contains("timescales")) maybe(j["timescales"], "percentile", o.percentile);
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    maybe(s, "v_log10", o.v_log10);
    maybe(s, "kappa_log10", o.kappa_log10);
    maybe(s, "kappa_zero", o.kappa_zero);
    maybe(s, "metrics", o.metrics);
    maybe(s, "threshold", o.threshold);
    maybe(s, "staged_x", o.staged_x);
    maybe(s, "gnuplot", o.gnuplot);
  }
}

ordered_json resolved_config(const std::string& cmd, const Options& o,
                             const ModelParams& p,
                             const IntegratorConfig& cfg) {
  ordered_json j;
  j["schema"] = 1;
  j["command"] = cmd;
  j["params"] = {{"K", format_g17(p.K)},
                 {"L", format_g17(p.L)},
                 {"V", format_g17(p.V)},
                 {"kappa", format_g17(p.kappa)},
                 {"q0", format_g17(p.q0)}};
  if (!o.dimensional_source.empty())
    j["dimensional_source"] = o.dimensional_source;
  j["integrator"] = {{"t_end", format_g17(cfg.t_end)},
                     {"rtol", format_g17(cfg.rtol)},
                     {"atol", format_g17(cfg.atol)},
                     {"max_steps", cfg.max_steps},
                     {"method", o.method}};
  j["output"] = {{"format", o.format}, {"out", o.out}, {"threads", o.threads}};
  if (cmd == "simulate") j["simulate"] = {{"model", o.model}};
  if (cmd == "qssa")
    j["qssa"] = {{"s_lo", format_g17(o.s_lo)},
                 {"s_hi", format_g17(o.s_hi)},
                 {"s_count", o.s_count}};
  if (cmd == "asymptotics")
    j["asymptotics"] = {{"model", o.model},
                        {"samples", o.samples},
                        {"window_factor", format_g17(o.window_factor)}};
  if (cmd == "sensitivity")
    j["sensitivity"] = {{"fd_check", o.fd_check}, {"samples", o.sens_samples}};
  if (cmd == "timescales")
    j["timescales"] = {{"percentile", format_g17(o.percentile)}};
  if (cmd == "sweep")
    j["sweep"] = {{"v_log10", o.v_log10},
                  {"kappa_log10", o.kappa_log10},
                  {"kappa_zero", o.kappa_zero},
                  {"metrics", o.metrics},
                  {"threshold", format_g17(o.threshold)},
                  {"staged_x", o.staged_x},
                  {"gnuplot", o.gnuplot}};
  return j;
}

// ---------------------------------------------------------------------------
// Small parsing helpers
// ---------------------------------------------------------------------------

ModelKind parse_model(const std::string& name) {
  for (ModelKind k : {ModelKind::Full, ModelKind::Qssa0L, ModelKind::Qssa1L,
                      ModelKind::Qssa1V, ModelKind::Qssa1Kappa})
    if (name == model_kind_name(k)) return k;
  throw std::invalid_argument(
      "unknown model '" + name +
      "' (use full, qssa0-L, qssa1-L, qssa1-V, qssa1-kappa)");
}

std::vector<double> parse_log_grid(const std::string& spec) {
  double lo = 0.0, hi = 0.0;
  unsigned long n = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lu", &lo, &hi, &n) != 3 || n == 0)
    throw std::invalid_argument("grid spec must be lo:hi:count, got '" + spec +
                                "'");
  return SweepGrid::log_spaced(lo, hi, n);
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::strtod(item.c_str(), nullptr));
  }
  return out;
}

std::vector<Metric> parse_metrics(const std::string& csv) {
  const std::vector<Metric> all{Metric::TimeS,      Metric::TimeP,
                                Metric::TimeF,      Metric::TaFraction,
                                Metric::RelChangeS, Metric::RelChangeP,
                                Metric::RelChangeF};
  if (csv == "all") return all;
  std::vector<Metric> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    bool found = false;
    for (Metric m : all)
      if (item == metric_stem(m)) {
        out.push_back(m);
        found = true;
        break;
      }
    if (!found)
      throw std::invalid_argument("unknown metric '" + item +
                                  "' (use time_s, time_p, time_f, "
                                  "ta_fraction, rel_change_s, rel_change_p, "
                                  "rel_change_f or all)");
  }
  if (out.empty()) throw std::invalid_argument("no metrics requested");
  return out;
}

DimensionalParams read_dimensional_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open dimensional file: " + path);
  ordered_json j = ordered_json::parse(in);
  DimensionalParams d;
  const char* keys[] = {"v1_max", "k1_m", "v2_max", "k2_m",
                        "sigma",  "s0",   "q0"};
  double* slots[] = {&d.v1_max, &d.k1_m, &d.v2_max, &d.k2_m,
                     &d.sigma,  &d.s0,   &d.q0};
  for (int i = 0; i < 7; ++i) {
    if (!j.contains(keys[i]))
      throw std::invalid_argument(std::string("dimensional file missing '") +
                                  keys[i] + "'");
    *slots[i] = jnum(j.at(keys[i]));
  }
  d.validate();
  return d;
}

/// Open --out for writing, or hand back stdout.
class OutStream {
 public:
  explicit OutStream(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot write output file: " + path);
    }
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << text;
}

ordered_json params_meta(const ModelParams& p) {
  return {{"K", format_g17(p.K)},
          {"L", format_g17(p.L)},
          {"V", format_g17(p.V)},
          {"kappa", format_g17(p.kappa)},
          {"q0", format_g17(p.q0)}};
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::ReachedEnd:
      return "reached_end";
    case StopReason::SteadyState:
      return "steady_state";
    case StopReason::AllEventsFired:
      return "all_events_fired";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void warn_if_stiff(const VectorField& f, std::span<const double> y0) {
  const double lambda = stiffness_probe(f, y0, 1.0);
  if (lambda > 20.0)
    std::cerr << "note: the system looks stiff at t = 0 (|lambda| ~ "
              << format_g17(lambda)
              << "); the implicit rosenbrock23 method is recommended over "
                 "dopri45\n";
}

int cmd_simulate(const Options& o, const ModelParams& p,
                 const IntegratorConfig& cfg) {
  const ModelKind kind = parse_model(o.model);
  if (cfg.method == Method::Dopri45) {
    if (kind == ModelKind::Full) {
      const double y0[4] = {1.0, p.q0, 0.0, 0.0};
      warn_if_stiff(full_vector_field(p), y0);
    } else {
      const double y0[3] = {1.0, 0.0, 0.0};
      warn_if_stiff(reduced_vector_field(p, kind), y0);
    }
  }
  const Trajectory traj = kind == ModelKind::Full
                              ? simulate_full(p, cfg)
                              : simulate_reduced(p, kind, cfg);
  OutStream os(o.out);
  if (o.format == "csv") {
    write_trajectory_csv(os.get(), traj);
    return 0;
  }
  ordered_json j;
  j["schema"] = 1;
  ordered_json events = ordered_json::array();
  for (const EventRecord& e : traj.events())
    events.push_back({{"label", e.label}, {"time", format_g17(e.time)}});
  j["meta"] = {{"model", model_kind_name(kind)},
               {"params", params_meta(p)},
               {"stop_reason", stop_reason_name(traj.sol.reason)},
               {"steps_accepted", traj.sol.steps_accepted},
               {"steps_rejected", traj.sol.steps_rejected},
               {"events", events},
               {"config", resolved_config("simulate", o, p, cfg)}};
  ordered_json t = ordered_json::array(), s = ordered_json::array(),
               q = ordered_json::array(), mg = ordered_json::array(),
               fa = ordered_json::array();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const State x = traj.state(i);
    t.push_back(traj.time(i));
    s.push_back(x.s);
    q.push_back(x.q);
    mg.push_back(x.p);
    fa.push_back(x.f);
  }
  j["data"] = {{"t", t}, {"s", s}, {"q", q}, {"p", mg}, {"f", fa}};
  os.get() << j.dump(2) << "\n";
  return 0;
}

int cmd_qssa(const Options& o, const ModelParams& p,
             const IntegratorConfig& cfg) {
  if (!(o.s_hi >= o.s_lo) || o.s_count == 0)
    throw std::invalid_argument("qssa grid needs s_lo <= s_hi and s_count > 0");
  struct Row {
    double s, I, exact, approx, rel;
    std::string status;
  };
  std::vector<Row> rows;
  double worst_rel = 0.0;
  for (std::size_t i = 0; i < o.s_count; ++i) {
    const double s =
        o.s_count == 1
            ? o.s_lo
            : o.s_lo + (o.s_hi - o.s_lo) * double(i) / double(o.s_count - 1);
    Row r{s, rate_m1(s, p.K) / p.V, NAN, NAN, NAN, "ok"};
    try {
      r.exact = qssa_root(r.I, p.kappa);
    } catch (const NoRootError&) {
      r.status = "no_root";
    }
    if (r.status == "ok") {
      try {
        r.approx = qssa_approx(r.I, p.kappa).q_tilde;
        r.rel = std::abs(r.approx - r.exact) / r.exact;
        worst_rel = std::max(worst_rel, r.rel);
      } catch (const std::domain_error&) {
        r.status = "approx_domain";
      }
    }
    rows.push_back(r);
  }
  const bool certified = vkappa_condition(p.V, p.kappa);

  OutStream os(o.out);
  if (o.format == "csv") {
    os.get() << "s,I,q_exact,q_approx,rel_err,status\n";
    for (const Row& r : rows)
      os.get() << format_g17(r.s) << ',' << format_g17(r.I) << ','
               << format_g17(r.exact) << ',' << format_g17(r.approx) << ','
               << format_g17(r.rel) << ',' << r.status << '\n';
    return 0;
  }
  ordered_json j;
  j["schema"] = 1;
  j["meta"] = {{"params", params_meta(p)},
               {"vkappa_condition", certified},
               {"worst_rel_err", format_g17(worst_rel)},
               {"config", resolved_config("qssa", o, p, cfg)}};
  ordered_json data = ordered_json::array();
  for (const Row& r : rows)
    data.push_back({{"s", r.s},
                    {"I", r.I},
                    {"q_exact", r.exact},
                    {"q_approx", r.approx},
                    {"rel_err", r.rel},
                    {"status", r.status}});
  j["data"] = data;
  os.get() << j.dump(2) << "\n";
  return 0;
}

int cmd_asymptotics(const Options& o, const ModelParams& p,
                    const IntegratorConfig& cfg) {
  const ModelKind kind = parse_model(o.model);
  if (kind == ModelKind::Full)
    throw std::invalid_argument(
        "asymptotics compares a reduced model against the full system; pick "
        "qssa0-L, qssa1-L, qssa1-V or qssa1-kappa");
  if (o.samples < 2) throw std::invalid_argument("samples must be >= 2");
  const Trajectory full = simulate_full(p, cfg);
  const Trajectory red = simulate_reduced(p, kind, cfg);
  const EventRecord* peak = full.find_event(kQMaxEventLabel);
  const double t_lo =
      peak ? std::min(o.window_factor * peak->time, cfg.t_end) : 0.0;

  Regime regime = Regime::LargeL;
  if (kind == ModelKind::Qssa1V) regime = Regime::LargeV;
  if (kind == ModelKind::Qssa1Kappa) regime = Regime::LargeKappa;

  struct Row {
    double t, s_full, s_model, q_full, q_model;
  };
  std::vector<Row> rows;
  double sup_q = 0.0, sup_s = 0.0;
  const double t_hi =
      std::min({cfg.t_end, full.time(full.size() - 1), red.time(red.size() - 1)});
  for (std::size_t i = 0; i < o.samples; ++i) {
    const double t = t_lo + (t_hi - t_lo) * double(i) / double(o.samples - 1);
    const State xf = full.at_time(t);
    const State xr = red.at_time(t);
    rows.push_back({t, xf.s, xr.s, xf.q, xr.q});
    sup_q = std::max(sup_q, std::abs(xf.q - xr.q));
    sup_s = std::max(sup_s, std::abs(xf.s - xr.s));
  }

  OutStream os(o.out);
  if (o.format == "csv") {
    os.get() << "t,s_full,s_model,q_full,q_model,abs_err_q\n";
    for (const Row& r : rows)
      os.get() << format_g17(r.t) << ',' << format_g17(r.s_full) << ','
               << format_g17(r.s_model) << ',' << format_g17(r.q_full) << ','
               << format_g17(r.q_model) << ','
               << format_g17(std::abs(r.q_full - r.q_model)) << '\n';
    return 0;
  }
  ordered_json j;
  j["schema"] = 1;
  j["meta"] = {{"model", model_kind_name(kind)},
               {"epsilon", format_g17(regime_epsilon(p, regime))},
               {"window", ordered_json::array(
                              {format_g17(t_lo), format_g17(t_hi)})},
               {"sup_err_q", format_g17(sup_q)},
               {"sup_err_s", format_g17(sup_s)},
               {"params", params_meta(p)},
               {"config", resolved_config("asymptotics", o, p, cfg)}};
  ordered_json t = ordered_json::array(), qf = ordered_json::array(),
               qm = ordered_json::array(), sf = ordered_json::array(),
               sm = ordered_json::array();
  for (const Row& r : rows) {
    t.push_back(r.t);
    sf.push_back(r.s_full);
    sm.push_back(r.s_model);
    qf.push_back(r.q_full);
    qm.push_back(r.q_model);
  }
  j["data"] = {{"t", t},
               {"s_full", sf},
               {"s_model", sm},
               {"q_full", qf},
               {"q_model", qm}};
  os.get() << j.dump(2) << "\n";
  return 0;
}

int cmd_sensitivity(const Options& o, const ModelParams& p,
                    const IntegratorConfig& cfg) {
  if (o.sens_samples < 2) throw std::invalid_argument("samples must be >= 2");
  const Solution fwd = integrate_sensitivity_full(p, cfg);
  const Solution slow = integrate_sensitivity_qssa(p, cfg);
  const DiscrepancyReport rep = sign_discrepancy_probe(p, cfg);

  struct Row {
    double t, ds, dq, dp, df, dp_slow;
  };
  std::vector<Row> rows;
  const double t_hi = std::min(cfg.t_end, fwd.times.back());
  std::vector<double> yf(8), ys(2);
  for (std::size_t i = 0; i < o.sens_samples; ++i) {
    const double t = t_hi * double(i) / double(o.sens_samples - 1);
    fwd.sample_into(t, yf);
    slow.sample_into(std::min(t, slow.times.back()), ys);
    rows.push_back({t, yf[4], yf[5], yf[6], yf[7], -ys[1]});
  }

  double fd_worst = NAN;
  if (o.fd_check) {
    std::vector<double> grid;
    for (int i = 1; i <= 40; ++i) grid.push_back(t_hi * i / 40.0);
    const auto fd = fd_sensitivity_oracle(p, grid);
    fd_worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      fwd.sample_into(grid[i], yf);
      const double oracle[4] = {fd[i].ds, fd[i].dq, fd[i].dp, fd[i].df};
      for (int c = 0; c < 4; ++c)
        if (std::abs(oracle[c]) > 1e-6)
          fd_worst = std::max(fd_worst, std::abs(yf[4 + c] - oracle[c]) /
                                            std::abs(oracle[c]));
    }
  }

  OutStream os(o.out);
  if (o.format == "csv") {
    os.get() << "t,ds_dk,dq_dk,dp_dk,df_dk,dp_dk_slow\n";
    for (const Row& r : rows)
      os.get() << format_g17(r.t) << ',' << format_g17(r.ds) << ','
               << format_g17(r.dq) << ',' << format_g17(r.dp) << ','
               << format_g17(r.df) << ',' << format_g17(r.dp_slow) << '\n';
    return 0;
  }
  ordered_json j;
  j["schema"] = 1;
  ordered_json disc = {{"found", rep.found}};
  if (rep.found) {
    disc["t_begin"] = format_g17(rep.t_begin);
    disc["t_end"] = format_g17(rep.t_end);
  }
  j["meta"] = {{"params", params_meta(p)},
               {"sign_discrepancy", disc},
               {"config", resolved_config("sensitivity", o, p, cfg)}};
  if (o.fd_check) j["meta"]["fd_worst_rel_err"] = format_g17(fd_worst);
  ordered_json t = ordered_json::array(), ds = ordered_json::array(),
               dq = ordered_json::array(), dp = ordered_json::array(),
               df = ordered_json::array(), dps = ordered_json::array();
  for (const Row& r : rows) {
    t.push_back(r.t);
    ds.push_back(r.ds);
    dq.push_back(r.dq);
    dp.push_back(r.dp);
    df.push_back(r.df);
    dps.push_back(r.dp_slow);
  }
  j["data"] = {{"t", t},      {"ds_dk", ds}, {"dq_dk", dq},
               {"dp_dk", dp}, {"df_dk", df}, {"dp_dk_slow", dps}};
  os.get() << j.dump(2) << "\n";
  return 0;
}

int cmd_timescales(const Options& o, const ModelParams& p,
                   const IntegratorConfig& cfg) {
  const Trajectory traj = simulate_full(p, cfg);
  const TimescaleReport r = timescales(p, traj, o.percentile);

  const std::pair<const char*, double> nums[] = {
      {"t1", r.t1},
      {"t2", r.t2},
      {"t3", r.t3},
      {"t_estimate", r.t_estimate},
      {"t_bound", r.t_bound},
      {"t_ref_exact", r.t_ref_exact},
      {"t_ref_simple", r.t_ref_simple},
      {"percentile", r.percentile},
      {"t_m", r.t_m},
      {"s_m", r.s_m},
      {"q_tilde_m", r.q_tilde_m},
      {"q_tilde_0", r.q_tilde_0},
      {"theta0", r.theta0},
      {"theta_m", r.theta_m},
      {"psi", r.psi},
      {"kappa_bound", r.kappa_bound},
      {"v_bound", r.v_bound}};
  const std::pair<const char*, bool> flags[] = {
      {"condition_full", r.condition_full},
      {"condition_simple", r.condition_simple},
      {"condition_kappa", r.condition_kappa},
      {"condition_v", r.condition_v}};

  OutStream os(o.out);
  if (o.format == "csv") {
    os.get() << "key,value\n";
    for (const auto& [k, v] : nums) os.get() << k << ',' << format_g17(v) << '\n';
    for (const auto& [k, v] : flags)
      os.get() << k << ',' << (v ? "true" : "false") << '\n';
    return 0;
  }
  ordered_json j;
  j["schema"] = 1;
  ordered_json rep;
  for (const auto& [k, v] : nums) rep[k] = format_g17(v);
  for (const auto& [k, v] : flags) rep[k] = v;
  j["meta"] = {{"params", params_meta(p)},
               {"config", resolved_config("timescales", o, p, cfg)}};
  j["timescales"] = rep;
  os.get() << j.dump(2) << "\n";
  return 0;
}

std::string gnuplot_script(const std::vector<std::string>& csv_files) {
  std::ostringstream gp;
  gp << "set datafile separator comma\n"
        "set key off\n"
        "set xlabel 'log10 V'\n"
        "set ylabel 'log10 kappa'\n"
        "set view map\n";
  for (const std::string& f : csv_files)
    gp << "set title '" << f << "'\n"
       << "splot '" << f
       << "' every ::1 using 1:2:3 with points pt 5 ps 3 palette\n"
          "pause -1\n";
  return gp.str();
}

int cmd_sweep(const Options& o, const ModelParams& p, IntegratorConfig cfg) {
  if (o.out.empty())
    throw std::invalid_argument(
        "sweep writes one CSV per metric; --out PREFIX is required");
  cfg.store_trajectory = false;
  cfg.stop_after_events = true;

  // staged mode: relative stage times at the fixed kappa of --kappa
  if (!o.staged_x.empty()) {
    const std::vector<double> xs = parse_double_list(o.staged_x);
    const std::vector<double> vs = parse_log_grid(o.v_log10);
    const StagedCurves sc =
        staged_relative_changes(p, vs, xs, cfg, o.threads);
    std::ostringstream csv;
    write_staged_curves_csv(csv, sc);
    write_text_file(o.out + "_staged.csv", csv.str());
    ordered_json meta;
    meta["schema"] = 1;
    meta["config"] = resolved_config("sweep", o, p, cfg);
    meta["outputs"] = ordered_json::array({o.out + "_staged.csv"});
    write_text_file(o.out + "_meta.json", meta.dump(2) + "\n");
    std::cout << "wrote " << o.out + "_staged.csv" << "\n";
    return 0;
  }

  SweepGrid grid;
  grid.v_values = parse_log_grid(o.v_log10);
  grid.kappa_values = parse_log_grid(o.kappa_log10);
  if (o.kappa_zero)
    grid.kappa_values.insert(grid.kappa_values.begin(), 0.0);
  grid.K = p.K;
  grid.L = p.L;
  grid.q0 = p.q0;
  grid.thresholds = {o.threshold};
  const std::vector<Metric> metrics = parse_metrics(o.metrics);

  const SweepResult res = run_sweep(grid, metrics, cfg, o.threads);

  std::vector<std::string> files;
  for (std::size_t m = 0; m < res.maps.size(); ++m) {
    std::ostringstream csv;
    write_metric_map_csv(csv, res, m);
    const std::string path =
        o.out + "_" + metric_name(res.maps[m].metric, o.threshold) + ".csv";
    write_text_file(path, csv.str());
    files.push_back(path);
    std::cout << "wrote " << path << "\n";
  }
  ordered_json meta;
  meta["schema"] = 1;
  meta["config"] = resolved_config("sweep", o, p, cfg);
  meta["cells_total"] = grid.v_values.size() * grid.kappa_values.size();
  meta["cells_failed"] = res.cells_failed;
  meta["cell_errors"] = res.cell_errors;
  meta["outputs"] = files;
  write_text_file(o.out + "_meta.json", meta.dump(2) + "\n");
  if (o.gnuplot) write_text_file(o.out + ".gp", gnuplot_script(files));
  if (res.cells_failed > 0) {
    std::cerr << "warning: " << res.cells_failed
              << " sweep cells failed; their rows carry status=failed\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;

  // stage 1: a --config file replaces the built-in defaults
  try {
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--config" && i + 1 < argc)
        load_config(argv[i + 1], o);
      else if (a.rfind("--config=", 0) == 0)
        load_config(a.substr(9), o);
    }
  } catch (const std::exception& e) {
    return fail(2, "usage", e.what());
  }

  // stage 2: explicit flags override
  CLI::App app{
      "Kinetics of the TG -> DG -> MG hydrolysis chain with DG "
      "transacylation: simulation, quasi-steady analysis, reduced models, "
      "kappa sensitivities and parametric sweeps."};
  app.require_subcommand(1);

  struct SubOpts {
    CLI::App* sub = nullptr;
    CLI::Option* dim = nullptr;
    std::vector<CLI::Option*> nondim;
  };
  std::vector<SubOpts> subs;

  auto add_common = [&](const char* name, const char* desc) -> CLI::App* {
    CLI::App* s = app.add_subcommand(name, desc);
    SubOpts so;
    so.sub = s;
    so.nondim = {
        s->add_option("--K", o.K, "TG Michaelis constant over initial TG"),
        s->add_option("--L", o.L, "initial TG over DG Michaelis constant"),
        s->add_option("--V", o.V, "DG over TG max hydrolysis rate"),
        s->add_option("--kappa", o.kappa, "transacylation strength"),
        s->add_option("--q0", o.q0, "initial DG in DG Michaelis units")};
    so.dim = s->add_option("--dimensional-file", o.dimensional_file,
                           "JSON file of dimensional constants (v1_max, k1_m, "
                           "v2_max, k2_m, sigma, s0, q0)");
    s->add_option("--config", o.config_file,
                  "JSON config from a previous --dump-config");
    s->add_option("--t-end", o.t_end, "integration horizon");
    s->add_option("--rtol", o.rtol, "relative tolerance");
    s->add_option("--atol", o.atol, "absolute tolerance");
    s->add_option("--max-steps", o.max_steps, "step budget");
    s->add_option("--method", o.method, "rosenbrock23 or dopri45");
    s->add_option("--out", o.out, "output file (or prefix for sweep)");
    s->add_option("--format", o.format, "csv or json");
    s->add_option("--threads", o.threads, "worker threads for sweeps");
    s->add_flag("--dump-config", o.dump_config,
                "print the resolved settings as JSON and exit");
    subs.push_back(so);
    return s;
  };

  CLI::App* c_sim = add_common("simulate", "integrate a model and dump the"
                                           " time series");
  c_sim->add_option("--model", o.model,
                    "full, qssa0-L, qssa1-L, qssa1-V or qssa1-kappa");

  CLI::App* c_qssa = add_common(
      "qssa", "tabulate the quasi-steady DG level: exact root vs the "
              "quadratic closed form");
  c_qssa->add_option("--s-lo", o.s_lo, "lowest substrate level");
  c_qssa->add_option("--s-hi", o.s_hi, "highest substrate level");
  c_qssa->add_option("--s-count", o.s_count, "grid size");

  CLI::App* c_asy = add_common(
      "asymptotics", "compare a reduced model against the full system past "
                     "the DG peak");
  c_asy->add_option("--model", o.model,
                    "qssa0-L, qssa1-L, qssa1-V or qssa1-kappa");
  c_asy->add_option("--samples", o.samples, "output grid size");
  c_asy->add_option("--window-factor", o.window_factor,
                    "window starts at factor * (DG peak time)");

  CLI::App* c_sens = add_common(
      "sensitivity", "kappa-sensitivities of the full and quasi-steady "
                     "systems plus the sign-conflict probe");
  c_sens->add_flag("--fd-check", o.fd_check,
                   "cross-check against central differences");
  c_sens->add_option("--samples", o.sens_samples, "output grid size");

  CLI::App* c_ts = add_common(
      "timescales", "DG-peak timescale diagnostics and validity verdicts");
  c_ts->add_option("--percentile", o.percentile,
                   "reference stage: percent of TG still unprocessed");

  CLI::App* c_sweep = add_common(
      "sweep", "metric maps over a log-spaced (V, kappa) grid");
  c_sweep->add_option("--v-log10", o.v_log10, "V grid as log10 lo:hi:count");
  c_sweep->add_option("--kappa-log10", o.kappa_log10,
                      "kappa grid as log10 lo:hi:count");
  c_sweep->add_flag("--kappa-zero", o.kappa_zero,
                    "prepend the kappa = 0 baseline column");
  c_sweep->add_option("--metrics", o.metrics,
                      "comma list of time_s, time_p, time_f, ta_fraction, "
                      "rel_change_s, rel_change_p, rel_change_f, or all");
  c_sweep->add_option("--threshold", o.threshold, "threshold percent");
  c_sweep->add_option("--staged-x", o.staged_x,
                      "comma list of stage percentages: write staged curves "
                      "at the fixed --kappa instead of metric maps");
  c_sweep->add_flag("--gnuplot", o.gnuplot, "also write a gnuplot script");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::ostringstream msg;
    msg << e.what();
    return fail(2, "usage", msg.str());
  }

  // locate the active subcommand and its option handles
  CLI::App* active = app.get_subcommands().front();
  const SubOpts* so = nullptr;
  for (const SubOpts& s : subs)
    if (s.sub == active) so = &s;

  bool any_nondim = false;
  for (CLI::Option* opt : so->nondim) any_nondim |= opt->count() > 0;
  const bool dim_given = so->dim->count() > 0;
  if (any_nondim && dim_given)
    return fail(2, "usage",
                "give either the dimensionless parameters (--K --L --V "
                "--kappa --q0) or --dimensional-file, not both");

  ModelParams p;
  try {
    if (dim_given) {
      const DimensionalParams d = read_dimensional_file(o.dimensional_file);
      p = nondimensionalize(d);
      o.dimensional_source = o.dimensional_file;
    } else {
      p.K = o.K;
      p.L = o.L;
      p.V = o.V;
      p.kappa = o.kappa;
      p.q0 = o.q0;
    }
    p.validate();
  } catch (const std::exception& e) {
    return fail(2, "usage", e.what());
  }

  IntegratorConfig cfg;
  cfg.rtol = o.rtol;
  cfg.atol = o.atol;
  cfg.max_steps = o.max_steps;
  cfg.t_end = o.t_end > 0.0 ? o.t_end : (active == c_sweep ? 1000.0 : 10.0);
  if (o.method == "rosenbrock23")
    cfg.method = Method::Rosenbrock23;
  else if (o.method == "dopri45")
    cfg.method = Method::Dopri45;
  else
    return fail(2, "usage", "unknown method '" + o.method +
                                "' (use rosenbrock23 or dopri45)");
  if (o.format != "csv" && o.format != "json")
    return fail(2, "usage", "unknown format '" + o.format +
                                "' (use csv or json)");
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    return fail(2, "usage", e.what());
  }

  const std::string cmd = active->get_name();
  if (o.dump_config) {
    IntegratorConfig shown = cfg;
    if (cmd == "sweep") {
      shown.store_trajectory = false;
      shown.stop_after_events = true;
    }
    std::cout << resolved_config(cmd, o, p, shown).dump(2) << "\n";
    return 0;
  }

  try {
    if (cmd == "simulate") return cmd_simulate(o, p, cfg);
    if (cmd == "qssa") return cmd_qssa(o, p, cfg);
    if (cmd == "asymptotics") return cmd_asymptotics(o, p, cfg);
    if (cmd == "sensitivity") return cmd_sensitivity(o, p, cfg);
    if (cmd == "timescales") return cmd_timescales(o, p, cfg);
    if (cmd == "sweep") return cmd_sweep(o, p, cfg);
  } catch (const NoRootError& e) {
    return fail(3, "no_root", e.what());
  } catch (const IntegrationError& e) {
    return fail(3, "integration", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(2, "usage", e.what());
  } catch (const std::domain_error& e) {
    return fail(2, "usage", e.what());
  } catch (const std::exception& e) {
    return fail(3, "internal", e.what());
  }
  return fail(2, "usage", "unknown subcommand");
}
