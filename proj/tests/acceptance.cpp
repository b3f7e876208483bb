// Acceptance gate: the release-blocking checks for the kinetics library.
// Each criterion prints one [PASS]/[FAIL] line with the measured numbers;
// the process exits nonzero if any criterion fails.
//
// Usage: acceptance <path-to-cli-binary>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lipokin/integrator.hpp"
#include "lipokin/kinetics.hpp"
#include "lipokin/params.hpp"
#include "lipokin/qssa.hpp"
#include "lipokin/sensitivity.hpp"
#include "lipokin/simulate.hpp"
#include "lipokin/sweep.hpp"

using namespace lipokin;

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

int g_failures = 0;

void report(int num, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %02d %-28s %s\n", pass ? "PASS" : "FAIL", num, name,
              detail.c_str());
  if (!pass) ++g_failures;
}

template <class Fn>
void criterion(int num, const char* name, Fn&& fn) {
  std::string detail;
  bool pass = false;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(num, name, pass, detail);
}

// --- 1: conserved totals survive integration over random parameters -------

bool crit_conservation(std::string& detail) {
  std::mt19937 rng(20250817u);
  std::uniform_real_distribution<double> exp_u(-1.0, 1.0);
  std::uniform_real_distribution<double> kap_u(0.0, 100.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    ModelParams p;
    p.K = std::pow(10.0, exp_u(rng));
    p.L = std::pow(10.0, exp_u(rng));
    p.V = std::pow(10.0, exp_u(rng));
    const double kap = kap_u(rng);
    p.kappa = (i % 7 == 0) ? 0.0 : kap;
    p.q0 = (i % 2 == 1) ? p.L / 2.0 : 0.0;
    IntegratorConfig cfg;  // rtol 1e-8
    cfg.t_end = 25.0;
    const Trajectory traj = simulate_full(p, cfg);
    const double glyc0 = 1.0 + p.q0 / p.L;
    const double acyl0 = 3.0 + 2.0 * p.q0 / p.L;
    for (std::size_t j = 0; j < traj.size(); ++j) {
      const ConservationResiduals r =
          conservation_residuals(traj.state(j), p.L, p.q0);
      worst = std::max({worst, std::abs(r.glycerol) / glyc0,
                        std::abs(r.acyl) / acyl0});
    }
  }
  detail = fmt("worst relative drift of the two conserved totals %.3g over "
               "20 random parameter sets at rtol 1e-8 (tol 1e-6)",
               worst);
  return worst < 1e-6;
}

// --- 2: complete conversion reaches MG = 1, FA = 2 ------------------------

bool crit_equilibrium(std::string& detail) {
  struct Case {
    double K, L, V, kappa;
  };
  const Case cases[] = {{1.0, 1.0, 2.0, 16.0},
                        {0.5, 2.0, 0.7, 3.0},
                        {2.0, 0.3, 5.0, 0.0}};
  double worst = 0.0;
  for (const Case& c : cases) {
    ModelParams p;
    p.K = c.K;
    p.L = c.L;
    p.V = c.V;
    p.kappa = c.kappa;
    IntegratorConfig cfg;
    cfg.t_end = 3000.0;
    const Trajectory traj = simulate_full(p, cfg);
    bool crossed = false;
    for (std::size_t j = 0; j < traj.size(); ++j) {
      const State x = traj.state(j);
      if (x.s + x.q >= 1e-6) continue;
      crossed = true;
      worst = std::max({worst, std::abs(x.p - 1.0), std::abs(x.f - 2.0)});
    }
    if (!crossed) {
      detail = fmt("s + q never fell below 1e-6 at K=%g L=%g V=%g kappa=%g",
                   c.K, c.L, c.V, c.kappa);
      return false;
    }
  }
  detail = fmt("worst |MG - 1| / |FA - 2| after s + q < 1e-6 is %.3g over 3 "
               "parameter sets (tol 1e-4)",
               worst);
  return worst <= 1e-4;
}

// --- 3: quadratic root approximation across the certified region ----------

bool crit_certified_root(std::string& detail) {
  const double kappas[] = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
  const double factors[] = {1.0, 1.5, 3.0};
  const double Ks[] = {0.1, 1.0, 10.0};
  double worst = 0.0, worst_k_ge1 = 0.0, max_root = 0.0;
  double at_kappa = 0, at_v = 0, at_K = 0, at_s = 0;
  std::size_t samples = 0;
  for (double kappa : kappas)
    for (double fac : factors) {
      const double V = fac * 4.0 / (1.0 + 2.0 * kappa);
      for (double K : Ks)
        for (int i = 1; i <= 100; ++i) {
          const double s = 0.01 * i;
          const double I = rate_m1(s, K) / V;
          const double exact = qssa_root(I, kappa);
          const double approx = qssa_approx(I, kappa).q_tilde;
          const double rel = std::abs(approx - exact) / exact;
          max_root = std::max(max_root, exact);
          if (kappa >= 1.0) worst_k_ge1 = std::max(worst_k_ge1, rel);
          if (rel > worst) {
            worst = rel;
            at_kappa = kappa;
            at_v = V;
            at_K = K;
            at_s = s;
          }
          ++samples;
        }
    }
  const bool half_ok = max_root <= 0.5 + 1e-12;
  const bool pass = worst <= 0.10 && half_ok;
  detail = fmt("worst rel error %.1f%% at (kappa=%g, V=%g, K=%g, s=%.2f) vs "
               "10%% tol; max root %.3f vs 1/2 over %zu samples\n"
               "          note: the 10%% figure is not met on the V = "
               "4/(1+2*kappa) boundary at small kappa; restricted to kappa >= "
               "1 the worst error is %.1f%%, and the 1/2 bound held everywhere",
               100.0 * worst, at_kappa, at_v, at_K, at_s, max_root, samples,
               100.0 * worst_k_ge1);
  return pass;
}

// --- 4: DG peak height and validity verdicts at the reference point -------

bool crit_timescales(std::string& detail) {
  ModelParams p;
  p.kappa = 16.0;
  IntegratorConfig cfg;
  cfg.t_end = 10.0;

  p.V = 10.0;
  const TimescaleReport fast = timescales(p, simulate_full(p, cfg));
  p.V = 2.0;
  const TimescaleReport slow = timescales(p, simulate_full(p, cfg));

  const bool qm_fast = std::abs(fast.q_tilde_m - 0.028) <= 0.005;
  const bool qm_slow = std::abs(slow.q_tilde_m - 0.073) <= 0.005;
  const bool verdicts = fast.condition_full && !slow.condition_full;
  const bool shorthand = std::abs(fast.t_ref_simple - 4.0 / 15.0) < 1e-12;
  detail = fmt("peak DG %.4f (V=10, band 0.028+-0.005) and %.4f (V=2, band "
               "0.073+-0.005); validity verdict pass/fail as required (%d/%d); "
               "90%% shorthand %.6f vs 4/15",
               fast.q_tilde_m, slow.q_tilde_m, int(fast.condition_full),
               int(slow.condition_full), fast.t_ref_simple);
  return qm_fast && qm_slow && verdicts && shorthand;
}

// --- 5: relaxation sign identity along full trajectories ------------------

bool crit_sign_identity(std::string& detail) {
  std::size_t total = 0, checked = 0, violations = 0;
  for (double V : {0.1, 1.0, 2.0, 10.0}) {
    ModelParams p;
    p.kappa = 16.0;
    p.V = V;
    IntegratorConfig cfg;
    cfg.t_end = 10.0;
    const Trajectory traj = simulate_full(p, cfg);
    const PerturbationSeries ps = perturbation(traj, p, cfg.atol);
    total += ps.times.size();
    checked += ps.checked;
    violations += ps.violations;
  }
  const double agree =
      total == 0 ? 0.0
                 : double(total - violations) / double(total);
  detail = fmt("sign(q') = -sign(pi) at %.4f%% of %zu output points "
               "(%zu within atol of the manifold, %zu violations)",
               100.0 * agree, total, total - checked, violations);
  return agree >= 0.999 && violations == 0;
}

// --- 6: large-V expansion error collapses at third order -------------------

bool crit_v_expansion(std::string& detail) {
  ModelParams p;
  p.kappa = 1.0;
  IntegratorConfig cfg;
  cfg.t_end = 10.0;
  cfg.rtol = 1e-11;
  cfg.atol = 1e-13;

  auto sup_err = [&](const Trajectory& traj, const ModelParams& pp,
                     double lo, double hi, int order) {
    double worst = 0.0;
    for (int i = 0; i <= 800; ++i) {
      const double t = lo + (hi - lo) * i / 800.0;
      if (t > traj.sol.times.back()) break;
      const State x = traj.at_time(t);
      const double qx = expansion_q_v(std::max(x.s, 0.0), pp, order);
      worst = std::max(worst, std::abs(x.q - qx));
    }
    return worst;
  };

  p.V = 10.0;
  const Trajectory t10 = simulate_full(p, cfg);
  const ModelParams p10 = p;
  p.V = 20.0;
  const Trajectory t20 = simulate_full(p, cfg);
  const ModelParams p20 = p;
  // common observation window anchored past the slower run's DG peak, so
  // both errors are measured on the slow stage of both trajectories
  const double lo = 3.0 * t10.find_event(kQMaxEventLabel)->time;
  const double e10 = sup_err(t10, p10, lo, 10.0, 3);
  const double e20 = sup_err(t20, p20, lo, 10.0, 3);
  const double ratio = e10 / e20;

  p.V = 3.0;
  const Trajectory t3 = simulate_full(p, cfg);
  const double lo3 = 3.0 * t3.find_event(kQMaxEventLabel)->time;
  const double e1 = sup_err(t3, p, lo3, 10.0, 1);
  const double e2 = sup_err(t3, p, lo3, 10.0, 2);
  const double e3 = sup_err(t3, p, lo3, 10.0, 3);

  detail = fmt("order-3 sup error %.3g (V=10) / %.3g (V=20), ratio %.1f in "
               "[12,20]; V=3 orders 1..3: %.2e > %.2e > %.2e",
               e10, e20, ratio, e1, e2, e3);
  return ratio >= 12.0 && ratio <= 20.0 && e1 > e2 && e2 > e3;
}

// --- 7: large-kappa expansion error collapses at second order --------------

bool crit_kappa_expansion(std::string& detail) {
  IntegratorConfig cfg;
  cfg.t_end = 10.0;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;

  auto sup_err = [&](double kappa, int order) {
    ModelParams p;
    p.kappa = kappa;
    const Trajectory traj = simulate_full(p, cfg);
    const double lo = 3.0 * traj.find_event(kQMaxEventLabel)->time;
    double worst = 0.0;
    for (int i = 0; i <= 800; ++i) {
      const double t = lo + (10.0 - lo) * i / 800.0;
      if (t > traj.sol.times.back()) break;
      const State x = traj.at_time(t);
      const double qx = expansion_q_kappa(std::max(x.s, 0.0), p, order);
      worst = std::max(worst, std::abs(x.q - qx));
    }
    return worst;
  };

  const double e25 = sup_err(25.0, 2);
  const double e100 = sup_err(100.0, 2);
  const double e400 = sup_err(400.0, 2);
  const double per_doubling = std::sqrt(e100 / e400);
  detail = fmt("order-2 sup errors %.3g (kappa=25) > %.3g (kappa=100); "
               "kappa=100 -> 400 shrink %.2f per doubling in [2.2,3.5]",
               e25, e100, per_doubling);
  return per_doubling >= 2.2 && per_doubling <= 3.5 && e25 > e100;
}

// --- 8: forward sensitivities match central differences --------------------

bool crit_sensitivity(std::string& detail) {
  double worst = 0.0;
  std::size_t points = 0;
  for (double V : {0.1, 1.0, 2.0, 10.0}) {
    ModelParams p;
    p.kappa = 16.0;
    p.V = V;
    IntegratorConfig cfg;
    cfg.t_end = 10.0;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    const Solution fwd = integrate_sensitivity_full(p, cfg);
    std::vector<double> grid;
    for (int i = 1; i <= 40; ++i) grid.push_back(10.0 * i / 40.0);
    const auto fd = fd_sensitivity_oracle(p, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::vector<double> y = fwd.sample(grid[i]);
      const double oracle[4] = {fd[i].ds, fd[i].dq, fd[i].dp, fd[i].df};
      for (int c = 0; c < 4; ++c) {
        if (std::abs(oracle[c]) <= 1e-6) continue;
        worst = std::max(worst,
                         std::abs(y[4 + c] - oracle[c]) / std::abs(oracle[c]));
        ++points;
      }
    }
  }
  detail = fmt("worst relative deviation from the h=1e-4 central-difference "
               "oracle %.3g over %zu checked values at V in {0.1,1,2,10} "
               "(tol 1e-3)",
               worst, points);
  return worst < 1e-3 && points > 400;
}

// --- 9: early-time sign conflict of the reduced MG response ----------------

bool crit_probe(std::string& detail) {
  std::string spans;
  for (double V : {0.1, 1.0, 2.0}) {
    ModelParams p;
    p.kappa = 16.0;
    p.V = V;
    IntegratorConfig cfg;
    cfg.t_end = 10.0;
    const DiscrepancyReport rep = sign_discrepancy_probe(p, cfg);
    if (!rep.found || !(rep.t_begin < rep.t_end)) {
      detail = fmt("no opposite-sign interval found at V=%g", V);
      return false;
    }
    spans += fmt("%s[%.3g, %.3g] (V=%g)", spans.empty() ? "" : ", ",
                 rep.t_begin, rep.t_end, V);
  }
  detail = "reduced MG response has the opposite sign on " + spans;
  return true;
}

// --- 10: parametric sweep table reproduces the reference numbers -----------

bool crit_sweep_table(std::string& detail) {
  IntegratorConfig cfg;
  cfg.t_end = 1000.0;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;
  cfg.store_trajectory = false;
  cfg.stop_after_events = true;

  // kappa = 0 column: substrate half-time equals the scalar MM value for
  // every V
  const double t_mm = 0.5 + std::log(2.0);
  double col_dev = 0.0;
  for (double lv = -2.0; lv <= 2.01; lv += 1.0) {
    ModelParams p;
    p.V = std::pow(10.0, lv);
    p.kappa = 0.0;
    const auto out =
        time_to_threshold(p, {ThresholdTarget::Kind::S, 50.0}, cfg);
    if (out.status != CellStatus::Ok) {
      detail = fmt("kappa=0 half-time not reached at V=1e%g", lv);
      return false;
    }
    col_dev = std::max(col_dev, std::abs(out.value - t_mm));
  }

  auto frac = [&](double V, double kappa) {
    ModelParams p;
    p.V = V;
    p.kappa = kappa;
    return fraction_at_threshold(p, {ThresholdTarget::Kind::S, 50.0}, cfg);
  };
  const auto f_hi = frac(1e-2, 1e2);
  const auto f_lo = frac(1e2, 1e-2);

  auto relp = [&](double V) {
    ModelParams p;
    p.V = V;
    p.kappa = 10.0;
    return relative_change(p, {ThresholdTarget::Kind::P, 50.0}, cfg);
  };
  const auto r_small = relp(0.1);
  const auto r_large = relp(10.0);

  const bool statuses = f_hi.status == CellStatus::Ok &&
                        f_lo.status == CellStatus::Ok &&
                        r_small.status == CellStatus::Ok &&
                        r_large.status == CellStatus::Ok;
  // signs and margins required of the table, then the two MG-shift numbers
  // pinned against frozen reference values
  const bool bands = f_hi.value >= 0.9 && f_lo.value <= 0.1 &&
                     r_small.value <= -0.5 && r_large.value >= 0.1;
  const bool pinned =
      std::abs(r_small.value - (-0.69594396821342641)) <= 0.01 * 0.696 &&
      std::abs(r_large.value - 0.17454001880026185) <= 0.01 * 0.175;
  detail = fmt("kappa=0 column dev %.2g from 1/2 + ln 2 (tol 1e-5); "
               "transacylation share %.4f / %.4f at the corners; MG half-time "
               "shift %+.4f (V=0.1) / %+.4f (V=10), both within 1%% of the "
               "reference",
               col_dev, f_hi.value, f_lo.value, r_small.value, r_large.value);
  return col_dev < 1e-5 && statuses && bands && pinned;
}

// --- 11: CLI sweep rerun is byte-identical ---------------------------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool crit_cli_determinism(const std::string& cli, std::string& detail) {
  const std::string args =
      " sweep --v-log10 -1:1:4 --kappa-zero --kappa-log10 0:1:2"
      " --metrics time_s,ta_fraction,rel_change_p --t-end 50 --threads 1"
      " --out ";
  const std::string a = "acceptance_sweep_a";
  const std::string b = "acceptance_sweep_b";
  const int rc1 = std::system((cli + args + a + " > /dev/null").c_str());
  const int rc2 = std::system((cli + args + b + " > /dev/null").c_str());
  if (rc1 != 0 || rc2 != 0) {
    detail = fmt("CLI exited with status %d / %d", rc1, rc2);
    return false;
  }
  const char* stems[] = {"time_s_50", "ta_fraction_50", "rel_change_p_50"};
  std::size_t bytes = 0;
  for (const char* stem : stems) {
    const std::string fa = slurp(a + "_" + stem + ".csv");
    const std::string fb = slurp(b + "_" + stem + ".csv");
    if (fa.empty() || fa != fb) {
      detail = fmt("%s.csv differs between reruns (or is empty)", stem);
      return false;
    }
    bytes += fa.size();
  }
  detail = fmt("two CLI sweep runs produced byte-identical CSV tables "
               "(3 maps, %zu bytes)",
               bytes);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-cli-binary>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];

  criterion(1, "conserved-totals", crit_conservation);
  criterion(2, "complete-conversion", crit_equilibrium);
  criterion(3, "certified-root-approx", crit_certified_root);
  criterion(4, "timescale-verdicts", crit_timescales);
  criterion(5, "relaxation-sign", crit_sign_identity);
  criterion(6, "large-V-expansion", crit_v_expansion);
  criterion(7, "large-kappa-expansion", crit_kappa_expansion);
  criterion(8, "kappa-sensitivities", crit_sensitivity);
  criterion(9, "reduced-sign-conflict", crit_probe);
  criterion(10, "sweep-reference-table", crit_sweep_table);
  criterion(11, "cli-determinism",
            [&](std::string& d) { return crit_cli_determinism(cli, d); });

  std::printf("summary: %d/11 criteria passed\n", 11 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
