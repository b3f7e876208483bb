#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lipokin/integrator.hpp"
#include "lipokin/params.hpp"
#include "lipokin/simulate.hpp"
#include "oracles.hpp"

using namespace lipokin;

namespace {

const VectorField kDecay{
    1, [](double, std::span<const double> y, std::span<double> dy) {
      dy[0] = -y[0];
    },
    {}};

Solution integrate_decay(const IntegratorConfig& cfg) {
  const double y0 = 1.0;
  return integrate(kDecay, std::span<const double>(&y0, 1), cfg);
}

}  // namespace

TEST_CASE("linear test equation reaches exp(-1)") {
  IntegratorConfig cfg;
  cfg.t_end = 1.0;

  // The explicit 4(5) pair lands within rtol of the exact endpoint.
  cfg.method = Method::Dopri45;
  Solution s = integrate_decay(cfg);
  CHECK(std::abs(s.states.back() - std::exp(-1.0)) < cfg.rtol);

  // The stiff default accumulates global error beyond the local tolerance;
  // hold it to the same 100x budget used for the conservation checks.
  cfg.method = Method::Rosenbrock23;
  s = integrate_decay(cfg);
  CHECK(std::abs(s.states.back() - std::exp(-1.0)) < 100.0 * cfg.rtol);
}

TEST_CASE("fixed-step error ratios match the advertised orders") {
  auto endpoint_error = [](Method m, double h) {
    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    cfg.fixed_step = true;
    cfg.initial_step = h;
    cfg.method = m;
    return std::abs(integrate_decay(cfg).states.back() - std::exp(-1.0));
  };
  // advancing order 2 -> halving h divides the global error by about 4
  const double r23 = endpoint_error(Method::Rosenbrock23, 0.05) /
                     endpoint_error(Method::Rosenbrock23, 0.025);
  CHECK(r23 > 3.4);
  CHECK(r23 < 4.6);
  // advancing order 5 -> factor about 32
  const double r45 = endpoint_error(Method::Dopri45, 0.05) /
                     endpoint_error(Method::Dopri45, 0.025);
  CHECK(r45 > 24.0);
  CHECK(r45 < 40.0);
}

TEST_CASE("tightening tolerances tightens the endpoint error") {
  auto err_at = [](double rtol) {
    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    cfg.rtol = rtol;
    cfg.atol = rtol * 1e-2;
    return std::abs(integrate_decay(cfg).states.back() - std::exp(-1.0));
  };
  CHECK(err_at(1e-6) > 10.0 * err_at(1e-10));
}

TEST_CASE("dense output interpolates between accepted points") {
  IntegratorConfig cfg;
  cfg.t_end = 1.0;
  const Solution s = integrate_decay(cfg);
  for (double t = 0.05; t < 1.0; t += 0.037)
    CHECK(std::abs(s.sample(t)[0] - std::exp(-t)) < 1e-6);
}

TEST_CASE("Michaelis-Menten event: s = 1/2 at t = 1/2 + ln 2") {
  ModelParams p;  // K = 1
  p.kappa = 0.0;  // pure MM decay of s
  IntegratorConfig cfg;
  cfg.t_end = 5.0;
  const EventSpec ev{
      "half_s",
      [](double, std::span<const double> y) { return y[0] - 0.5; }, -1};
  const Trajectory traj =
      simulate_full(p, cfg, std::span<const EventSpec>(&ev, 1));
  const EventRecord* rec = traj.find_event("half_s");
  REQUIRE(rec != nullptr);
  CHECK(std::abs(rec->time - testutil::mm_time_to(1.0, 0.5)) < 1e-5);
  // event invariant: residual of the target at the resolved state < atol
  CHECK(std::abs(rec->state[0] - 0.5) < cfg.atol);

  SUBCASE("event idempotence: rerun to the event time") {
    IntegratorConfig cfg2;
    cfg2.t_end = rec->time;
    const Trajectory again = simulate_full(p, cfg2);
    CHECK(std::abs(again.state(again.size() - 1).s - rec->state[0]) < 1e-7);
  }
}

TEST_CASE("event directions select the matching crossings") {
  const VectorField osc{
      2, [](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
      },
      {}};
  const std::vector<double> y0{1.0, 0.0};  // y[0](t) = cos t
  IntegratorConfig cfg;
  cfg.t_end = 7.0;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;
  auto level = [](double, std::span<const double> y) { return y[0]; };
  const std::vector<EventSpec> events{
      {"down", level, -1}, {"up", level, +1}, {"any", level, 0}};
  const Solution s = integrate(osc, y0, cfg, events);

  const double half_pi = std::numbers::pi / 2.0;
  REQUIRE(s.find_event("down") != nullptr);
  REQUIRE(s.find_event("up") != nullptr);
  CHECK(std::abs(s.find_event("down")->time - half_pi) < 1e-6);
  CHECK(std::abs(s.find_event("up")->time - 3.0 * half_pi) < 1e-6);
  // the undirected event fires on both crossings inside [0, 7]
  int any_count = 0;
  double prev = -1.0;
  for (const auto& e : s.events) {
    CHECK(e.time >= prev);  // chronological order
    prev = e.time;
    if (e.label == "any") ++any_count;
  }
  CHECK(any_count == 2);
}

TEST_CASE("stop condition ends the run early with SteadyState") {
  IntegratorConfig cfg;
  cfg.t_end = 50.0;
  const double y0 = 1.0;
  const Solution s =
      integrate(kDecay, std::span<const double>(&y0, 1), cfg, {},
                [](double, std::span<const double> y) { return y[0] < 1e-4; });
  CHECK(s.reason == StopReason::SteadyState);
  CHECK(s.times.back() < 12.0);
  CHECK(s.states.back() < 1e-4 + 1e-8);
}

TEST_CASE("stop_after_events halts once all events fired") {
  IntegratorConfig cfg;
  cfg.t_end = 50.0;
  cfg.stop_after_events = true;
  cfg.store_trajectory = false;
  const double y0 = 1.0;
  const EventSpec ev{
      "third",
      [](double, std::span<const double> y) { return y[0] - 1.0 / 3.0; }, -1};
  const Solution s = integrate(kDecay, std::span<const double>(&y0, 1), cfg,
                               std::span<const EventSpec>(&ev, 1));
  CHECK(s.reason == StopReason::AllEventsFired);
  CHECK(s.size() == 2);  // endpoints only when the trajectory is not stored
  REQUIRE(s.events.size() == 1);
  CHECK(std::abs(s.events[0].state[0] - 1.0 / 3.0) < cfg.atol);
  CHECK(std::abs(s.events[0].time - std::log(3.0)) < 1e-5);
}

TEST_CASE("analytic Jacobian of the closed system matches differences") {
  ModelParams p;
  p.K = 0.7;
  p.L = 2.0;
  p.V = 1.5;
  p.kappa = 3.0;
  const VectorField f = full_vector_field(p);
  REQUIRE(f.jacobian);
  const std::vector<double> y{0.6, 0.25, 0.1, 0.3};
  std::vector<double> J(16);
  f.jacobian(0.0, y, J);
  for (int j = 0; j < 4; ++j) {
    const double h = 1e-7;
    std::vector<double> yp = y, ym = y, fp(4), fm(4);
    yp[j] += h;
    ym[j] -= h;
    f.rhs(0.0, yp, fp);
    f.rhs(0.0, ym, fm);
    for (int i = 0; i < 4; ++i)
      CHECK(J[i * 4 + j] ==
            doctest::Approx((fp[i] - fm[i]) / (2.0 * h)).epsilon(1e-6));
  }
}

TEST_CASE("stiffness probe") {
  const VectorField stiff{
      1, [](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = -50.0 * y[0];
      },
      {}};
  const double y0 = 1.0;
  CHECK(stiffness_probe(stiff, std::span<const double>(&y0, 1), 1.0 / 50.0) ==
        doctest::Approx(1.0).epsilon(0.05));

  const VectorField zero{
      2, [](double, std::span<const double>, std::span<double> dy) {
        dy[0] = 0.0;
        dy[1] = 0.0;
      },
      {}};
  const std::vector<double> z{0.3, 0.4};
  CHECK(stiffness_probe(zero, z, 0.5) == 0.0);

  // the q-relaxation rate ~ L*V makes the closed system stiff at L = V = 100
  ModelParams p;
  p.L = 100.0;
  p.V = 100.0;
  const std::vector<double> x{1.0, 0.001, 0.0, 0.0};
  CHECK(stiffness_probe(full_vector_field(p), x, 0.1) > 50.0);
  ModelParams unit;
  CHECK(stiffness_probe(full_vector_field(unit), x, 0.1) < 2.0);
}

TEST_CASE("single-threaded reruns are bitwise identical") {
  ModelParams p;
  p.kappa = 16.0;
  p.V = 2.0;
  IntegratorConfig cfg;
  cfg.t_end = 10.0;
  const Trajectory a = simulate_full(p, cfg);
  const Trajectory b = simulate_full(p, cfg);
  REQUIRE(a.size() == b.size());
  CHECK(a.sol.times == b.sol.times);
  CHECK(a.sol.states == b.sol.states);
  CHECK(a.sol.derivs == b.sol.derivs);
}

TEST_CASE("failure modes raise IntegrationError with the last state") {
  IntegratorConfig cfg;
  cfg.t_end = 10.0;
  cfg.max_steps = 5;
  const double y0 = 1.0;
  try {
    integrate(kDecay, std::span<const double>(&y0, 1), cfg);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.last_time > 0.0);
    CHECK(e.last_state.size() == 1);
  }

  const VectorField bad{
      1, [](double, std::span<const double>, std::span<double> dy) {
        dy[0] = std::nan("");
      },
      {}};
  IntegratorConfig cfg2;
  cfg2.t_end = 1.0;
  CHECK_THROWS_AS(integrate(bad, std::span<const double>(&y0, 1), cfg2),
                  IntegrationError);
}

TEST_CASE("config validation") {
  IntegratorConfig cfg;
  cfg.t_end = 1.0;
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.rtol = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.atol = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.t_end = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.max_steps = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
