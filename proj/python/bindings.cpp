// Python bindings for the lipolysis kinetics core: parameters, simulation,
// quasi-steady analysis, reduced models, kappa sensitivities and sweeps.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lipokin/errors.hpp"
#include "lipokin/integrator.hpp"
#include "lipokin/io.hpp"
#include "lipokin/kinetics.hpp"
#include "lipokin/params.hpp"
#include "lipokin/qssa.hpp"
#include "lipokin/sensitivity.hpp"
#include "lipokin/simulate.hpp"
#include "lipokin/sweep.hpp"

namespace py = pybind11;
using namespace lipokin;

PYBIND11_MODULE(_lipokin, m) {
  m.doc() =
      "Kinetics of the TG -> DG -> MG hydrolysis chain with DG "
      "transacylation: simulation, quasi-steady analysis, reduced models, "
      "kappa sensitivities and parametric sweeps.";

  py::register_exception<NoRootError>(m, "NoRootError", PyExc_ValueError);
  py::register_exception<IntegrationError>(m, "IntegrationError",
                                           PyExc_RuntimeError);

  // ----------------------------------------------------------------- params
  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def(py::init([](double K, double L, double V, double kappa, double q0) {
             ModelParams p;
             p.K = K;
             p.L = L;
             p.V = V;
             p.kappa = kappa;
             p.q0 = q0;
             return p;
           }),
           py::arg("K") = 1.0, py::arg("L") = 1.0, py::arg("V") = 1.0,
           py::arg("kappa") = 1.0, py::arg("q0") = 0.0)
      .def_readwrite("K", &ModelParams::K)
      .def_readwrite("L", &ModelParams::L)
      .def_readwrite("V", &ModelParams::V)
      .def_readwrite("kappa", &ModelParams::kappa)
      .def_readwrite("q0", &ModelParams::q0)
      .def("validate", &ModelParams::validate)
      .def("__repr__", [](const ModelParams& p) {
        std::ostringstream os;
        os << "ModelParams(K=" << p.K << ", L=" << p.L << ", V=" << p.V
           << ", kappa=" << p.kappa << ", q0=" << p.q0 << ")";
        return os.str();
      });

  py::class_<DimensionalParams>(m, "DimensionalParams")
      .def(py::init([](double v1_max, double k1_m, double v2_max, double k2_m,
                       double sigma, double s0, double q0) {
             DimensionalParams d;
             d.v1_max = v1_max;
             d.k1_m = k1_m;
             d.v2_max = v2_max;
             d.k2_m = k2_m;
             d.sigma = sigma;
             d.s0 = s0;
             d.q0 = q0;
             return d;
           }),
           py::arg("v1_max"), py::arg("k1_m"), py::arg("v2_max"),
           py::arg("k2_m"), py::arg("sigma"), py::arg("s0"),
           py::arg("q0") = 0.0)
      .def_readwrite("v1_max", &DimensionalParams::v1_max)
      .def_readwrite("k1_m", &DimensionalParams::k1_m)
      .def_readwrite("v2_max", &DimensionalParams::v2_max)
      .def_readwrite("k2_m", &DimensionalParams::k2_m)
      .def_readwrite("sigma", &DimensionalParams::sigma)
      .def_readwrite("s0", &DimensionalParams::s0)
      .def_readwrite("q0", &DimensionalParams::q0)
      .def("validate", &DimensionalParams::validate);

  m.def("nondimensionalize", &nondimensionalize, py::arg("dimensional"),
        "Collapse dimensional kinetic constants into (K, L, V, kappa, q0).");

  // --------------------------------------------------------------- kinetics
  m.def("rate_m1", [](double s, double K) { return rate_m1(s, K); },
        py::arg("s"), py::arg("K"), "TG hydrolysis rate s/(K+s).");
  m.def("rate_m2", [](double q) { return rate_m2(q); }, py::arg("q"),
        "DG hydrolysis rate q/(1+q).");
  m.def("rate_d", [](double q, double kappa) { return rate_d(q, kappa); },
        py::arg("q"), py::arg("kappa"),
        "Total DG consumption m2(q) + 2*kappa*q^2.");
  m.def("transacylation_fraction", &transacylation_fraction, py::arg("q"),
        py::arg("kappa"),
        "Share of DG consumption going through transacylation.");

  py::class_<State>(m, "State")
      .def_readonly("s", &State::s)
      .def_readonly("q", &State::q)
      .def_readonly("p", &State::p)
      .def_readonly("f", &State::f)
      .def("__repr__", [](const State& x) {
        std::ostringstream os;
        os << "State(s=" << x.s << ", q=" << x.q << ", p=" << x.p
           << ", f=" << x.f << ")";
        return os.str();
      });

  py::class_<ConservationResiduals>(m, "ConservationResiduals")
      .def_readonly("glycerol", &ConservationResiduals::glycerol)
      .def_readonly("acyl", &ConservationResiduals::acyl);
  m.def("conservation_residuals", &conservation_residuals, py::arg("state"),
        py::arg("L"), py::arg("q0"),
        "Residuals of the two conserved linear combinations.");

  // ------------------------------------------------------------- integrator
  py::enum_<Method>(m, "Method")
      .value("Rosenbrock23", Method::Rosenbrock23)
      .value("Dopri45", Method::Dopri45);

  py::enum_<StopReason>(m, "StopReason")
      .value("ReachedEnd", StopReason::ReachedEnd)
      .value("SteadyState", StopReason::SteadyState)
      .value("AllEventsFired", StopReason::AllEventsFired);

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init<>())
      .def_readwrite("rtol", &IntegratorConfig::rtol)
      .def_readwrite("atol", &IntegratorConfig::atol)
      .def_readwrite("t_end", &IntegratorConfig::t_end)
      .def_readwrite("max_steps", &IntegratorConfig::max_steps)
      .def_readwrite("method", &IntegratorConfig::method)
      .def_readwrite("store_trajectory", &IntegratorConfig::store_trajectory)
      .def_readwrite("stop_after_events", &IntegratorConfig::stop_after_events)
      .def("validate", &IntegratorConfig::validate);

  // --------------------------------------------------------------- simulate
  py::enum_<ModelKind>(m, "ModelKind")
      .value("Full", ModelKind::Full)
      .value("Qssa0L", ModelKind::Qssa0L)
      .value("Qssa1L", ModelKind::Qssa1L)
      .value("Qssa1V", ModelKind::Qssa1V)
      .value("Qssa1Kappa", ModelKind::Qssa1Kappa);
  m.def("model_kind_name", &model_kind_name, py::arg("model"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly(
          "times",
          [](const Trajectory& t) { return t.sol.times; })
      .def_property_readonly(
          "events",
          [](const Trajectory& t) {
            std::vector<std::pair<std::string, double>> out;
            for (const EventRecord& e : t.events())
              out.emplace_back(e.label, e.time);
            return out;
          })
      .def_property_readonly(
          "stop_reason", [](const Trajectory& t) { return t.sol.reason; })
      .def_property_readonly("model",
                             [](const Trajectory& t) { return t.model; })
      .def("__len__", &Trajectory::size)
      .def("state", &Trajectory::state, py::arg("i"))
      .def("at_time", &Trajectory::at_time, py::arg("t"));

  m.def("simulate_full",
        [](const ModelParams& p, const IntegratorConfig& cfg) {
          return simulate_full(p, cfg);
        },
        py::arg("params"), py::arg("config"),
        "Integrate the closed 4-species system from (1, q0, 0, 0).");
  m.def("simulate_reduced", &simulate_reduced, py::arg("params"),
        py::arg("model"), py::arg("config"),
        "Integrate a reduced slow model over (s, p, f) from (1, 0, 0).");

  // ------------------------------------------------------------------- qssa
  py::class_<QssaPoint> qp(m, "QssaPoint");
  py::enum_<QssaPoint::How>(qp, "How")
      .value("ExactRoot", QssaPoint::How::ExactRoot)
      .value("QuadraticApprox", QssaPoint::How::QuadraticApprox);
  qp.def_readonly("q_tilde", &QssaPoint::q_tilde)
      .def_readonly("input_I", &QssaPoint::input_I)
      .def_readonly("method", &QssaPoint::method)
      .def_readonly("valid_half", &QssaPoint::valid_half);

  m.def("qssa_root", &qssa_root, py::arg("I"), py::arg("kappa"),
        "Root of m2(q) + 2*kappa*q^2 = I.");
  m.def("solve_qssa", &solve_qssa, py::arg("s"), py::arg("params"),
        "Exact quasi-steady DG level at substrate s.");
  m.def("qssa_approx", &qssa_approx, py::arg("I"), py::arg("kappa"),
        "Closed-form root of the quadratic model.");
  m.def("vkappa_condition", &vkappa_condition, py::arg("V"), py::arg("kappa"),
        "Sufficient condition V >= 4/(1+2*kappa) for the certified range.");

  py::class_<PerturbationSeries>(m, "PerturbationSeries")
      .def_readonly("times", &PerturbationSeries::times)
      .def_readonly("pi", &PerturbationSeries::pi)
      .def_readonly("qdot", &PerturbationSeries::qdot)
      .def_readonly("checked", &PerturbationSeries::checked)
      .def_readonly("violations", &PerturbationSeries::violations);
  m.def("perturbation", &perturbation, py::arg("trajectory"),
        py::arg("params"), py::arg("zero_tol") = 1e-10,
        "Off-manifold perturbation pi = q - q~(s) with the sign identity "
        "tally.");

  py::class_<TimescaleReport>(m, "TimescaleReport")
      .def_readonly("t1", &TimescaleReport::t1)
      .def_readonly("t2", &TimescaleReport::t2)
      .def_readonly("t3", &TimescaleReport::t3)
      .def_readonly("t_estimate", &TimescaleReport::t_estimate)
      .def_readonly("t_bound", &TimescaleReport::t_bound)
      .def_readonly("t_ref_exact", &TimescaleReport::t_ref_exact)
      .def_readonly("t_ref_simple", &TimescaleReport::t_ref_simple)
      .def_readonly("percentile", &TimescaleReport::percentile)
      .def_readonly("t_m", &TimescaleReport::t_m)
      .def_readonly("s_m", &TimescaleReport::s_m)
      .def_readonly("q_tilde_m", &TimescaleReport::q_tilde_m)
      .def_readonly("q_tilde_0", &TimescaleReport::q_tilde_0)
      .def_readonly("theta0", &TimescaleReport::theta0)
      .def_readonly("theta_m", &TimescaleReport::theta_m)
      .def_readonly("psi", &TimescaleReport::psi)
      .def_readonly("kappa_bound", &TimescaleReport::kappa_bound)
      .def_readonly("v_bound", &TimescaleReport::v_bound)
      .def_readonly("condition_full", &TimescaleReport::condition_full)
      .def_readonly("condition_simple", &TimescaleReport::condition_simple)
      .def_readonly("condition_kappa", &TimescaleReport::condition_kappa)
      .def_readonly("condition_v", &TimescaleReport::condition_v);
  m.def("timescales", &timescales, py::arg("params"), py::arg("trajectory"),
        py::arg("percentile") = 90.0,
        "Relaxation / processing timescale diagnostics from the DG peak.");

  py::enum_<Regime>(m, "Regime")
      .value("LargeL", Regime::LargeL)
      .value("LargeV", Regime::LargeV)
      .value("LargeKappa", Regime::LargeKappa);
  m.def("regime_epsilon", &regime_epsilon, py::arg("params"),
        py::arg("regime"), "Small parameter 1/L, 1/V or 1/sqrt(kappa).");
  m.def("reconstruct_q", &reconstruct_q, py::arg("s"), py::arg("params"),
        py::arg("model"),
        "DG level a reduced model reports at substrate s.");
  m.def("expansion_q_v", &expansion_q_v, py::arg("s"), py::arg("params"),
        py::arg("order"), "Partial sum of the large-V DG expansion.");
  m.def("expansion_q_kappa", &expansion_q_kappa, py::arg("s"),
        py::arg("params"), py::arg("order"),
        "Partial sum of the large-kappa DG expansion.");

  // ------------------------------------------------------------ sensitivity
  py::class_<Solution>(m, "Solution")
      .def_readonly("dim", &Solution::dim)
      .def_readonly("times", &Solution::times)
      .def_property_readonly(
          "stop_reason", [](const Solution& s) { return s.reason; })
      .def("__len__", &Solution::size)
      .def("state",
           [](const Solution& s, std::size_t i) {
             const auto v = s.state(i);
             return std::vector<double>(v.begin(), v.end());
           },
           py::arg("i"))
      .def("sample", &Solution::sample, py::arg("t"));

  m.def("integrate_sensitivity_full", &integrate_sensitivity_full,
        py::arg("params"), py::arg("config"),
        "Forward kappa-sensitivities along the full system (8 components: "
        "s, q, p, f, ds/dk, dq/dk, dp/dk, df/dk).");
  m.def("integrate_sensitivity_qssa", &integrate_sensitivity_qssa,
        py::arg("params"), py::arg("config"),
        "Quasi-steady sensitivity flow (s~, ds~/dkappa).");

  py::class_<QssaSensitivityPoint>(m, "QssaSensitivityPoint")
      .def_readonly("q_tilde", &QssaSensitivityPoint::q_tilde)
      .def_readonly("mu", &QssaSensitivityPoint::mu)
      .def_readonly("dq_dk", &QssaSensitivityPoint::dq_dk)
      .def_readonly("dp_dk", &QssaSensitivityPoint::dp_dk)
      .def_readonly("vdot", &QssaSensitivityPoint::vdot);
  m.def("qssa_sensitivity_point", &qssa_sensitivity_point, py::arg("s_tilde"),
        py::arg("ds_dk"), py::arg("params"));

  py::class_<SensitivityState>(m, "SensitivityState")
      .def_readonly("ds", &SensitivityState::ds)
      .def_readonly("dq", &SensitivityState::dq)
      .def_readonly("dp", &SensitivityState::dp)
      .def_readonly("df", &SensitivityState::df);
  m.def("fd_sensitivity_oracle",
        [](const ModelParams& p, const std::vector<double>& grid, double h,
           double rtol, double atol) {
          return fd_sensitivity_oracle(p, grid, h, rtol, atol);
        },
        py::arg("params"), py::arg("t_grid"), py::arg("h") = 1e-4,
        py::arg("rtol") = 1e-12, py::arg("atol") = 1e-14,
        "Central-difference kappa-sensitivity oracle on a time grid.");

  py::class_<DiscrepancyReport>(m, "DiscrepancyReport")
      .def_readonly("found", &DiscrepancyReport::found)
      .def_readonly("t_begin", &DiscrepancyReport::t_begin)
      .def_readonly("t_end", &DiscrepancyReport::t_end)
      .def("duration", &DiscrepancyReport::duration);
  m.def("sign_discrepancy_probe", &sign_discrepancy_probe, py::arg("params"),
        py::arg("config"), py::arg("zero_tol") = 1e-9,
        "Earliest interval where the reduced model predicts the opposite "
        "sign of the MG kappa-response.");

  // ------------------------------------------------------------------ sweep
  py::class_<ThresholdTarget> tt(m, "ThresholdTarget");
  py::enum_<ThresholdTarget::Kind>(tt, "Kind")
      .value("S", ThresholdTarget::Kind::S)
      .value("P", ThresholdTarget::Kind::P)
      .value("F", ThresholdTarget::Kind::F);
  tt.def(py::init([](ThresholdTarget::Kind kind, double percent) {
           ThresholdTarget t;
           t.kind = kind;
           t.percent = percent;
           return t;
         }),
         py::arg("kind"), py::arg("percent") = 50.0)
      .def_readwrite("kind", &ThresholdTarget::kind)
      .def_readwrite("percent", &ThresholdTarget::percent)
      .def("validate", &ThresholdTarget::validate);

  py::enum_<CellStatus>(m, "CellStatus")
      .value("Ok", CellStatus::Ok)
      .value("NotReached", CellStatus::NotReached)
      .value("BaselineNotReached", CellStatus::BaselineNotReached)
      .value("Failed", CellStatus::Failed);
  m.def("cell_status_name", &cell_status_name, py::arg("status"));

  py::class_<MetricOutcome>(m, "MetricOutcome")
      .def_readonly("status", &MetricOutcome::status)
      .def_readonly("value", &MetricOutcome::value);
  m.def("time_to_threshold", &time_to_threshold, py::arg("params"),
        py::arg("target"), py::arg("config"));
  m.def("relative_change", &relative_change, py::arg("params"),
        py::arg("target"), py::arg("config"),
        "Relative time change against the kappa = 0 baseline.");
  m.def("fraction_at_threshold", &fraction_at_threshold, py::arg("params"),
        py::arg("target"), py::arg("config"),
        "Transacylation share of DG consumption at the threshold event.");

  py::enum_<Metric>(m, "Metric")
      .value("TimeS", Metric::TimeS)
      .value("TimeP", Metric::TimeP)
      .value("TimeF", Metric::TimeF)
      .value("TaFraction", Metric::TaFraction)
      .value("RelChangeS", Metric::RelChangeS)
      .value("RelChangeP", Metric::RelChangeP)
      .value("RelChangeF", Metric::RelChangeF);
  m.def("metric_name", &metric_name, py::arg("metric"),
        py::arg("threshold_percent"));

  py::class_<SweepGrid>(m, "SweepGrid")
      .def(py::init<>())
      .def_readwrite("v_values", &SweepGrid::v_values)
      .def_readwrite("kappa_values", &SweepGrid::kappa_values)
      .def_readwrite("K", &SweepGrid::K)
      .def_readwrite("L", &SweepGrid::L)
      .def_readwrite("q0", &SweepGrid::q0)
      .def_readwrite("thresholds", &SweepGrid::thresholds)
      .def_static("log_spaced", &SweepGrid::log_spaced, py::arg("log10_lo"),
                  py::arg("log10_hi"), py::arg("count"))
      .def("validate", &SweepGrid::validate);

  py::class_<MetricMap>(m, "MetricMap")
      .def_readonly("metric", &MetricMap::metric)
      .def_readonly("threshold", &MetricMap::threshold)
      .def_readonly("values", &MetricMap::values)
      .def_readonly("status", &MetricMap::status);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("maps", &SweepResult::maps)
      .def_readonly("cell_errors", &SweepResult::cell_errors)
      .def_readonly("cells_failed", &SweepResult::cells_failed);

  m.def("run_sweep", &run_sweep, py::arg("grid"), py::arg("metrics"),
        py::arg("config"), py::arg("threads") = 1,
        "Metric maps over a (V, kappa) grid; kappa-major layout "
        "values[ik * nv + iv].",
        py::call_guard<py::gil_scoped_release>());

  py::class_<StagedCurves>(m, "StagedCurves")
      .def_readonly("v_values", &StagedCurves::v_values)
      .def_readonly("x_values", &StagedCurves::x_values)
      .def_readonly("rel_s", &StagedCurves::rel_s)
      .def_readonly("rel_p", &StagedCurves::rel_p)
      .def_readonly("rel_f", &StagedCurves::rel_f)
      .def_readonly("status_s", &StagedCurves::status_s)
      .def_readonly("status_p", &StagedCurves::status_p)
      .def_readonly("status_f", &StagedCurves::status_f);
  m.def("staged_relative_changes", &staged_relative_changes, py::arg("base"),
        py::arg("v_values"), py::arg("x_values"), py::arg("config"),
        py::arg("threads") = 1,
        "Relative stage-time changes for x% TG and the complementary "
        "(100-x)% MG / FA stages.",
        py::call_guard<py::gil_scoped_release>());
}
