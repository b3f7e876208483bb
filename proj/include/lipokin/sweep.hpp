#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lipokin/integrator.hpp"
#include "lipokin/params.hpp"

namespace lipokin {

/// Event thresholds used by the parametric experiments, in percent:
///   S: substrate drops to (1 - percent/100) of its initial value
///   P: MG reaches percent/100 of its equilibrium 1 + q0/L
///   F: FA reaches percent/100 of its equilibrium 2 + q0/L
struct ThresholdTarget {
  enum class Kind { S, P, F };
  Kind kind = Kind::S;
  double percent = 50.0;

  void validate() const;
};

enum class CellStatus { Ok, NotReached, BaselineNotReached, Failed };
const char* cell_status_name(CellStatus s);

struct MetricOutcome {
  CellStatus status = CellStatus::Ok;
  double value = 0.0;  // NaN unless status is Ok
};

/// Time at which the threshold event fires, or NotReached if it does not
/// fire before cfg.t_end. For same-percent thresholds and q0 = 0 the S time
/// never exceeds the P or F time (producing x% of either product requires
/// more than x% of the substrate to be gone).
MetricOutcome time_to_threshold(const ModelParams& p,
                                const ThresholdTarget& target,
                                const IntegratorConfig& cfg);

/// (t_kappa - t_0) / t_0 against the kappa = 0 baseline of the same target.
MetricOutcome relative_change(const ModelParams& p,
                              const ThresholdTarget& target,
                              const IntegratorConfig& cfg);

/// Transacylation share of DG consumption evaluated at the threshold event.
MetricOutcome fraction_at_threshold(const ModelParams& p,
                                    const ThresholdTarget& target,
                                    const IntegratorConfig& cfg);

enum class Metric {
  TimeS,
  TimeP,
  TimeF,
  TaFraction,   // transacylation fraction at the S threshold event
  RelChangeS,
  RelChangeP,
  RelChangeF,
};
const char* metric_stem(Metric m);
std::string metric_name(Metric m, double threshold_percent);

/// Cartesian (V, kappa) grid with fixed K, L, q0 and threshold percentages.
struct SweepGrid {
  std::vector<double> v_values;
  std::vector<double> kappa_values;
  double K = 1.0;
  double L = 1.0;
  double q0 = 0.0;
  std::vector<double> thresholds = {50.0};

  /// log10-equispaced values, count points over [10^lo, 10^hi].
  static std::vector<double> log_spaced(double log10_lo, double log10_hi,
                                        std::size_t count);
  void validate() const;
};

/// One metric over the grid, kappa-major: values[ik * nv + iv].
struct MetricMap {
  Metric metric = Metric::TimeS;
  double threshold = 50.0;
  std::vector<double> values;
  std::vector<CellStatus> status;
};

struct SweepResult {
  SweepGrid grid;
  IntegratorConfig cfg;
  std::vector<MetricMap> maps;
  std::vector<std::string> cell_errors;  // "iv=..,ik=..: message", sorted
  std::size_t cells_failed = 0;
};

/// Run the requested metrics over the grid. Each cell is integrated once
/// with all threshold events; kappa = 0 baselines for the relative-change
/// metrics are shared per V column. Cell failures are recorded, never fatal.
/// threads = 1 is the sequential reference mode; higher values split cells
/// across worker threads with results assembled by index, so output is
/// identical either way.
SweepResult run_sweep(const SweepGrid& grid, const std::vector<Metric>& metrics,
                      const IntegratorConfig& cfg, unsigned threads = 1);

/// Staged-percentage curves at fixed kappa: for each x in x_values and each
/// V, the relative time change of processing x% TG and of producing
/// (100-x)% MG and (100-x)% FA (the complementary product stages that pair
/// with an x% substrate stage).
struct StagedCurves {
  std::vector<double> v_values;
  std::vector<double> x_values;
  // x-major: rel_*[ix * nv + iv]
  std::vector<double> rel_s, rel_p, rel_f;
  std::vector<CellStatus> status_s, status_p, status_f;
};
StagedCurves staged_relative_changes(const ModelParams& base,
                                     const std::vector<double>& v_values,
                                     const std::vector<double>& x_values,
                                     const IntegratorConfig& cfg,
                                     unsigned threads = 1);

// Serialization. CSV rows are kappa-major with V varying fastest, numbers
// printed with 17 significant digits; reruns are byte-identical.
void write_metric_map_csv(std::ostream& os, const SweepResult& res,
                          std::size_t map_index);
void write_staged_curves_csv(std::ostream& os, const StagedCurves& curves);

}  // namespace lipokin
