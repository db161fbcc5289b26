#pragma once

// Grid sweeps over the operating-parameter space, single-point reports,
// deterministic objective maximization and the dilution probe. Everything
// here is plot-emitting (raw grids), not plotting.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "polsqueeze/metrics.hpp"
#include "polsqueeze/opo_model.hpp"
#include "polsqueeze/two_photon.hpp"
#include "polsqueeze/version.hpp"

namespace polsq {

enum class SweepParam { delta_nu, eta, mu, phi_s, phi_c, tau };
const char* to_string(SweepParam p);
SweepParam sweep_param_from_string(std::string_view s);

enum class AxisScale { linear, log };

struct SweepAxis {
  SweepParam param;
  AxisScale scale = AxisScale::linear;
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

enum class OutputField {
  odm_entries,
  concurrence,
  s_max,
  beta,
  w2,
  r_ps,
  nonclassicality
};
const char* to_string(OutputField f);
OutputField output_field_from_string(std::string_view s);

struct SweepSpec {
  std::vector<SweepAxis> axes;                       // 1..3 axes
  std::vector<std::pair<SweepParam, double>> fixed;  // remaining parameters
  std::vector<OutputField> outputs;
  double delta_tau = 1e-9;
  VvvvVariant variant = VvvvVariant::gaussian;
  QuadConfig quad{};
  int jobs = 1;

  /// 1-3 axes; count >= 2 per axis; min < max; log requires min > 0; every
  /// model parameter (delta_nu, eta, phi_c, tau, and exactly one of mu/phi_s)
  /// appears exactly once across axes and fixed. Throws ValidationError.
  void validate() const;
};

SweepSpec sweep_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json sweep_spec_to_json(const SweepSpec& s);

struct SweepRow {
  std::vector<double> values;  // axis columns then output columns; NaN on error
  std::string error;           // empty when the row evaluated cleanly
};

struct SweepResult {
  SweepSpec spec;
  std::vector<std::string> columns;
  std::vector<SweepRow> rows;  // row-major over axes as listed
  Provenance provenance;
  std::size_t error_count = 0;
};

/// Column names for a spec: axis names in order, then the expansion of each
/// requested output field.
std::vector<std::string> sweep_columns(const SweepSpec& spec);

/// Deterministic row order regardless of the worker-pool size; per-row
/// failures are captured inline, never dropped.
SweepResult run_sweep(const SweepSpec& spec, bool with_timestamp = true);

/// CSV: one header row, LF endings, floats at 17 significant digits.
std::string sweep_result_to_csv(const SweepResult& r);
nlohmann::ordered_json sweep_result_to_json(const SweepResult& r);

// ---------------------------------------------------------------------------

struct PointReport {
  OpoParams params;
  double tau = 0.0;
  double delta_tau = 0.0;
  VvvvVariant variant = VvvvVariant::gaussian;
  PairCorrelations corr;
  TwoPhotonODM odm;
  EntanglementMetrics ent;
  NonclassicalityReport nonclassicality;
  FluxMetrics flux;
  std::vector<std::string> warnings;
};

/// Full single-point pipeline; stage names decorate any propagated error.
PointReport eval_point(const OpoParams& p, double tau, double delta_tau,
                       const QuadConfig& cfg = {},
                       VvvvVariant variant = VvvvVariant::gaussian);

nlohmann::ordered_json point_report_to_json(const PointReport& r,
                                            bool with_timestamp = true);

// ---------------------------------------------------------------------------

enum class Objective { concurrence, w2, beta };
const char* to_string(Objective o);
Objective objective_from_string(std::string_view s);

struct OptimizeBounds {
  SweepParam param;
  double lo = 0.0;
  double hi = 0.0;
  AxisScale scale = AxisScale::log;
};

struct OptimizeSpec {
  Objective objective = Objective::concurrence;
  std::vector<OptimizeBounds> bounds;  // 1..3 free parameters
  std::vector<std::pair<SweepParam, double>> fixed;
  double delta_tau = 1e-9;
  VvvvVariant variant = VvvvVariant::gaussian;
  QuadConfig quad{};
  int grid_per_axis = 12;
  int max_refine_iters = 200;

  void validate() const;
};

struct ScanPoint {
  std::vector<double> coords;  // in bounds order
  double value = 0.0;
  bool failed = false;
};

struct OptimizeResult {
  std::vector<std::pair<SweepParam, double>> best_point;
  double best_value = 0.0;
  std::vector<ScanPoint> scan_trace;
  int evaluations = 0;
  int failures = 0;
};

/// Deterministic coarse log-grid scan followed by a Nelder-Mead style simplex
/// refinement seeded from the best grid cell (no RNG anywhere). Aborts with
/// diagnostics when more than half of the scan evaluations fail.
OptimizeResult find_optimum(const OptimizeSpec& spec);

nlohmann::ordered_json optimize_result_to_json(const OptimizeResult& r,
                                               const OptimizeSpec& spec,
                                               bool with_timestamp = true);

// ---------------------------------------------------------------------------

struct DilutionReport {
  double phi_s = 0.0;
  double delta_tau = 0.0;
  std::vector<double> phi_c;
  std::vector<double> beta;
  std::vector<double> delta_s;  // unclamped diagnostics
  bool increasing_range_found = false;
  int best_run_begin = 0;  // longest strictly-increasing beta run [begin, end]
  int best_run_end = 0;
  bool decreasing_tail = false;  // beta falls after its in-range maximum
};

/// beta(Phi_C) at fixed Phi_S over a log-spaced Phi_C range (>= 8 samples);
/// reports whether a strictly-increasing sub-range exists.
DilutionReport dilution_probe(double phi_s, double phi_c_min, double phi_c_max,
                              int samples, double delta_tau, double eta,
                              double delta_nu, const QuadConfig& cfg = {},
                              VvvvVariant variant = VvvvVariant::gaussian);

nlohmann::ordered_json dilution_report_to_json(const DilutionReport& r,
                                               bool with_timestamp = true);

}  // namespace polsq
