#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hosc/integrators.hpp"
#include "hosc/model.hpp"
#include "hosc/trajectory.hpp"

namespace hosc {

/// Which model to build and where it starts.
struct ModelSpec {
  /// "double_pendulum" or "spring_chain".
  std::string name = "double_pendulum";
  Vector alphas{1.0, 1.0};
  Vector lengths{1.0, 1.0};
  /// "standard" for the double pendulum start used throughout (depends on eps),
  /// "explicit" to use x0 / y0 below.
  std::string initial = "standard";
  Vector x0;
  Vector y0;
};

struct SweepConfig {
  ModelSpec model;
  double epsilon = 1e-3;
  std::vector<MethodKind> methods{MethodKind::Impulse, MethodKind::Mollified,
                                  MethodKind::Projected};
  /// Positive and strictly descending.
  std::vector<double> stepsizes;
  double t_end = 10.0;
  /// Per-method micro step divisors (h_micro = eps / divisor).
  std::map<MethodKind, int> micro_divisor{
      {MethodKind::Impulse, 1000}, {MethodKind::Mollified, 100}, {MethodKind::Projected, 100}};
  double h_ref = 1e-3;
  std::string out;
  int stride = 1;
  int workers = 1;

  int micro_divisor_for(MethodKind kind) const;
};

/// Defaults for the stepsize sweep: eps = 1e-3, h = 2^-2 .. 2^-9.
SweepConfig default_convergence_config();
/// Defaults for the action study: eps = 1e-2, h = 0.05.
SweepConfig default_action_config();

/// Throws ConfigError on malformed input.
SweepConfig parse_config(std::string_view json_text);
SweepConfig load_config(const std::string& path);
/// Serialises every field explicitly.
std::string dump_config(const SweepConfig& cfg);
void validate(const SweepConfig& cfg);

SystemPtr build_system(const ModelSpec& model, double epsilon);
State initial_state(const ModelSpec& model, double epsilon);

struct SweepRow {
  MethodKind method = MethodKind::Projected;
  double h = 0.0;
  double max_err_x = 0.0;
  double max_err_Py = 0.0;
  double max_action_drift = 0.0;
  double wall_time = 0.0;
  /// "ok" or the error kind of a failed run.
  std::string status = "ok";
  std::string message;
};

struct ActionSeries {
  MethodKind method = MethodKind::Projected;
  double h = 0.0;
  std::vector<double> times;
  std::vector<Vector> actions;
};

struct SweepResult {
  /// Ordered by (method as configured, h as configured).
  std::vector<SweepRow> rows;
  /// Filled by the action study only.
  std::vector<ActionSeries> series;

  bool all_ok() const;
  const SweepRow* find(MethodKind method, double h) const;
};

/// Reference via the effective constrained system, then every
/// method x stepsize run with error metrics and action drift. Writes the
/// summary CSV (and a wall-time sidecar) when cfg.out is set.
SweepResult run_convergence_sweep(const SweepConfig& cfg);

/// Same runs as the sweep, additionally keeping the action time series;
/// writes the summary to cfg.out and the series next to it.
SweepResult run_action_study(const SweepConfig& cfg);

/// One method at one stepsize with full diagnostics; writes the per-step CSV
/// when cfg.out is set.
Trajectory run_single(const SweepConfig& cfg);

// CSV serialisation. All floats use 17 significant digits, LF line endings.
std::string format_real(double value);
std::string sweep_csv(const SweepResult& result);
std::string timing_csv(const SweepResult& result);
std::string series_csv(const SweepResult& result);
std::string trajectory_csv(const Trajectory& traj);
void write_text_file(const std::string& path, const std::string& text);
/// "runs/out.csv" -> "runs/out.<tag>.csv"
std::string sidecar_path(const std::string& path, std::string_view tag);

/// Least-squares slope of log2(err) against log2(h).
double fitted_log_slope(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace hosc
