#pragma once

#include <span>
#include <vector>

#include "hosc/model.hpp"
#include "hosc/trajectory.hpp"

namespace hosc {

/// Actions (adiabatic invariants) of a near-manifold state, one per stiff
/// mode: I_k = E_k / omega_k where E_k is the energy of pencil mode k,
///   c_k = v_k^T M (x - X),  c_k' = v_k^T y,
///   E_k = 1/2 c_k'^2 + 1/2 (omega_k / eps)^2 c_k^2,
/// with X = alpha(x) and (omega_k, v_k) taken at X.
Vector compute_actions(const OscillatorySystem& sys, std::span<const double> x,
                       std::span<const double> y);

struct ResonanceMonitor {
  /// min_{j != k} |omega_j - omega_k|
  double min_gap;
  /// min |omega_j +- omega_k +- omega_l| over all index triples
  double min_combo;
};

/// Both values are +inf for fewer than two frequencies.
ResonanceMonitor resonance_monitor(std::span<const double> omegas);

/// Smallest stiff pencil eigenvalue at a manifold point: the best convexity
/// constant of V across the manifold.
double convexity_check(const OscillatorySystem& sys, std::span<const double> X);

/// Energy, actions, frequency monitors and |g(x)|_inf of a full-system state.
DiagnosticsRecord full_diagnostics(const OscillatorySystem& sys, const State& s);

/// Largest |I_k(t_n) - I_k(t_0)| over the recorded samples.
double max_action_drift(const Trajectory& traj);

struct ErrorMetrics {
  double max_err_x = 0.0;
  double max_err_Py = 0.0;
  std::vector<double> times;
  std::vector<double> err_x;
  std::vector<double> err_Py;
};

/// Max-norm errors |x_n - X(t_n)| and |P(x_n) y_n - Y(t_n)| against a
/// reference, maximised over the samples of `traj`. The reference is
/// interpolated linearly in time; samples outside its time span raise
/// TimeMismatch.
ErrorMetrics error_metrics(const Trajectory& traj, const Trajectory& ref,
                           const OscillatorySystem& sys);

/// Reference state at time t by linear interpolation.
State interpolate(const Trajectory& ref, double t);

}  // namespace hosc
