#pragma once

#include <span>

#include "hosc/model.hpp"
#include "hosc/smallmat.hpp"
#include "hosc/trajectory.hpp"

namespace hosc {

/// Stiff frequencies at a manifold point: omegas[k]^2 are the m largest
/// generalized eigenvalues of the pencil (grad^2 V(X), M(X)), ascending;
/// `vectors` holds the matching M-orthonormal eigenvectors as columns.
struct FrequencySet {
  Vector omegas;
  Matrix vectors;
};

/// Throws GapViolation when the d = n - m smallest pencil eigenvalues are not
/// below 1e-6 times the (d+1)-st, i.e. when X is not (close enough to) a
/// manifold point or a frequency collapsed.
FrequencySet frequencies(const OscillatorySystem& sys, std::span<const double> X);

/// Frequencies as functions on the ambient space: omega_k(alpha(x)) with
/// alpha the M-orthogonal position projection.
Vector projected_frequencies(const OscillatorySystem& sys, std::span<const double> x);

/// d omega_k / d x_j (m x n) of the ambient extension above, by central
/// differences. Branches of the +/- evaluations are paired by nearest value.
Matrix grad_frequencies(const OscillatorySystem& sys, std::span<const double> X,
                        double fd_step = 1e-5);

/// F(I, X) = -sum_k I_k grad omega_k(X).
Vector correction_force(const OscillatorySystem& sys, std::span<const double> X,
                        std::span<const double> actions, double fd_step = 1e-5);

/// W(I, X) = sum_k I_k omega_k(X) at a manifold point.
double correction_potential(const OscillatorySystem& sys, std::span<const double> X,
                            std::span<const double> actions);

/// Solution point of the effective constrained system.
struct EffectiveState {
  Vector X;
  Vector Y;
  /// End-of-step velocity multiplier of the last step.
  Vector Lambda;
  Vector I;
  double t = 0.0;
};

/// H_eff = 1/2 Y^T M^{-1} Y + U(X) + W(I, X).
double effective_energy(const OscillatorySystem& sys, const EffectiveState& es);

/// Two-multiplier constrained leapfrog (RATTLE) with force
/// -grad U(X) + F(I, X). Keeps the force at the current point cached so a run
/// costs one force evaluation per step.
class ConstrainedLeapfrog {
 public:
  ConstrainedLeapfrog(const OscillatorySystem& sys, EffectiveState start, double fd_step = 1e-5);

  const EffectiveState& state() const noexcept { return state_; }
  void step(double h);

 private:
  Vector force(std::span<const double> X) const;

  const OscillatorySystem& sys_;
  EffectiveState state_;
  double fd_step_;
  Vector force_;
  CholeskyFactor mass_;
};

EffectiveState rattle_step(const OscillatorySystem& sys, const EffectiveState& es, double h);

/// Reference solution for the full system started at (x0, y0): consistent
/// initial values, actions of (x0, y0), then RATTLE with step h_ref up to
/// t_end. States hold (X, Y); records carry H_eff, I, frequency monitors and
/// the position constraint residual.
Trajectory effective_reference(const OscillatorySystem& sys, std::span<const double> x0,
                               std::span<const double> y0, double h_ref, double t_end);

}  // namespace hosc
