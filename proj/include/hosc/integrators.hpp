#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "hosc/errors.hpp"
#include "hosc/model.hpp"
#include "hosc/trajectory.hpp"

namespace hosc {

/// The three splitting methods. They share the oscillation step (the full
/// system with U = 0 over one macro step) and differ only in the kick force:
///   Impulse    -grad U(x)
///   Mollified  -alpha'(x)^T grad U(alpha(x))
///   Projected  -P(x) grad U(x)
enum class MethodKind { Impulse, Mollified, Projected };

std::string_view to_string(MethodKind kind) noexcept;
std::optional<MethodKind> parse_method(std::string_view name) noexcept;

struct MacroMethod {
  MethodKind kind = MethodKind::Projected;
  double h = 0.0;
  /// Micro stepsize is epsilon / micro_divisor.
  int micro_divisor = 100;
};

/// Kick-drift-kick leapfrog on y' = -[include_slow] grad U - eps^-2 grad V,
/// x' = M^{-1} y. A negative `h_micro` integrates backwards in time.
State stormer_verlet(const OscillatorySystem& sys, State s, double h_micro, long nsteps,
                     bool include_slow);

/// Oscillation step: the full system with U omitted over time h, using
/// ceil(|h| / (eps / micro_divisor)) equal micro steps.
State fast_flow(const OscillatorySystem& sys, const State& s, double h, int micro_divisor);

/// Kick force of the chosen method at position x (the negative of the
/// effective slow gradient).
Vector kick_force(const OscillatorySystem& sys, MethodKind kind, std::span<const double> x);

State impulse_step(const OscillatorySystem& sys, const State& s, const MacroMethod& method);
State mollified_impulse_step(const OscillatorySystem& sys, const State& s,
                             const MacroMethod& method);
State projected_impulse_step(const OscillatorySystem& sys, const State& s,
                             const MacroMethod& method);

/// Dispatches on method.kind.
State macro_step(const OscillatorySystem& sys, const State& s, const MacroMethod& method);

using DiagnosticsHook = std::function<DiagnosticsRecord(const State&)>;

struct IntegrateOptions {
  /// Called on every recorded sample; leave empty to record states only.
  DiagnosticsHook observer;
  /// Record every `stride`-th macro step (the final step is always kept).
  int stride = 1;
};

/// Thrown when a step fails part-way through a run; carries the samples
/// recorded so far.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(ErrorKind kind, const std::string& what, double t, Trajectory partial)
      : NumericalError(kind, what), t_(t), partial_(std::move(partial)) {}

  double time() const noexcept { return t_; }
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  double t_;
  Trajectory partial_;
};

/// Number of macro steps of size h that fit into [0, t_end].
long step_count(double t_end, double h);

Trajectory integrate(const OscillatorySystem& sys, const State& s0, const MacroMethod& method,
                     double t_end, const IntegrateOptions& options = {});

}  // namespace hosc
