#include "hosc/integrators.hpp"

#include <cmath>
#include <sstream>

#include "hosc/constraint_geometry.hpp"

namespace hosc {

std::string_view to_string(MethodKind kind) noexcept {
  switch (kind) {
    case MethodKind::Impulse: return "impulse";
    case MethodKind::Mollified: return "mollified";
    case MethodKind::Projected: return "projected";
  }
  return "unknown";
}

std::optional<MethodKind> parse_method(std::string_view name) noexcept {
  if (name == "impulse") return MethodKind::Impulse;
  if (name == "mollified") return MethodKind::Mollified;
  if (name == "projected") return MethodKind::Projected;
  return std::nullopt;
}

namespace {

void require_constant_mass(const OscillatorySystem& sys) {
  if (!sys.mass_is_constant()) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "explicit leapfrog integrators need a constant mass matrix");
  }
}

// Largest stiff frequency omega_max / eps at x, from the pencil (grad^2 V, M).
double fastest_angular_rate(const OscillatorySystem& sys, std::span<const double> x) {
  if (sys.num_constraints() == 0) return 0.0;
  const EigenPairs eig = gen_eig(sys.stiff_hessian(x), sys.mass(x));
  const double top = eig.values.back();
  return top > 0.0 ? std::sqrt(top) / sys.epsilon() : 0.0;
}

}  // namespace

State stormer_verlet(const OscillatorySystem& sys, State s, double h_micro, long nsteps,
                     bool include_slow) {
  require_constant_mass(sys);
  const std::size_t n = sys.dim();
  const double rate = fastest_angular_rate(sys, s.x);
  if (std::abs(h_micro) * rate >= 2.0) {
    std::ostringstream msg;
    msg << "micro step " << h_micro << " times stiff frequency " << rate << " is not below 2";
    throw NumericalError(ErrorKind::StabilityViolation, msg.str());
  }

  const SymMatrix mass = sys.mass(s.x);
  const bool unit_mass = mass == SymMatrix::identity(n);
  const Matrix minv = cholesky(mass).solve(Matrix::identity(n));
  const double inv_eps2 = 1.0 / (sys.epsilon() * sys.epsilon());
  const double half = 0.5 * h_micro;

  Vector f(n), gu(n), gv(n), v(n);
  const auto force = [&](const Vector& x) {
    sys.stiff_gradient(x, gv);
    if (include_slow) {
      sys.slow_gradient(x, gu);
      for (std::size_t i = 0; i < n; ++i) f[i] = -gu[i] - inv_eps2 * gv[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) f[i] = -inv_eps2 * gv[i];
    }
  };

  Vector& x = s.x;
  Vector& y = s.y;
  force(x);
  for (long step = 0; step < nsteps; ++step) {
    for (std::size_t i = 0; i < n; ++i) y[i] += half * f[i];
    if (unit_mass) {
      for (std::size_t i = 0; i < n; ++i) x[i] += h_micro * y[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) v[i] = dot(minv.row(i), y);
      for (std::size_t i = 0; i < n; ++i) x[i] += h_micro * v[i];
    }
    force(x);
    for (std::size_t i = 0; i < n; ++i) y[i] += half * f[i];
  }
  s.t += static_cast<double>(nsteps) * h_micro;
  return s;
}

State fast_flow(const OscillatorySystem& sys, const State& s, double h, int micro_divisor) {
  if (micro_divisor < 1) {
    throw NumericalError(ErrorKind::InvalidArgument, "micro_divisor must be at least 1");
  }
  const double h_micro = sys.epsilon() / micro_divisor;
  // The relative shave keeps h/h_micro = 25000.000000000004 from becoming 25001.
  const double ratio = std::abs(h) / h_micro;
  const long steps = std::max(1L, static_cast<long>(std::ceil(ratio * (1.0 - 1e-12))));
  State out = stormer_verlet(sys, s, h / static_cast<double>(steps), steps, false);
  out.t = s.t + h;
  return out;
}

Vector kick_force(const OscillatorySystem& sys, MethodKind kind, std::span<const double> x) {
  switch (kind) {
    case MethodKind::Impulse:
      return scaled(sys.slow_gradient(x), -1.0);
    case MethodKind::Projected:
      return scaled(apply_projection(sys, x, sys.slow_gradient(x)), -1.0);
    case MethodKind::Mollified: {
      const MollifyResult mr = mollify_position(sys, x, true);
      return scaled(multiply(*mr.jacobianT, sys.slow_gradient(mr.X)), -1.0);
    }
  }
  throw NumericalError(ErrorKind::InvalidArgument, "unknown method kind");
}

namespace {

State splitting_step(const OscillatorySystem& sys, const State& s, const MacroMethod& method,
                     MethodKind expected) {
  if (method.kind != expected) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         std::string("step function for ") + std::string(to_string(expected)) +
                             " called with method " + std::string(to_string(method.kind)));
  }
  const double half = 0.5 * method.h;
  try {
    State kicked = s;
    axpy(half, kick_force(sys, method.kind, s.x), kicked.y);
    State next = fast_flow(sys, kicked, method.h, method.micro_divisor);
    axpy(half, kick_force(sys, method.kind, next.x), next.y);
    return next;
  } catch (const IntegrationError&) {
    throw;
  } catch (const NumericalError& e) {
    std::ostringstream msg;
    msg << to_string(method.kind) << " step from t=" << s.t << " failed: " << e.what();
    throw NumericalError(e.kind(), msg.str());
  }
}

}  // namespace

State impulse_step(const OscillatorySystem& sys, const State& s, const MacroMethod& method) {
  return splitting_step(sys, s, method, MethodKind::Impulse);
}

State mollified_impulse_step(const OscillatorySystem& sys, const State& s,
                             const MacroMethod& method) {
  return splitting_step(sys, s, method, MethodKind::Mollified);
}

State projected_impulse_step(const OscillatorySystem& sys, const State& s,
                             const MacroMethod& method) {
  return splitting_step(sys, s, method, MethodKind::Projected);
}

State macro_step(const OscillatorySystem& sys, const State& s, const MacroMethod& method) {
  return splitting_step(sys, s, method, method.kind);
}

long step_count(double t_end, double h) {
  return static_cast<long>(std::floor(t_end / h + 1e-9));
}

Trajectory integrate(const OscillatorySystem& sys, const State& s0, const MacroMethod& method,
                     double t_end, const IntegrateOptions& options) {
  if (!(t_end > 0.0) || !(method.h > 0.0)) {
    throw NumericalError(ErrorKind::InvalidArgument, "integrate needs t_end > 0 and h > 0");
  }
  if (options.stride < 1) throw NumericalError(ErrorKind::InvalidArgument, "stride must be >= 1");
  require_constant_mass(sys);

  const long steps = step_count(t_end, method.h);
  Trajectory traj;
  traj.stride = options.stride;
  const auto record = [&](const State& s) {
    traj.states.push_back(s);
    if (options.observer) traj.records.push_back(options.observer(s));
  };

  State s = s0;
  try {
    record(s);
    for (long k = 1; k <= steps; ++k) {
      s = macro_step(sys, s, method);
      s.t = s0.t + static_cast<double>(k) * method.h;
      if (k % options.stride == 0 || k == steps) record(s);
    }
  } catch (const NumericalError& e) {
    throw IntegrationError(e.kind(), e.what(), s.t, std::move(traj));
  }
  return traj;
}

}  // namespace hosc
