#include "hosc/effective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hosc/constraint_geometry.hpp"
#include "hosc/diagnostics.hpp"
#include "hosc/errors.hpp"
#include "hosc/integrators.hpp"

namespace hosc {

namespace {

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return a == 0.0; });
}

Matrix negated(Matrix a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (double& v : a.row(i)) v = -v;
  return a;
}

}  // namespace

FrequencySet frequencies(const OscillatorySystem& sys, std::span<const double> X) {
  const std::size_t n = sys.dim();
  const std::size_t m = sys.num_constraints();
  const std::size_t d = n - m;
  if (m == 0) return {};

  const EigenPairs eig = gen_eig(sys.stiff_hessian(X), sys.mass(X));
  const double smallest_stiff = eig.values[d];
  if (!(smallest_stiff > 0.0)) {
    throw NumericalError(ErrorKind::GapViolation, "pencil has no positive stiff eigenvalue");
  }
  double tangential = 0.0;
  for (std::size_t k = 0; k < d; ++k) tangential = std::max(tangential, std::abs(eig.values[k]));
  if (tangential > 1e-6 * smallest_stiff) {
    std::ostringstream msg;
    msg << "tangential pencil eigenvalue " << tangential << " not negligible against "
        << smallest_stiff;
    throw NumericalError(ErrorKind::GapViolation, msg.str());
  }

  FrequencySet out{Vector(m), Matrix(n, m)};
  for (std::size_t k = 0; k < m; ++k) {
    out.omegas[k] = std::sqrt(eig.values[d + k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = eig.vectors(i, d + k);
  }
  return out;
}

Vector projected_frequencies(const OscillatorySystem& sys, std::span<const double> x) {
  return frequencies(sys, mollify_position(sys, x).X).omegas;
}

Matrix grad_frequencies(const OscillatorySystem& sys, std::span<const double> X,
                        double fd_step) {
  const std::size_t n = sys.dim();
  const std::size_t m = sys.num_constraints();
  const Vector base = projected_frequencies(sys, X);

  const auto nearest = [&](const Vector& values, double target) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
      if (std::abs(values[i] - target) < std::abs(values[best] - target)) best = i;
    return best;
  };
  const auto match = [&](const Vector& values) {
    std::vector<std::size_t> idx(m);
    std::vector<bool> used(m, false);
    for (std::size_t k = 0; k < m; ++k) {
      idx[k] = nearest(values, base[k]);
      if (used[idx[k]]) {
        throw NumericalError(ErrorKind::MatchingAmbiguous,
                             "frequency branches cannot be paired across the stencil");
      }
      used[idx[k]] = true;
    }
    return idx;
  };

  Matrix grad(m, n);
  Vector xp(X.begin(), X.end());
  for (std::size_t j = 0; j < n; ++j) {
    xp[j] = X[j] + fd_step;
    const Vector plus = projected_frequencies(sys, xp);
    xp[j] = X[j] - fd_step;
    const Vector minus = projected_frequencies(sys, xp);
    xp[j] = X[j];
    const auto ip = match(plus);
    const auto im = match(minus);
    for (std::size_t k = 0; k < m; ++k) grad(k, j) = (plus[ip[k]] - minus[im[k]]) / (2.0 * fd_step);
  }
  return grad;
}

Vector correction_force(const OscillatorySystem& sys, std::span<const double> X,
                        std::span<const double> actions, double fd_step) {
  Vector f(sys.dim(), 0.0);
  if (all_zero(actions)) return f;
  const Matrix grad = grad_frequencies(sys, X, fd_step);
  for (std::size_t k = 0; k < actions.size(); ++k) axpy(-actions[k], grad.row(k), f);
  return f;
}

double correction_potential(const OscillatorySystem& sys, std::span<const double> X,
                            std::span<const double> actions) {
  if (all_zero(actions)) return 0.0;
  return dot(actions, projected_frequencies(sys, X));
}

double effective_energy(const OscillatorySystem& sys, const EffectiveState& es) {
  const double kinetic = 0.5 * dot(es.Y, solve_spd(sys.mass(es.X), es.Y));
  return kinetic + sys.slow_potential(es.X) + correction_potential(sys, es.X, es.I);
}

ConstrainedLeapfrog::ConstrainedLeapfrog(const OscillatorySystem& sys, EffectiveState start,
                                         double fd_step)
    : sys_(sys), state_(std::move(start)), fd_step_(fd_step), mass_(cholesky(sys.mass(state_.X))) {
  if (!sys.mass_is_constant()) {
    throw NumericalError(ErrorKind::InvalidArgument, "constrained leapfrog needs constant mass");
  }
  if (state_.Lambda.size() != sys.num_constraints()) {
    state_.Lambda.assign(sys.num_constraints(), 0.0);
  }
  force_ = force(state_.X);
}

Vector ConstrainedLeapfrog::force(std::span<const double> X) const {
  Vector f = scaled(sys_.slow_gradient(X), -1.0);
  if (!all_zero(state_.I)) axpy(1.0, correction_force(sys_, X, state_.I, fd_step_), f);
  return f;
}

void ConstrainedLeapfrog::step(double h) {
  const std::size_t m = sys_.num_constraints();
  EffectiveState& s = state_;

  Vector y_half = s.Y;
  axpy(0.5 * h, force_, y_half);
  Vector x_free = s.X;
  axpy(h, mass_.solve(y_half), x_free);

  if (m > 0) {
    // X_{n+1} = x_free - B nu with B = M^{-1} G(X_n)^T and nu = h^2/2 Lambda.
    const Matrix g_old = sys_.constraint_jacobian(s.X);
    const Matrix b = mass_.solve(transpose(g_old));
    const auto position = [&](std::span<const double> nu) {
      Vector x = x_free;
      axpy(-1.0, multiply(b, nu), x);
      return x;
    };
    NewtonResult sol;
    try {
      sol = newton_solve(
          [&](std::span<const double> nu) { return sys_.constraints(position(nu)); },
          [&](std::span<const double> nu) {
            return negated(multiply(sys_.constraint_jacobian(position(nu)), b));
          },
          Vector(m, 0.0), NewtonOptions{1e-12, 20, 8});
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << "RATTLE position constraint at t=" << s.t << ": " << e.what();
      throw NumericalError(e.kind(), msg.str());
    }
    s.X = position(sol.x);
    axpy(-1.0 / h, multiply_transposed(g_old, sol.x), y_half);
  } else {
    s.X = std::move(x_free);
  }

  force_ = force(s.X);
  Vector y_new = y_half;
  axpy(0.5 * h, force_, y_new);
  if (m > 0) {
    const Matrix g = sys_.constraint_jacobian(s.X);
    const Matrix minv_gt = mass_.solve(transpose(g));
    const Matrix gram = multiply(g, minv_gt);
    SymMatrix sym(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j <= i; ++j) sym(i, j) = 0.5 * (gram(i, j) + gram(j, i));
    const Vector mu = solve_spd(sym, multiply(g, mass_.solve(y_new)));
    axpy(-1.0, multiply_transposed(g, mu), y_new);
    s.Lambda = scaled(mu, 2.0 / h);
  }
  s.Y = std::move(y_new);
  s.t += h;
}

EffectiveState rattle_step(const OscillatorySystem& sys, const EffectiveState& es, double h) {
  ConstrainedLeapfrog integrator(sys, es);
  integrator.step(h);
  return integrator.state();
}

Trajectory effective_reference(const OscillatorySystem& sys, std::span<const double> x0,
                               std::span<const double> y0, double h_ref, double t_end) {
  if (!(h_ref > 0.0) || !(t_end > 0.0)) {
    throw NumericalError(ErrorKind::InvalidArgument, "reference needs h_ref > 0 and t_end > 0");
  }
  auto [X0, Y0] = consistent_initial_values(sys, x0, y0);
  EffectiveState start;
  start.X = std::move(X0);
  start.Y = std::move(Y0);
  start.I = compute_actions(sys, x0, y0);
  start.t = 0.0;

  ConstrainedLeapfrog integrator(sys, start);
  const long steps = step_count(t_end, h_ref);

  Trajectory traj;
  const auto record = [&](const EffectiveState& es) {
    traj.states.push_back(State{es.X, es.Y, es.t});
    DiagnosticsRecord rec;
    rec.t = es.t;
    rec.energy = effective_energy(sys, es);
    rec.actions = es.I;
    const auto monitor = resonance_monitor(frequencies(sys, es.X).omegas);
    rec.min_gap = monitor.min_gap;
    rec.min_combo = monitor.min_combo;
    rec.constraint_residual = norm_inf(sys.constraints(es.X));
    traj.records.push_back(std::move(rec));
  };

  record(integrator.state());
  for (long k = 1; k <= steps; ++k) {
    integrator.step(h_ref);
    EffectiveState es = integrator.state();
    es.t = static_cast<double>(k) * h_ref;
    record(es);
  }
  return traj;
}

}  // namespace hosc
