#include "hosc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hosc/constraint_geometry.hpp"
#include "hosc/effective.hpp"
#include "hosc/errors.hpp"

namespace hosc {

Vector compute_actions(const OscillatorySystem& sys, std::span<const double> x,
                       std::span<const double> y) {
  const std::size_t m = sys.num_constraints();
  const double eps = sys.epsilon();
  const Vector X = mollify_position(sys, x).X;
  const FrequencySet fs = frequencies(sys, X);
  const Vector m_disp = multiply(sys.mass(X), subtract(x, X));

  Vector actions(m);
  for (std::size_t k = 0; k < m; ++k) {
    const Vector vk = fs.vectors.column(k);
    const double c = dot(vk, m_disp);
    const double cdot = dot(vk, y);
    const double rate = fs.omegas[k] / eps;
    const double energy = 0.5 * cdot * cdot + 0.5 * rate * rate * c * c;
    actions[k] = energy / fs.omegas[k];
  }
  return actions;
}

ResonanceMonitor resonance_monitor(std::span<const double> input) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Sorted so that rounding, and hence the result, ignores input order.
  std::vector<double> omegas(input.begin(), input.end());
  std::sort(omegas.begin(), omegas.end());
  const std::size_t m = omegas.size();
  if (m < 2) return {inf, inf};

  double gap = inf;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = j + 1; k < m; ++k) gap = std::min(gap, std::abs(omegas[j] - omegas[k]));

  // Three +-1 coefficients always leave an odd total, so no combination
  // cancels symbolically; the reduction is kept for clarity of intent.
  double combo = inf;
  std::vector<int> coeff(m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t l = 0; l < m; ++l)
        for (int s1 : {-1, 1})
          for (int s2 : {-1, 1}) {
            std::fill(coeff.begin(), coeff.end(), 0);
            coeff[j] += 1;
            coeff[k] += s1;
            coeff[l] += s2;
            if (std::all_of(coeff.begin(), coeff.end(), [](int c) { return c == 0; })) continue;
            double value = 0.0;
            for (std::size_t i = 0; i < m; ++i) value += coeff[i] * omegas[i];
            combo = std::min(combo, std::abs(value));
          }
  return {gap, combo};
}

double convexity_check(const OscillatorySystem& sys, std::span<const double> X) {
  const FrequencySet fs = frequencies(sys, X);
  if (fs.omegas.empty()) return std::numeric_limits<double>::infinity();
  return fs.omegas.front() * fs.omegas.front();
}

DiagnosticsRecord full_diagnostics(const OscillatorySystem& sys, const State& s) {
  DiagnosticsRecord rec;
  rec.t = s.t;
  rec.energy = hamiltonian(sys, s);
  rec.actions = compute_actions(sys, s.x, s.y);
  const auto monitor = resonance_monitor(projected_frequencies(sys, s.x));
  rec.min_gap = monitor.min_gap;
  rec.min_combo = monitor.min_combo;
  rec.constraint_residual = norm_inf(sys.constraints(s.x));
  return rec;
}

double max_action_drift(const Trajectory& traj) {
  if (traj.records.empty()) return 0.0;
  const Vector& first = traj.records.front().actions;
  double drift = 0.0;
  for (const auto& rec : traj.records)
    for (std::size_t k = 0; k < first.size(); ++k)
      drift = std::max(drift, std::abs(rec.actions[k] - first[k]));
  return drift;
}

State interpolate(const Trajectory& ref, double t) {
  if (ref.empty()) throw NumericalError(ErrorKind::TimeMismatch, "empty reference");
  const double slack = 1e-9 * std::max(1.0, std::abs(t));
  const double t0 = ref.states.front().t;
  const double t1 = ref.states.back().t;
  if (t < t0 - slack || t > t1 + slack) {
    std::ostringstream msg;
    msg << "time " << t << " outside reference span [" << t0 << ", " << t1 << "]";
    throw NumericalError(ErrorKind::TimeMismatch, msg.str());
  }
  const auto it = std::lower_bound(ref.states.begin(), ref.states.end(), t,
                                   [](const State& s, double value) { return s.t < value; });
  if (it == ref.states.end()) return ref.states.back();
  if (std::abs(it->t - t) <= slack || it == ref.states.begin()) return *it;
  const State& lo = *(it - 1);
  const State& hi = *it;
  if (std::abs(lo.t - t) <= slack) return lo;
  const double w = (t - lo.t) / (hi.t - lo.t);
  State out;
  out.t = t;
  out.x.resize(lo.x.size());
  out.y.resize(lo.y.size());
  for (std::size_t i = 0; i < lo.x.size(); ++i) {
    out.x[i] = (1.0 - w) * lo.x[i] + w * hi.x[i];
    out.y[i] = (1.0 - w) * lo.y[i] + w * hi.y[i];
  }
  return out;
}

ErrorMetrics error_metrics(const Trajectory& traj, const Trajectory& ref,
                           const OscillatorySystem& sys) {
  ErrorMetrics em;
  em.times.reserve(traj.size());
  em.err_x.reserve(traj.size());
  em.err_Py.reserve(traj.size());
  for (const State& s : traj.states) {
    const State r = interpolate(ref, s.t);
    const double ex = norm_inf(subtract(s.x, r.x));
    const double ep = norm_inf(subtract(apply_projection(sys, s.x, s.y), r.y));
    em.times.push_back(s.t);
    em.err_x.push_back(ex);
    em.err_Py.push_back(ep);
    em.max_err_x = std::max(em.max_err_x, ex);
    em.max_err_Py = std::max(em.max_err_Py, ep);
  }
  return em;
}

}  // namespace hosc
