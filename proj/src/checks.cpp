#include "hosc/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "hosc/constraint_geometry.hpp"
#include "hosc/diagnostics.hpp"
#include "hosc/effective.hpp"
#include "hosc/errors.hpp"
#include "hosc/integrators.hpp"

namespace hosc {

namespace {

constexpr int kSamples = 100;

SymMatrix random_spd(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (double& v : b.row(i)) v = normal(rng);
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = dot(b.row(i), b.row(j));
      if (i == j) s += static_cast<double>(n);
      a(i, j) = s;
    }
  return a;
}

SymMatrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = normal(rng);
  return a;
}

double cholesky_reconstruction() {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int s = 0; s < kSamples; ++s) {
    const std::size_t n = 1 + static_cast<std::size_t>(s % 8);
    const SymMatrix a = random_spd(rng, n);
    const CholeskyFactor factor = cholesky(a);
    const Matrix& l = factor.lower();
    const Matrix diff = multiply(l, transpose(l)) - a.to_dense();
    worst = std::max(worst, max_abs(diff) / a.max_abs());
  }
  return worst;
}

double eig_orthonormality() {
  std::mt19937_64 rng(12);
  double worst = 0.0;
  for (int s = 0; s < kSamples; ++s) {
    const std::size_t n = 1 + static_cast<std::size_t>(s % 8);
    const EigenPairs e = sym_eig(random_symmetric(rng, n));
    worst = std::max(worst, max_abs(multiply(transpose(e.vectors), e.vectors) - Matrix::identity(n)));
  }
  return worst;
}

double eig_reconstruction() {
  std::mt19937_64 rng(13);
  double worst = 0.0;
  for (int s = 0; s < kSamples; ++s) {
    const std::size_t n = 1 + static_cast<std::size_t>(s % 8);
    const SymMatrix a = random_symmetric(rng, n);
    const EigenPairs e = sym_eig(a);
    Matrix vd = e.vectors;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) vd(i, k) *= e.values[k];
    const Matrix diff = multiply(vd, transpose(e.vectors)) - a.to_dense();
    worst = std::max(worst, max_abs(diff) / std::max(a.max_abs(), 1e-300));
  }
  return worst;
}

double pendulum_frequencies(double eps) {
  const auto sys = make_double_pendulum(eps);
  const double r = std::sqrt(0.5);
  const Vector X{r, -r, 2.0 * r, 0.0};
  const Vector omegas = frequencies(*sys, X).omegas;
  return std::max(std::abs(omegas[0] - 1.0), std::abs(omegas[1] - std::sqrt(2.0)));
}

/// Max over random near-manifold samples of `measure(sys, x)`.
double over_samples(double eps, std::uint64_t seed,
                    const std::function<double(const OscillatorySystem&, const Vector&)>& measure) {
  const auto sys = make_double_pendulum(eps);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < kSamples; ++s)
    worst = std::max(worst, measure(*sys, near_manifold_position(rng, eps)));
  return worst;
}

double projection_idempotency(const OscillatorySystem& sys, const Vector& x) {
  const Matrix p = projection_P(sys, x).P;
  return max_abs(multiply(p, p) - p);
}

double projection_annihilates(const OscillatorySystem& sys, const Vector& x) {
  const Matrix p = projection_P(sys, x).P;
  const Matrix minv_p = cholesky(sys.mass(x)).solve(p);
  return max_abs(multiply(sys.constraint_jacobian(x), minv_p));
}

double mollifier_residual(const OscillatorySystem& sys, const Vector& x) {
  return norm_inf(sys.constraints(mollify_position(sys, x).X));
}

double jacobian_gap(const OscillatorySystem& sys, const Vector& x) {
  const Matrix jt = *mollify_position(sys, x, true).jacobianT;
  return max_abs(jt - projection_P(sys, x).P);
}

double displacement(const OscillatorySystem& sys, const Vector& x) {
  return norm_inf(subtract(x, mollify_position(sys, x).X));
}

double scaling_ratio(const std::function<double(const OscillatorySystem&, const Vector&)>& measure,
                     std::uint64_t seed) {
  return over_samples(1e-2, seed, measure) / over_samples(5e-3, seed, measure);
}

/// 100 steps forward, flip momenta, 100 steps forward, flip again.
double reversibility(MethodKind kind) {
  constexpr double eps = 1e-2;
  const auto sys = make_double_pendulum(eps);
  const State s0 = double_pendulum_initial_state(eps);
  const MacroMethod method{kind, 0.01, 100};
  State s = s0;
  for (int k = 0; k < 100; ++k) s = macro_step(*sys, s, method);
  s.y = scaled(s.y, -1.0);
  for (int k = 0; k < 100; ++k) s = macro_step(*sys, s, method);
  s.y = scaled(s.y, -1.0);
  return std::max(norm_inf(subtract(s.x, s0.x)), norm_inf(subtract(s.y, s0.y)));
}

/// Change of the reference under h_ref -> h_ref/2, relative to the smallest
/// macro-method error of the configured sweep (over a horizon of at most 2).
double reference_guard(const SweepConfig& cfg) {
  const SystemPtr sys = build_system(cfg.model, cfg.epsilon);
  const State s0 = initial_state(cfg.model, cfg.epsilon);
  const double t_end = std::min(cfg.t_end, 2.0);
  const Trajectory coarse = effective_reference(*sys, s0.x, s0.y, cfg.h_ref, t_end);
  const Trajectory fine = effective_reference(*sys, s0.x, s0.y, 0.5 * cfg.h_ref, t_end);
  double change = 0.0;
  for (std::size_t k = 0; k < coarse.size() && 2 * k < fine.size(); ++k) {
    const State& a = coarse.states[k];
    const State& b = fine.states[2 * k];
    change = std::max({change, norm_inf(subtract(a.x, b.x)), norm_inf(subtract(a.y, b.y))});
  }

  double smallest = std::numeric_limits<double>::infinity();
  const double h = cfg.stepsizes.back();
  for (MethodKind kind : cfg.methods) {
    const Trajectory traj =
        integrate(*sys, s0, MacroMethod{kind, h, cfg.micro_divisor_for(kind)}, t_end);
    const ErrorMetrics em = error_metrics(traj, coarse, *sys);
    smallest = std::min({smallest, em.max_err_x, em.max_err_Py});
  }
  return change / smallest;
}

struct CheckDef {
  const char* name;
  double lower;
  double upper;
  std::function<double(const SweepConfig&)> measure;
};

std::vector<CheckDef> definitions() {
  constexpr double eps = 1e-2;
  return {
      {"cholesky_reconstruction", 0.0, 1e-12, [](const SweepConfig&) { return cholesky_reconstruction(); }},
      {"eig_orthonormality", 0.0, 1e-12, [](const SweepConfig&) { return eig_orthonormality(); }},
      {"eig_reconstruction", 0.0, 1e-12, [](const SweepConfig&) { return eig_reconstruction(); }},
      {"pendulum_frequencies", 0.0, 1e-10,
       [](const SweepConfig& c) { return pendulum_frequencies(c.epsilon); }},
      {"projection_idempotency", 0.0, 1e-10,
       [](const SweepConfig&) { return over_samples(eps, 21, projection_idempotency); }},
      {"projection_annihilates_normal", 0.0, 1e-10,
       [](const SweepConfig&) { return over_samples(eps, 22, projection_annihilates); }},
      {"mollifier_on_manifold", 0.0, 1e-10,
       [](const SweepConfig&) { return over_samples(eps, 23, mollifier_residual); }},
      {"mollifier_jacobian_eps_ratio", 1.5, 3.0,
       [](const SweepConfig&) { return scaling_ratio(jacobian_gap, 24); }},
      {"mollifier_displacement_eps_ratio", 1.5, 3.0,
       [](const SweepConfig&) { return scaling_ratio(displacement, 25); }},
      {"reversibility_projected", 0.0, 1e-8,
       [](const SweepConfig&) { return reversibility(MethodKind::Projected); }},
      {"reversibility_mollified", 0.0, 1e-8,
       [](const SweepConfig&) { return reversibility(MethodKind::Mollified); }},
      {"reference_stepsize_guard", 0.0, 1e-2, [](const SweepConfig& c) { return reference_guard(c); }},
  };
}

}  // namespace

Vector near_manifold_position(std::mt19937_64& rng, double eps) {
  std::uniform_real_distribution<double> angle(-1.2, 1.2);
  std::normal_distribution<double> normal;
  const double a1 = angle(rng);
  const double a2 = angle(rng);
  Vector x{std::sin(a1), -std::cos(a1), 0.0, 0.0};
  x[2] = x[0] + std::sin(a2);
  x[3] = x[1] - std::cos(a2);
  for (double& v : x) v += eps * normal(rng);
  return x;
}

bool CheckReport::all_passed() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.passed; });
}

std::string CheckReport::format() const {
  std::string out;
  char line[256];
  for (const auto& c : items) {
    if (c.lower == 0.0) {
      std::snprintf(line, sizeof line, "%s %-34s measured %.3e  <= %.3e\n",
                    c.passed ? "PASS" : "FAIL", c.name.c_str(), c.measured, c.upper);
    } else {
      std::snprintf(line, sizeof line, "%s %-34s measured %.3e  in [%.3g, %.3g]\n",
                    c.passed ? "PASS" : "FAIL", c.name.c_str(), c.measured, c.lower, c.upper);
    }
    out += line;
  }
  return out;
}

std::vector<std::string> check_names() {
  std::vector<std::string> names;
  for (const auto& d : definitions()) names.emplace_back(d.name);
  return names;
}

CheckReport run_check(const SweepConfig& cfg, std::string_view inject_fault) {
  validate(cfg);
  auto defs = definitions();
  if (!inject_fault.empty()) {
    const auto it = std::find_if(defs.begin(), defs.end(),
                                 [&](const CheckDef& d) { return d.name == inject_fault; });
    if (it == defs.end()) throw ConfigError("unknown check '" + std::string(inject_fault) + "'");
    it->lower = 1.0;
    it->upper = -1.0;
  }

  CheckReport report;
  for (const auto& d : defs) {
    CheckItem item{d.name, 0.0, d.lower, d.upper, false};
    try {
      item.measured = d.measure(cfg);
      item.passed = item.measured >= d.lower && item.measured <= d.upper;
    } catch (const NumericalError&) {
      item.measured = std::numeric_limits<double>::quiet_NaN();
    }
    report.items.push_back(std::move(item));
  }
  return report;
}

}  // namespace hosc
