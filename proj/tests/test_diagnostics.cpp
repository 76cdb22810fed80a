#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "hosc/constraint_geometry.hpp"
#include "hosc/diagnostics.hpp"
#include "hosc/effective.hpp"
#include "hosc/errors.hpp"
#include "hosc/integrators.hpp"
#include "hosc/model.hpp"
#include "test_support.hpp"

using namespace hosc;
using testing::max_diff;

namespace {

const double kR = std::sqrt(0.5);
const double kStartAction = 25.0 / (4.0 * std::sqrt(2.0));

/// Brute-force action: integrate the full system over one period of the
/// spring-2 elongation (successive local maxima) and use
/// I = (1 / (2 pi eps)) * integral |y|^2 dt.
double averaged_action(double eps) {
  const auto sys = make_double_pendulum(eps);
  State s = double_pendulum_initial_state(eps);
  const double h = eps / 1000;
  const auto elongation = [&](const State& st) { return sys->constraints(st.x)[1]; };

  double prev2 = elongation(s), prev1 = prev2;
  double integral = 0.0;
  double y2_prev = dot(s.y, s.y);
  // The start is a turning point (y = 0, spring 2 stretched), so the period
  // runs up to the next local maximum.
  State cur = stormer_verlet(*sys, s, h, 1, true);
  prev1 = elongation(cur);
  integral += 0.5 * h * (y2_prev + dot(cur.y, cur.y));
  y2_prev = dot(cur.y, cur.y);
  for (int k = 0; k < 1000000; ++k) {
    State next = stormer_verlet(*sys, cur, h, 1, true);
    const double e = elongation(next);
    if (prev1 >= prev2 && prev1 >= e && k > 10) break;
    integral += 0.5 * h * (y2_prev + dot(next.y, next.y));
    y2_prev = dot(next.y, next.y);
    prev2 = prev1;
    prev1 = e;
    cur = std::move(next);
  }
  return integral / (2.0 * std::numbers::pi * eps);
}

/// max_t |I_k(t) - I_k(0)| along a fine micro integration over [0, 10].
double exact_flow_drift(double eps) {
  const auto sys = make_double_pendulum(eps);
  State s = double_pendulum_initial_state(eps);
  const Vector i0 = compute_actions(*sys, s.x, s.y);
  const double h = eps / 1000;
  const long per_sample = std::lround(0.01 / h);
  double drift = 0.0;
  for (int k = 0; k < 1000; ++k) {
    s = stormer_verlet(*sys, s, h, per_sample, true);
    const Vector ik = compute_actions(*sys, s.x, s.y);
    drift = std::max(drift, max_diff(ik, i0));
  }
  return drift;
}

}  // namespace

TEST_CASE("actions vanish for consistent states") {
  const auto sys = make_double_pendulum(1e-3);
  const Vector x = testing::pendulum_on_manifold(0.4, -0.2);
  const Vector y = apply_projection(*sys, x, Vector{0.3, -0.5, 1.0, 0.2});
  const Vector I = compute_actions(*sys, x, y);
  CHECK(norm_inf(I) <= 1e-12);
}

TEST_CASE("actions at the standard start") {
  const auto deviation = [](double eps) {
    const auto sys = make_double_pendulum(eps);
    const State s0 = double_pendulum_initial_state(eps);
    const Vector I = compute_actions(*sys, s0.x, s0.y);
    return std::pair{std::abs(I[0]), std::abs(I[1] - kStartAction)};
  };
  const auto [a1, b1] = deviation(1e-2);
  const auto [a2, b2] = deviation(5e-3);
  INFO("I1 ", a1, " / ", a2, "  I2 - 4.419 ", b1, " / ", b2);
  CHECK(b1 / kStartAction <= 0.05);
  // Both deviations shrink with eps at least linearly.
  CHECK(a1 / a2 >= 1.5);
  CHECK(b1 / b2 >= 1.5);
  CHECK(b1 / b2 <= 3.0);
}

TEST_CASE("actions agree with the one-period averaging oracle") {
  const auto rel_error = [](double eps) {
    const auto sys = make_double_pendulum(eps);
    const State s0 = double_pendulum_initial_state(eps);
    const Vector I = compute_actions(*sys, s0.x, s0.y);
    return std::abs(averaged_action(eps) - (I[0] + I[1])) / (I[0] + I[1]);
  };
  const double coarse = rel_error(1e-2);
  const double fine = rel_error(5e-3);
  INFO("relative error ", coarse, " then ", fine);
  CHECK(coarse <= 0.05);
  CHECK(fine <= coarse);
}

TEST_CASE("actions do not depend on the eigenvector sign") {
  const double eps = 1e-2;
  const auto sys = make_double_pendulum(eps);
  const State s0 = double_pendulum_initial_state(eps);
  const Vector x = add(s0.x, Vector{0.002, -0.001, 0.003, 0.0});
  const Vector y{0.4, -0.2, 0.7, 0.1};
  const Vector X = mollify_position(*sys, x).X;
  const FrequencySet fs = frequencies(*sys, X);
  const Vector disp = subtract(x, X);
  Vector flipped(2);
  for (std::size_t k = 0; k < 2; ++k) {
    const Vector v = scaled(fs.vectors.column(k), -1.0);
    const double c = dot(v, disp), cdot = dot(v, y), rate = fs.omegas[k] / eps;
    flipped[k] = (0.5 * cdot * cdot + 0.5 * rate * rate * c * c) / fs.omegas[k];
  }
  CHECK(max_diff(compute_actions(*sys, x, y), flipped) <= 1e-12 * norm_inf(flipped));
}

TEST_CASE("exact-flow actions drift by O(eps)") {
  const double coarse = exact_flow_drift(1e-2);
  const double fine = exact_flow_drift(5e-3);
  INFO("drift ", coarse, " / ", fine);
  CHECK(coarse / fine >= 1.5);
  CHECK(coarse / fine <= 3.0);
}

TEST_CASE("resonance monitor") {
  const double r2 = std::sqrt(2.0);
  const auto mon = resonance_monitor(Vector{1.0, r2});
  CHECK(mon.min_gap == doctest::Approx(r2 - 1).epsilon(1e-15));
  CHECK(mon.min_combo == doctest::Approx(2 - r2).epsilon(1e-15));

  const auto single = resonance_monitor(Vector{1.3});
  CHECK(single.min_gap == std::numeric_limits<double>::infinity());
  CHECK(single.min_combo == std::numeric_limits<double>::infinity());

  const Vector w{0.7, 2.3, 1.9};
  const auto a = resonance_monitor(w);
  const auto b = resonance_monitor(Vector{1.9, 0.7, 2.3});
  CHECK(a.min_gap == b.min_gap);
  CHECK(a.min_combo == b.min_combo);
  CHECK(a.min_gap == doctest::Approx(0.4).epsilon(1e-14));
  // 0.7 - 2.3 + 1.9 = 0.3, 2 * 0.7 - 1.9 = -0.5, ...
  CHECK(a.min_combo == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("convexity check") {
  const auto sys = make_double_pendulum(1e-2);
  CHECK(convexity_check(*sys, Vector{kR, -kR, 2 * kR, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
  const Vector a{2.5}, l{1.0};
  const auto single = make_spring_chain(1, 1e-2, a, l);
  CHECK(convexity_check(*single, Vector{1.0, 0.0}) == doctest::Approx(6.25).epsilon(1e-13));

  const State s0 = double_pendulum_initial_state(1e-2);
  const Trajectory ref = effective_reference(*sys, s0.x, s0.y, 1e-2, 10.0);
  double lowest = 1e300;
  for (const auto& s : ref.states) lowest = std::min(lowest, convexity_check(*sys, s.x));
  CHECK(lowest > 0.0);
}

TEST_CASE("error metrics on constructed trajectories") {
  const double eps = 1e-2;
  const auto sys = make_double_pendulum(eps);
  const State s0 = double_pendulum_initial_state(eps);
  const Trajectory ref = effective_reference(*sys, s0.x, s0.y, 1e-2, 2.0);

  SUBCASE("against itself") {
    const auto em = error_metrics(ref, ref, *sys);
    CHECK(em.max_err_x == 0.0);
    CHECK(em.max_err_Py <= 1e-14);
  }
  SUBCASE("constant shift") {
    Trajectory shifted = ref;
    for (auto& s : shifted.states) s.x[0] += 3e-4;
    CHECK(error_metrics(shifted, ref, *sys).max_err_x == doctest::Approx(3e-4).epsilon(1e-9));
  }
  SUBCASE("symmetric for matching grids") {
    State s1 = s0;
    s1.x[2] += 0.01;
    const Trajectory other = effective_reference(*sys, s1.x, s1.y, 1e-2, 2.0);
    const auto ab = error_metrics(ref, other, *sys);
    const auto ba = error_metrics(other, ref, *sys);
    CHECK(ab.max_err_x == doctest::Approx(ba.max_err_x).epsilon(1e-12));
    CHECK(ab.max_err_Py == doctest::Approx(ba.max_err_Py).epsilon(1e-10));
  }
  SUBCASE("samples outside the reference span") {
    Trajectory late = ref;
    late.states.back().t = 2.5;
    try {
      error_metrics(late, ref, *sys);
      FAIL("out-of-span sample accepted");
    } catch (const NumericalError& e) {
      CHECK(e.kind() == ErrorKind::TimeMismatch);
    }
  }
  SUBCASE("interpolation is linear between samples") {
    const State mid = interpolate(ref, 0.005);
    const State& a = ref.states[0];
    const State& b = ref.states[1];
    CHECK(max_diff(mid.x, scaled(add(a.x, b.x), 0.5)) <= 1e-15);
  }
}

TEST_CASE("mollified method errors drop fourfold when h halves at eps = 0.001") {
  const double eps = 1e-3;
  const auto sys = make_double_pendulum(eps);
  const State s0 = double_pendulum_initial_state(eps);
  const Trajectory ref = effective_reference(*sys, s0.x, s0.y, 1e-3, 10.0);
  const auto err = [&](double h) {
    const auto traj = integrate(*sys, s0, MacroMethod{MethodKind::Mollified, h, 100}, 10.0);
    return error_metrics(traj, ref, *sys).max_err_x;
  };
  const double e1 = err(0.25), e2 = err(0.125);
  INFO("errors ", e1, " ", e2);
  CHECK(e1 / e2 >= 3.4);
  CHECK(e1 / e2 <= 4.6);
}
