#pragma once

// Test-only systems and oracles. Nothing here calls into the kernels it is
// used to check.

#include <cmath>
#include <functional>
#include <random>
#include <span>

#include "hosc/model.hpp"
#include "hosc/smallmat.hpp"

namespace testing {

using hosc::Matrix;
using hosc::SymMatrix;
using hosc::Vector;

/// x'' = -x / eps^2 in one dimension: V = x^2 / 2, g = x, U = 0.
class HarmonicOscillator final : public hosc::OscillatorySystem {
 public:
  explicit HarmonicOscillator(double eps) : OscillatorySystem(1, 1, eps) {}

 protected:
  SymMatrix eval_mass(std::span<const double>) const override { return SymMatrix::identity(1); }
  double eval_slow_potential(std::span<const double>) const override { return 0.0; }
  void eval_slow_gradient(std::span<const double>, std::span<double> out) const override {
    out[0] = 0.0;
  }
  double eval_stiff_potential(std::span<const double> x) const override { return 0.5 * x[0] * x[0]; }
  void eval_stiff_gradient(std::span<const double> x, std::span<double> out) const override {
    out[0] = x[0];
  }
  SymMatrix eval_stiff_hessian(std::span<const double>) const override {
    return SymMatrix::identity(1);
  }
  Vector eval_constraints(std::span<const double> x) const override { return {x[0]}; }
  Matrix eval_constraint_jacobian(std::span<const double>) const override {
    return Matrix::identity(1);
  }
};

/// No stiff part (m = 0). U = k/4 |x|^4 + c . x, or zero when k = c = 0.
class SlowOnly final : public hosc::OscillatorySystem {
 public:
  SlowOnly(std::size_t n, double k, double c) : OscillatorySystem(n, 0, 1.0), k_(k), c_(c) {}

 protected:
  SymMatrix eval_mass(std::span<const double>) const override { return SymMatrix::identity(dim()); }
  double eval_slow_potential(std::span<const double> x) const override {
    double r2 = 0.0, lin = 0.0;
    for (double v : x) {
      r2 += v * v;
      lin += c_ * v;
    }
    return 0.25 * k_ * r2 * r2 + lin;
  }
  void eval_slow_gradient(std::span<const double> x, std::span<double> out) const override {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = k_ * r2 * x[i] + c_;
  }
  double eval_stiff_potential(std::span<const double>) const override { return 0.0; }
  void eval_stiff_gradient(std::span<const double>, std::span<double> out) const override {
    for (double& v : out) v = 0.0;
  }
  SymMatrix eval_stiff_hessian(std::span<const double>) const override { return SymMatrix(dim()); }
  Vector eval_constraints(std::span<const double>) const override { return {}; }
  Matrix eval_constraint_jacobian(std::span<const double>) const override { return Matrix(0, dim()); }

 private:
  double k_;
  double c_;
};

/// Wraps a system and multiplies its slow potential by `factor`.
class ScaledSlow final : public hosc::OscillatorySystem {
 public:
  ScaledSlow(hosc::SystemPtr inner, double factor)
      : OscillatorySystem(inner->dim(), inner->num_constraints(), inner->epsilon()),
        inner_(std::move(inner)),
        factor_(factor) {}

 protected:
  SymMatrix eval_mass(std::span<const double> x) const override { return inner_->mass(x); }
  double eval_slow_potential(std::span<const double> x) const override {
    return factor_ * inner_->slow_potential(x);
  }
  void eval_slow_gradient(std::span<const double> x, std::span<double> out) const override {
    inner_->slow_gradient(x, out);
    for (double& v : out) v *= factor_;
  }
  double eval_stiff_potential(std::span<const double> x) const override {
    return inner_->stiff_potential(x);
  }
  void eval_stiff_gradient(std::span<const double> x, std::span<double> out) const override {
    inner_->stiff_gradient(x, out);
  }
  SymMatrix eval_stiff_hessian(std::span<const double> x) const override {
    return inner_->stiff_hessian(x);
  }
  Vector eval_constraints(std::span<const double> x) const override { return inner_->constraints(x); }
  Matrix eval_constraint_jacobian(std::span<const double> x) const override {
    return inner_->constraint_jacobian(x);
  }

 private:
  hosc::SystemPtr inner_;
  double factor_;
};

/// The harmonic oscillator with a position-dependent mass, to exercise the
/// constant-mass gate.
class VaryingMass final : public hosc::OscillatorySystem {
 public:
  VaryingMass() : OscillatorySystem(1, 1, 1.0) {}
  bool mass_is_constant() const override { return false; }

 protected:
  SymMatrix eval_mass(std::span<const double> x) const override {
    SymMatrix m(1);
    m(0, 0) = 1.0 + x[0] * x[0];
    return m;
  }
  double eval_slow_potential(std::span<const double>) const override { return 0.0; }
  void eval_slow_gradient(std::span<const double>, std::span<double> out) const override {
    out[0] = 0.0;
  }
  double eval_stiff_potential(std::span<const double> x) const override { return 0.5 * x[0] * x[0]; }
  void eval_stiff_gradient(std::span<const double> x, std::span<double> out) const override {
    out[0] = x[0];
  }
  SymMatrix eval_stiff_hessian(std::span<const double>) const override {
    return SymMatrix::identity(1);
  }
  Vector eval_constraints(std::span<const double> x) const override { return {x[0]}; }
  Matrix eval_constraint_jacobian(std::span<const double>) const override {
    return Matrix::identity(1);
  }
};

inline double max_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double max_diff(const Matrix& a, const Matrix& b) { return max_diff(a.data(), b.data()); }

/// Central finite-difference gradient.
inline Vector fd_gradient(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> x, double step) {
  Vector g(x.size());
  Vector p(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = x[i] + step;
    const double fp = f(p);
    p[i] = x[i] - step;
    const double fm = f(p);
    p[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

/// Eigenvalues of [[a, b], [b, c]] in ascending order.
inline std::pair<double, double> closed_form_eig2(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  return {mean - radius, mean + radius};
}

/// Double pendulum position on the manifold (unit lengths) from two angles.
inline Vector pendulum_on_manifold(double a1, double a2) {
  Vector x{std::sin(a1), -std::cos(a1), 0.0, 0.0};
  x[2] = x[0] + std::sin(a2);
  x[3] = x[1] - std::cos(a2);
  return x;
}

/// Random manifold point displaced by exactly `distance` along a random unit
/// direction.
inline Vector pendulum_near_manifold(std::mt19937_64& rng, double distance) {
  std::uniform_real_distribution<double> angle(-1.2, 1.2);
  std::normal_distribution<double> normal;
  Vector x = pendulum_on_manifold(angle(rng), angle(rng));
  Vector d(4);
  double len = 0.0;
  for (double& v : d) {
    v = normal(rng);
    len += v * v;
  }
  len = std::sqrt(len);
  for (std::size_t i = 0; i < 4; ++i) x[i] += distance * d[i] / len;
  return x;
}

}  // namespace testing
