#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "hosc/smallmat.hpp"

namespace hosc {

/// Phase-space point (x, y) at time t.
struct State {
  Vector x;
  Vector y;
  double t = 0.0;
};

/// Hamiltonian H(x,y) = 1/2 y^T M(x)^{-1} y + U(x) + V(x)/eps^2 whose stiff
/// potential V vanishes exactly on the manifold g(x) = 0.
///
/// Derived classes implement the protected `eval_*` hooks; callers use the
/// public non-virtual wrappers. Instances are immutable after construction.
class OscillatorySystem {
 public:
  OscillatorySystem(std::size_t n, std::size_t m, double epsilon);
  virtual ~OscillatorySystem() = default;

  std::size_t dim() const noexcept { return n_; }
  std::size_t num_constraints() const noexcept { return m_; }
  double epsilon() const noexcept { return epsilon_; }
  virtual bool mass_is_constant() const { return true; }

  SymMatrix mass(std::span<const double> x) const { return eval_mass(x); }

  double slow_potential(std::span<const double> x) const { return eval_slow_potential(x); }
  Vector slow_gradient(std::span<const double> x) const;
  void slow_gradient(std::span<const double> x, std::span<double> out) const {
    eval_slow_gradient(x, out);
  }

  double stiff_potential(std::span<const double> x) const { return eval_stiff_potential(x); }
  Vector stiff_gradient(std::span<const double> x) const;
  void stiff_gradient(std::span<const double> x, std::span<double> out) const {
    eval_stiff_gradient(x, out);
  }
  SymMatrix stiff_hessian(std::span<const double> x) const { return eval_stiff_hessian(x); }

  /// g(x), length m.
  Vector constraints(std::span<const double> x) const { return eval_constraints(x); }
  /// G(x) = g'(x), m x n.
  Matrix constraint_jacobian(std::span<const double> x) const { return eval_constraint_jacobian(x); }

 protected:
  virtual SymMatrix eval_mass(std::span<const double> x) const = 0;
  virtual double eval_slow_potential(std::span<const double> x) const = 0;
  virtual void eval_slow_gradient(std::span<const double> x, std::span<double> out) const = 0;
  virtual double eval_stiff_potential(std::span<const double> x) const = 0;
  virtual void eval_stiff_gradient(std::span<const double> x, std::span<double> out) const = 0;
  virtual SymMatrix eval_stiff_hessian(std::span<const double> x) const = 0;
  virtual Vector eval_constraints(std::span<const double> x) const = 0;
  virtual Matrix eval_constraint_jacobian(std::span<const double> x) const = 0;

 private:
  std::size_t n_;
  std::size_t m_;
  double epsilon_;
};

using SystemPtr = std::shared_ptr<const OscillatorySystem>;

/// Total energy.
double hamiltonian(const OscillatorySystem& sys, const State& s);

/// Right-hand side (x', y') of the full equations of motion.
std::pair<Vector, Vector> rhs_full(const OscillatorySystem& sys, const State& s);

/// Planar stiff spring double pendulum: bobs x1 = (x[0], x[1]) and
/// x2 = (x[2], x[3]), unit masses, gravity acting on the second components.
SystemPtr make_double_pendulum(double epsilon, double alpha1 = 1.0, double alpha2 = 1.0,
                               double l1 = 1.0, double l2 = 1.0);

/// Planar chain of `alphas.size()` stiff springs hanging from the origin.
SystemPtr make_spring_chain(std::size_t springs, double epsilon, std::span<const double> alphas,
                            std::span<const double> lengths);

/// x(0) = (sqrt(0.5), -sqrt(0.5), sqrt(2), 5 eps), y(0) = 0.
State double_pendulum_initial_state(double epsilon);

}  // namespace hosc
