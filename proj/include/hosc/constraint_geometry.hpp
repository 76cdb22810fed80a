#pragma once

#include <optional>
#include <span>
#include <utility>

#include "hosc/model.hpp"
#include "hosc/smallmat.hpp"

namespace hosc {

/// P(x) = I - Q(x) with Q = G^T (G M^{-1} G^T)^{-1} G M^{-1}. P removes the
/// constraint-normal part of a momentum (or force) covector.
struct ProjectionPair {
  Matrix P;
  Matrix Q;
};

ProjectionPair projection_P(const OscillatorySystem& sys, std::span<const double> x);

/// P(x) v without forming the matrices.
Vector apply_projection(const OscillatorySystem& sys, std::span<const double> x,
                        std::span<const double> v);

/// M-orthogonal projection X = x + M(x)^{-1} G(x)^T lambda onto g(X) = 0.
struct MollifyResult {
  Vector X;
  Vector lambda;
  /// alpha'(x)^T, filled when requested.
  std::optional<Matrix> jacobianT;
  int newton_iterations = 0;
};

MollifyResult mollify_position(const OscillatorySystem& sys, std::span<const double> x,
                               bool want_jacobian = false);

/// Consistent start for the constrained dynamics: X0 = alpha(x0),
/// Y0 = P(X0) y0.
std::pair<Vector, Vector> consistent_initial_values(const OscillatorySystem& sys,
                                                    std::span<const double> x0,
                                                    std::span<const double> y0);

/// Max-norm of G(x) M(x)^{-1} y.
double velocity_constraint_residual(const OscillatorySystem& sys, std::span<const double> x,
                                    std::span<const double> y);

}  // namespace hosc
