#include "hosc/constraint_geometry.hpp"

#include <algorithm>
#include <string>

#include "hosc/errors.hpp"

namespace hosc {

namespace {

// M(x)^{-1} G(x)^T, n x m.
Matrix inverse_mass_times_gt(const OscillatorySystem& sys, std::span<const double> x,
                             const Matrix& g) {
  return cholesky(sys.mass(x)).solve(transpose(g));
}

// Factor of S = G M^{-1} G^T; RankDeficient when S is numerically singular.
CholeskyFactor gram_factor(const Matrix& g, const Matrix& minv_gt) {
  const Matrix s = multiply(g, minv_gt);
  SymMatrix sym(s.rows());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) sym(i, j) = 0.5 * (s(i, j) + s(j, i));
  try {
    return cholesky(sym);
  } catch (const NumericalError&) {
    throw NumericalError(ErrorKind::RankDeficient, "G M^{-1} G^T is not invertible");
  }
}

Matrix lu_solve_columns(const Matrix& a, const Matrix& b) {
  Matrix x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    const Vector xj = lu_solve(a, b.column(j));
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = xj[i];
  }
  return x;
}

}  // namespace

ProjectionPair projection_P(const OscillatorySystem& sys, std::span<const double> x) {
  const std::size_t n = sys.dim();
  if (sys.num_constraints() == 0) return {Matrix::identity(n), Matrix(n, n)};

  const Matrix g = sys.constraint_jacobian(x);
  const Matrix minv_gt = inverse_mass_times_gt(sys, x, g);
  const CholeskyFactor s = gram_factor(g, minv_gt);
  // Q = G^T S^{-1} (G M^{-1}), and G M^{-1} = (M^{-1} G^T)^T.
  const Matrix w = s.solve(transpose(minv_gt));
  Matrix q = multiply(transpose(g), w);
  Matrix p = Matrix::identity(n) - q;
  return {std::move(p), std::move(q)};
}

Vector apply_projection(const OscillatorySystem& sys, std::span<const double> x,
                        std::span<const double> v) {
  if (sys.num_constraints() == 0) return Vector(v.begin(), v.end());
  const Matrix g = sys.constraint_jacobian(x);
  const Vector minv_v = solve_spd(sys.mass(x), v);
  const Matrix minv_gt = inverse_mass_times_gt(sys, x, g);
  const Vector mu = gram_factor(g, minv_gt).solve(multiply(g, minv_v));
  return subtract(v, multiply_transposed(g, mu));
}

double velocity_constraint_residual(const OscillatorySystem& sys, std::span<const double> x,
                                    std::span<const double> y) {
  if (sys.num_constraints() == 0) return 0.0;
  return norm_inf(multiply(sys.constraint_jacobian(x), solve_spd(sys.mass(x), y)));
}

MollifyResult mollify_position(const OscillatorySystem& sys, std::span<const double> x,
                               bool want_jacobian) {
  const std::size_t n = sys.dim();
  const std::size_t m = sys.num_constraints();
  MollifyResult out;
  if (m == 0) {
    out.X.assign(x.begin(), x.end());
    if (want_jacobian) out.jacobianT = Matrix::identity(n);
    return out;
  }

  const Matrix g = sys.constraint_jacobian(x);
  const Matrix b = inverse_mass_times_gt(sys, x, g);
  gram_factor(g, b);  // rank check before iterating

  const auto displaced = [&](std::span<const double> lambda) {
    Vector xx(x.begin(), x.end());
    const Vector shift = multiply(b, lambda);
    axpy(1.0, shift, xx);
    return xx;
  };
  const VectorFunction residual = [&](std::span<const double> lambda) {
    return sys.constraints(displaced(lambda));
  };
  const MatrixFunction jacobian = [&](std::span<const double> lambda) {
    return multiply(sys.constraint_jacobian(displaced(lambda)), b);
  };

  NewtonResult sol;
  try {
    sol = newton_solve(residual, jacobian, Vector(m, 0.0), NewtonOptions{1e-12, 20, 8});
  } catch (const NumericalError& e) {
    throw NumericalError(ErrorKind::NoConvergence,
                         std::string("position projection failed: ") + e.what());
  }
  out.lambda = std::move(sol.x);
  out.X = displaced(out.lambda);
  out.newton_iterations = sol.iterations;

  if (want_jacobian) {
    // alpha(x) = x + B(x) lambda(x) with g(alpha(x)) = 0. Differentiating:
    //   alpha' = [I - B (G(X) B)^{-1} G(X)] Phi,  Phi = I + d/dx[B(x) lambda]|_lambda fixed.
    Matrix phi = Matrix::identity(n);
    const bool moved = std::any_of(out.lambda.begin(), out.lambda.end(),
                                   [](double l) { return l != 0.0; });
    if (moved) {
      constexpr double step = 1e-6;
      Vector xp(x.begin(), x.end());
      for (std::size_t j = 0; j < n; ++j) {
        xp[j] = x[j] + step;
        const Vector fp = multiply(inverse_mass_times_gt(sys, xp, sys.constraint_jacobian(xp)),
                                   out.lambda);
        xp[j] = x[j] - step;
        const Vector fm = multiply(inverse_mass_times_gt(sys, xp, sys.constraint_jacobian(xp)),
                                   out.lambda);
        xp[j] = x[j];
        for (std::size_t i = 0; i < n; ++i) phi(i, j) += (fp[i] - fm[i]) / (2.0 * step);
      }
    }
    // Transposed: alpha'^T = Phi^T [I - G(X)^T K^{-1} B^T], K = B^T G(X)^T.
    const Matrix gx = sys.constraint_jacobian(out.X);
    const Matrix bt = transpose(b);
    const Matrix k = multiply(bt, transpose(gx));
    Matrix r = Matrix::identity(n) - multiply(transpose(gx), lu_solve_columns(k, bt));
    out.jacobianT = multiply(transpose(phi), r);
  }
  return out;
}

std::pair<Vector, Vector> consistent_initial_values(const OscillatorySystem& sys,
                                                    std::span<const double> x0,
                                                    std::span<const double> y0) {
  Vector X0 = mollify_position(sys, x0).X;
  Vector Y0 = apply_projection(sys, X0, y0);
  return {std::move(X0), std::move(Y0)};
}

}  // namespace hosc
