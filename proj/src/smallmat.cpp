#include "hosc/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hosc/errors.hpp"

namespace hosc {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  SymMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

SymMatrix SymMatrix::from_lower(const Matrix& dense) {
  if (dense.rows() != dense.cols()) {
    throw NumericalError(ErrorKind::InvalidArgument, "SymMatrix::from_lower needs a square matrix");
  }
  SymMatrix m(dense.rows());
  for (std::size_t i = 0; i < dense.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = dense(i, j);
  return m;
}

Matrix SymMatrix::to_dense() const {
  Matrix d(order_, order_);
  for (std::size_t i = 0; i < order_; ++i)
    for (std::size_t j = 0; j < order_; ++j) d(i, j) = (*this)(i, j);
  return d;
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// Cholesky

CholeskyFactor cholesky(const SymMatrix& a) {
  const std::size_t n = a.order();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double pivot_tol = 1e-14 * max_diag;

  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > pivot_tol)) {
      throw NumericalError(ErrorKind::NotPositiveDefinite,
                           "pivot " + std::to_string(j) + " is " + std::to_string(d));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return CholeskyFactor(std::move(l));
}

Vector CholeskyFactor::forward(std::span<const double> b) const {
  const std::size_t n = order();
  Vector z(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = z[i];
    for (std::size_t k = 0; k < i; ++k) s -= lower_(i, k) * z[k];
    z[i] = s / lower_(i, i);
  }
  return z;
}

Vector CholeskyFactor::backward(std::span<const double> b) const {
  const std::size_t n = order();
  Vector x(b.begin(), b.end());
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= lower_(k, ii) * x[k];
    x[ii] = s / lower_(ii, ii);
  }
  return x;
}

Vector CholeskyFactor::solve(std::span<const double> b) const { return backward(forward(b)); }

Matrix CholeskyFactor::solve(const Matrix& b) const {
  Matrix x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    const Vector xj = solve(b.column(j));
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = xj[i];
  }
  return x;
}

Vector solve_spd(const SymMatrix& a, std::span<const double> b) { return cholesky(a).solve(b); }

// ---------------------------------------------------------------------------
// Eigenproblems

namespace {

void normalise_signs(Matrix& v) {
  for (std::size_t j = 0; j < v.cols(); ++j) {
    double biggest = 0.0;
    for (std::size_t i = 0; i < v.rows(); ++i) biggest = std::max(biggest, std::abs(v(i, j)));
    for (std::size_t i = 0; i < v.rows(); ++i) {
      if (std::abs(v(i, j)) > 1e-8 * biggest) {
        if (v(i, j) < 0.0)
          for (std::size_t r = 0; r < v.rows(); ++r) v(r, j) = -v(r, j);
        break;
      }
    }
  }
}

EigenPairs sorted(const Matrix& a, const Matrix& v) {
  const std::size_t n = a.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t p, std::size_t q) { return a(p, p) < a(q, q); });
  EigenPairs out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace

EigenPairs sym_eig(const SymMatrix& sym) {
  constexpr int kMaxSweeps = 100;
  const std::size_t n = sym.order();
  Matrix a = sym.to_dense();
  Matrix v = Matrix::identity(n);

  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  frob = std::sqrt(frob);
  const double floor = 1e-20 * frob;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double thr =
            std::max(1e-16 * std::sqrt(std::abs(a(p, p) * a(q, q))), floor);
        if (std::abs(apq) <= thr) continue;
        rotated = true;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    if (!rotated) {
      EigenPairs out = sorted(a, v);
      normalise_signs(out.vectors);
      return out;
    }
  }
  throw NumericalError(ErrorKind::NoConvergence, "Jacobi eigensolver exceeded 100 sweeps");
}

EigenPairs gen_eig(const SymMatrix& a, const SymMatrix& b) {
  const std::size_t n = a.order();
  if (b.order() != n) throw NumericalError(ErrorKind::InvalidArgument, "gen_eig order mismatch");
  const CholeskyFactor chol = cholesky(b);

  // C = L^{-1} A L^{-T}, built column by column.
  Matrix linv_a(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Vector col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = a(i, j);
    const Vector z = chol.forward(col);
    for (std::size_t i = 0; i < n; ++i) linv_a(i, j) = z[i];
  }
  Matrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector row(linv_a.row(i).begin(), linv_a.row(i).end());
    const Vector z = chol.forward(row);
    for (std::size_t j = 0; j < n; ++j) c(i, j) = z[j];
  }
  SymMatrix cs(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) cs(i, j) = 0.5 * (c(i, j) + c(j, i));

  EigenPairs eig = sym_eig(cs);
  for (std::size_t k = 0; k < n; ++k) {
    const Vector vk = chol.backward(eig.vectors.column(k));
    for (std::size_t i = 0; i < n; ++i) eig.vectors(i, k) = vk[i];
  }
  normalise_signs(eig.vectors);
  return eig;
}

// ---------------------------------------------------------------------------
// General solve and Newton

Vector lu_solve(Matrix a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) {
    throw NumericalError(ErrorKind::InvalidArgument, "lu_solve dimension mismatch");
  }
  Vector x(b.begin(), b.end());
  const double scale = max_abs(a);
  const double pivot_tol = 1e-14 * scale;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (!(std::abs(a(piv, k)) > pivot_tol)) {
      throw NumericalError(ErrorKind::RankDeficient, "singular matrix in lu_solve");
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(x[k], x[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      x[i] -= f * x[k];
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return x;
}

NewtonResult newton_solve(const VectorFunction& residual, const MatrixFunction& jacobian,
                          std::span<const double> start, const NewtonOptions& options) {
  if (!(options.tol > 0.0)) {
    throw NumericalError(ErrorKind::InvalidArgument, "Newton tolerance must be positive");
  }
  Vector x(start.begin(), start.end());
  Vector r = residual(x);
  double rnorm = norm_inf(r);

  for (int it = 0; it < options.max_iter; ++it) {
    if (rnorm <= options.tol) return {std::move(x), it};
    Vector dx;
    try {
      dx = lu_solve(jacobian(x), scaled(r, -1.0));
    } catch (const NumericalError& e) {
      throw NumericalError(ErrorKind::NoConvergence,
                           "singular Newton Jacobian at iteration " + std::to_string(it));
    }

    double step = 1.0;
    Vector trial;
    Vector rtrial;
    double tnorm = 0.0;
    for (int halving = 0;; ++halving) {
      trial = x;
      axpy(step, dx, trial);
      rtrial = residual(trial);
      tnorm = norm_inf(rtrial);
      if (tnorm < rnorm || halving == options.max_halvings) break;
      step *= 0.5;
    }
    x = std::move(trial);
    r = std::move(rtrial);
    rnorm = tnorm;
  }
  if (rnorm <= options.tol) return {std::move(x), options.max_iter};
  throw NumericalError(ErrorKind::NoConvergence,
                       "Newton residual " + std::to_string(rnorm) + " after " +
                           std::to_string(options.max_iter) + " iterations");
}

// ---------------------------------------------------------------------------
// Helpers

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

Vector scaled(std::span<const double> a, double s) {
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = s * a[i];
  return c;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector multiply(const SymMatrix& a, std::span<const double> x) {
  const std::size_t n = a.order();
  Vector y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Vector multiply_transposed(const Matrix& a, std::span<const double> x) {
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * x[i];
  return y;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

double max_abs(const Matrix& a) { return norm_inf(a.data()); }

}  // namespace hosc
