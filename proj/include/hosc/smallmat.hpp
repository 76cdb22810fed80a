#pragma once

// Dense kernels for the small symmetric systems that appear in the
// integrators: mass matrices, stiff Hessians and constraint Gram matrices.
// Orders are tiny (2n with n of a few units), so everything is O(n^3)
// straightforward code on contiguous row-major storage.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hosc {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const;

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Symmetric matrix holding only the lower triangle, so (i,j) and (j,i)
/// always refer to the same stored value.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t order, double fill = 0.0)
      : order_(order), data_(order * (order + 1) / 2, fill) {}

  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(std::span<const double> diag);
  /// Builds from the lower triangle of `dense`; the upper triangle is ignored.
  static SymMatrix from_lower(const Matrix& dense);

  std::size_t order() const noexcept { return order_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }

  Matrix to_dense() const;
  double max_abs() const;

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  static std::size_t index(std::size_t i, std::size_t j) noexcept {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }

  std::size_t order_ = 0;
  std::vector<double> data_;
};

/// Lower-triangular factor L with A = L L^T.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {}

  const Matrix& lower() const noexcept { return lower_; }
  std::size_t order() const noexcept { return lower_.rows(); }

  Vector solve(std::span<const double> b) const;
  /// Solves A X = B column by column.
  Matrix solve(const Matrix& b) const;
  /// L^{-1} b
  Vector forward(std::span<const double> b) const;
  /// L^{-T} b
  Vector backward(std::span<const double> b) const;

 private:
  Matrix lower_;
};

/// Eigenpairs with ascending values; column k of `vectors` belongs to
/// `values[k]`.
struct EigenPairs {
  Vector values;
  Matrix vectors;
};

CholeskyFactor cholesky(const SymMatrix& a);
Vector solve_spd(const SymMatrix& a, std::span<const double> b);

/// Cyclic Jacobi. Vectors are orthonormal; each is sign-normalised so that its
/// first non-negligible component is positive.
EigenPairs sym_eig(const SymMatrix& a);

/// A v = lambda B v via B = L L^T and sym_eig(L^{-1} A L^{-T}); vectors are
/// B-orthonormal.
EigenPairs gen_eig(const SymMatrix& a, const SymMatrix& b);

/// General square solve by LU with partial pivoting.
/// Throws RankDeficient when a pivot vanishes relative to max abs(A).
Vector lu_solve(Matrix a, std::span<const double> b);

using VectorFunction = std::function<Vector(std::span<const double>)>;
using MatrixFunction = std::function<Matrix(std::span<const double>)>;

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 20;
  int max_halvings = 8;
};

struct NewtonResult {
  Vector x;
  int iterations = 0;
};

/// Damped Newton iteration on residual(x) = 0 with a residual-norm halving
/// line search. Converged when the max-norm of the residual is <= tol.
NewtonResult newton_solve(const VectorFunction& residual, const MatrixFunction& jacobian,
                          std::span<const double> start, const NewtonOptions& options = {});

// Small vector and matrix helpers.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
Vector add(std::span<const double> a, std::span<const double> b);
Vector subtract(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> a, double s);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

Vector multiply(const Matrix& a, std::span<const double> x);
Vector multiply(const SymMatrix& a, std::span<const double> x);
/// A^T x
Vector multiply_transposed(const Matrix& a, std::span<const double> x);
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix operator-(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);

}  // namespace hosc
