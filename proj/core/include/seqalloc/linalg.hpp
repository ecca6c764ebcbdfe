#pragma once

// Small dense real linear algebra used by the allocators and, separately, by
// the verification layer. Nothing here tries to be a general-purpose library:
// matrices are tiny (N is a processing gain, typically <= 64) and the Jacobi
// eigensolver exists only as an independent oracle.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace seqalloc::linalg {

inline constexpr double kDefaultTolOrtho = 1e-10;
inline constexpr int kJacobiSweepCap = 30;

using Vector = std::vector<double>;

bool all_finite(std::span<const double> values);
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// Dense column-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Max-abs entry of (MᵀM − I).
double orthonormality_residual(const Matrix& m);

/// Eigenvalues in non-increasing order. Sorting happens at construction.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double sum() const;

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<double> values_;
};

class OrthoBasis;
class SymMatrix;
struct EigenDecomposition;

/// Cyclic Jacobi. Stops when the off-diagonal Frobenius norm drops to
/// tol·‖A‖_F; throws kNotConverged after kJacobiSweepCap sweeps.
EigenDecomposition eig_oracle(const SymMatrix& a, double tol = 1e-14);

/// Real symmetric matrix storing only the lower triangle, so symmetry is exact.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n) : n_(n), packed_(n * (n + 1) / 2, 0.0) {}

  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(std::span<const double> d);
  /// Takes the lower triangle of a square row-major nested list; throws if
  /// the upper triangle disagrees by more than `tol` (absolute).
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows,
                             double tol = 0.0);
  /// U diag(λ) Uᵀ.
  static SymMatrix reconstruct(const Spectrum& values, const OrthoBasis& basis);

  std::size_t dim() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const { return packed_[index(i, j)]; }
  void set(std::size_t i, std::size_t j, double v) { packed_[index(i, j)] = v; }
  void add(std::size_t i, std::size_t j, double v) { packed_[index(i, j)] += v; }

  double trace() const;
  double frobenius_norm() const;
  /// Maximum absolute row sum.
  double inf_norm() const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    return i * (i + 1) / 2 + j;
  }

  std::size_t n_ = 0;
  std::vector<double> packed_;
};

/// Square matrix whose columns are orthonormal within the tolerance it was
/// validated against.
class OrthoBasis {
 public:
  OrthoBasis() = default;
  /// Validates orthonormality of `columns` against `tol_ortho`.
  explicit OrthoBasis(Matrix columns, double tol_ortho = kDefaultTolOrtho);

  static OrthoBasis identity(std::size_t n);

  std::size_t dim() const noexcept { return m_.rows(); }
  std::span<const double> column(std::size_t j) const { return m_.col(j); }
  const Matrix& matrix() const noexcept { return m_; }

  /// In-place rotation of columns (n, n+1):
  ///   u_n   <- α u_n + β u_{n+1}
  ///   u_n+1 <- −β u_n + α u_{n+1}
  /// Touches only those two columns.
  void rotate_plane(std::size_t n, double alpha, double beta,
                    double tol = kDefaultTolOrtho);

  /// U y.
  Vector apply(std::span<const double> y) const;

 private:
  struct Unchecked {};
  OrthoBasis(Matrix columns, Unchecked) : m_(std::move(columns)) {}
  friend EigenDecomposition eig_oracle(const SymMatrix&, double);

  Matrix m_;
};

struct EigenDecomposition {
  Spectrum values;
  OrthoBasis vectors;  // column j pairs with values[j]
};

/// A + c cᵀ.
SymMatrix rank1_add(const SymMatrix& a, std::span<const double> c);

/// Pure form of OrthoBasis::rotate_plane.
OrthoBasis plane_rotation(const OrthoBasis& u, std::size_t n, double alpha,
                          double beta, double tol = kDefaultTolOrtho);

/// Natural log of the determinant of a positive definite matrix, as the sum
/// of log oracle eigenvalues.
double log_det_spd(const SymMatrix& a);

}  // namespace seqalloc::linalg
