#include "seqalloc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "seqalloc/error.hpp"

namespace seqalloc::linalg {

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "dot: length mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double orthonormality_residual(const Matrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.cols(); ++i) {
    for (std::size_t j = i; j < m.cols(); ++j) {
      const double g = dot(m.col(i), m.col(j)) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Spectrum

Spectrum::Spectrum(std::vector<double> values) : values_(std::move(values)) {
  if (!all_finite(values_)) {
    throw Error(ErrorCode::kNonFinite, "spectrum contains non-finite values");
  }
  if (!std::is_sorted(values_.begin(), values_.end(), std::greater<>())) {
    std::sort(values_.begin(), values_.end(), std::greater<>());
  }
}

double Spectrum::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) a.set(i, i, 1.0);
  return a;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
  SymMatrix a(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) a.set(i, i, d[i]);
  return a;
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                               double tol) {
  const std::size_t n = rows.size();
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "from_rows: matrix is not square", i);
    }
    if (!all_finite(rows[i])) {
      throw Error(ErrorCode::kNonFinite, "from_rows: non-finite entry", i);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (std::abs(rows[i][j] - rows[j][i]) > tol) {
        throw Error(ErrorCode::kInvalidArgument, "from_rows: matrix is not symmetric", i);
      }
      a.set(i, j, rows[i][j]);
    }
  }
  return a;
}

SymMatrix SymMatrix::reconstruct(const Spectrum& values, const OrthoBasis& basis) {
  const std::size_t n = basis.dim();
  if (values.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "reconstruct: spectrum/basis size mismatch");
  }
  const Matrix& u = basis.matrix();
  SymMatrix a(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lk = values[k];
    for (std::size_t i = 0; i < n; ++i) {
      const double uik = lk * u(i, k);
      for (std::size_t j = 0; j <= i; ++j) a.add(i, j, uik * u(j, k));
    }
  }
  return a;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double SymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
  }
  return std::sqrt(s);
}

double SymMatrix::inf_norm() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n_; ++j) row += std::abs((*this)(i, j));
    worst = std::max(worst, row);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// OrthoBasis

OrthoBasis::OrthoBasis(Matrix columns, double tol_ortho) : m_(std::move(columns)) {
  if (m_.rows() != m_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "orthobasis: matrix is not square");
  }
  const double r = orthonormality_residual(m_);
  if (!(r <= tol_ortho)) {
    std::ostringstream os;
    os << "orthobasis: columns are not orthonormal (residual " << r << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

OrthoBasis OrthoBasis::identity(std::size_t n) {
  return OrthoBasis(Matrix::identity(n), Unchecked{});
}

void OrthoBasis::rotate_plane(std::size_t n, double alpha, double beta, double tol) {
  if (n + 1 >= dim()) {
    throw Error(ErrorCode::kInvalidArgument, "rotate_plane: plane index out of range", n);
  }
  if (!(std::abs(alpha * alpha + beta * beta - 1.0) <= tol)) {
    throw Error(ErrorCode::kInvalidRotation, "rotate_plane: alpha^2 + beta^2 != 1");
  }
  auto un = m_.col(n);
  auto un1 = m_.col(n + 1);
  for (std::size_t i = 0; i < un.size(); ++i) {
    const double a = un[i];
    const double b = un1[i];
    un[i] = alpha * a + beta * b;
    un1[i] = -beta * a + alpha * b;
  }
}

Vector OrthoBasis::apply(std::span<const double> y) const {
  if (y.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "apply: vector length mismatch");
  }
  Vector out(dim(), 0.0);
  for (std::size_t k = 0; k < dim(); ++k) {
    if (y[k] == 0.0) continue;
    const auto col = m_.col(k);
    for (std::size_t i = 0; i < dim(); ++i) out[i] += y[k] * col[i];
  }
  return out;
}

// ---------------------------------------------------------------------------

SymMatrix rank1_add(const SymMatrix& a, std::span<const double> c) {
  if (c.size() != a.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "rank1_add: vector length mismatch");
  }
  if (!all_finite(c)) throw Error(ErrorCode::kNonFinite, "rank1_add: non-finite update");
  SymMatrix out = a;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) out.add(i, j, c[i] * c[j]);
  }
  return out;
}

EigenDecomposition eig_oracle(const SymMatrix& a, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eig_oracle: tol must be > 0");
  const std::size_t n = a.dim();
  // Row-major full working copy.
  std::vector<double> w(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) w[i * n + j] = a(i, j);
  }
  if (!all_finite(w)) throw Error(ErrorCode::kNonFinite, "eig_oracle: non-finite input");
  auto at = [&](std::size_t i, std::size_t j) -> double& { return w[i * n + j]; };
  Matrix v = Matrix::identity(n);

  const double threshold = tol * a.frobenius_norm();
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) s += at(i, j) * at(i, j);
      }
    }
    return std::sqrt(s);
  };

  double off = off_norm();
  int sweep = 0;
  while (off > threshold) {
    if (sweep == kJacobiSweepCap) {
      std::ostringstream os;
      os << "eig_oracle: no convergence after " << kJacobiSweepCap
         << " sweeps (off-diagonal residual " << off << ")";
      throw Error(ErrorCode::kNotConverged, os.str());
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        // Entries below the last bit of both diagonals are dropped; rotating
        // them between equal diagonals would be a 45° turn that refills
        // already-cleared entries.
        const double g = 100.0 * std::abs(apq);
        if (std::abs(at(p, p)) + g == std::abs(at(p, p)) &&
            std::abs(at(q, q)) + g == std::abs(at(q, q))) {
          at(p, q) = at(q, p) = 0.0;
          continue;
        }
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = at(p, k) = c * akp - s * akq;
          at(k, q) = at(q, k) = s * akp + c * akq;
        }
        at(p, p) -= t * apq;
        at(q, q) += t * apq;
        at(p, q) = at(q, p) = 0.0;
        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
    off = off_norm();
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return at(x, x) > at(y, y); });
  std::vector<double> values(n);
  Matrix sorted(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    values[k] = at(order[k], order[k]);
    const auto src = v.col(order[k]);
    std::copy(src.begin(), src.end(), sorted.col(k).begin());
  }
  return {Spectrum(std::move(values)), OrthoBasis(std::move(sorted), OrthoBasis::Unchecked{})};
}

OrthoBasis plane_rotation(const OrthoBasis& u, std::size_t n, double alpha, double beta,
                          double tol) {
  OrthoBasis out = u;
  out.rotate_plane(n, alpha, beta, tol);
  return out;
}

double log_det_spd(const SymMatrix& a) {
  const auto eig = eig_oracle(a);
  double s = 0.0;
  for (double v : eig.values.values()) {
    if (!(v > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "log_det_spd: matrix is not positive definite");
    }
    s += std::log(v);
  }
  return s;
}

}  // namespace seqalloc::linalg
