#include "seqalloc/iep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seqalloc/error.hpp"

namespace seqalloc::iep {

namespace {

struct SignedMagnitude {
  double sign = 1.0;
  double value = 0.0;  // magnitude, or log-magnitude in log mode
};

// y_i² = −f(λ_i) / g'(λ_i) with f(t) = Π (t − λ̂_j), g(t) = Π (t − λ_j), both
// over the reduced (strictly interlacing) lists.
double radicand(const std::vector<double>& lam, const std::vector<double>& hat,
                std::size_t i, const Options& options, double scale) {
  const std::size_t l = lam.size();
  const double li = lam[i];
  double sign = 1.0;
  double out;
  if (l > options.log_product_threshold) {
    double log_mag = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      const double dn = li - hat[j];
      if (dn < 0.0) sign = -sign;
      log_mag += std::log(std::abs(dn));
      if (j == i) continue;
      const double dd = li - lam[j];
      if (dd < 0.0) sign = -sign;
      log_mag -= std::log(std::abs(dd));
    }
    out = -sign * std::exp(log_mag);
  } else {
    // Interleaving numerator and denominator factors keeps the running
    // product near the final magnitude.
    double mag = 1.0;
    for (std::size_t j = 0; j < l; ++j) {
      const double dn = li - hat[j];
      if (dn < 0.0) sign = -sign;
      mag *= std::abs(dn);
      if (j == i) continue;
      const double dd = li - lam[j];
      if (dd < 0.0) sign = -sign;
      mag /= std::abs(dd);
    }
    out = -sign * mag;
  }
  if (out < 0.0) {
    if (out >= -options.radicand_clip * scale) return 0.0;
    std::ostringstream os;
    os << "negative radicand " << out << " at reduced index " << i;
    throw Error(ErrorCode::kNegativeRadicand, os.str(), i);
  }
  return out;
}

void require_interlacing(const InterlacingPair& pair, double tol) {
  if (auto bad = first_interlacing_violation(pair.lambda, pair.lambda_hat, tol)) {
    std::ostringstream os;
    os << "target does not interlace the current spectrum (inequality " << *bad << ")";
    throw Error(ErrorCode::kInterlacingViolated, os.str(), *bad);
  }
}

}  // namespace

InterlacingPair::InterlacingPair(Spectrum current, Spectrum target)
    : lambda(std::move(current)), lambda_hat(std::move(target)) {
  if (lambda.size() != lambda_hat.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "interlacing pair: length mismatch");
  }
}

double cluster_scale(const InterlacingPair& pair, double tol_cluster) {
  double m = 1.0;
  for (double v : pair.lambda.values()) m = std::max(m, std::abs(v));
  for (double v : pair.lambda_hat.values()) m = std::max(m, std::abs(v));
  return tol_cluster * m;
}

std::optional<std::size_t> first_interlacing_violation(const Spectrum& lambda,
                                                       const Spectrum& lambda_hat,
                                                       double tol) {
  if (lambda.size() != lambda_hat.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "interlaces: length mismatch");
  }
  const std::size_t n = lambda.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (lambda_hat[i] - lambda[i] < -tol) return 2 * i;
    if (i + 1 < n && lambda[i] - lambda_hat[i + 1] < -tol) return 2 * i + 1;
  }
  return std::nullopt;
}

bool interlaces(const Spectrum& lambda, const Spectrum& lambda_hat, double tol) {
  return !first_interlacing_violation(lambda, lambda_hat, tol).has_value();
}

ClusterReduction cluster_reduce(const InterlacingPair& pair, double tol_cluster) {
  const double tol = cluster_scale(pair, tol_cluster);
  const auto lam = pair.lambda.values();
  const auto hat = pair.lambda_hat.values();
  const std::size_t n = lam.size();

  // Sorted multiset difference of two non-increasing lists.
  std::vector<bool> lam_keep(n, false);
  std::vector<bool> hat_keep(n, false);
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n && j < n) {
    if (std::abs(lam[i] - hat[j]) <= tol) {
      ++i;
      ++j;
    } else if (hat[j] > lam[i]) {
      hat_keep[j++] = true;
    } else {
      lam_keep[i++] = true;
    }
  }
  for (; i < n; ++i) lam_keep[i] = true;
  for (; j < n; ++j) hat_keep[j] = true;

  // Move each survivor to the first index of its cluster of equal λ values.
  for (std::size_t k = 0; k < n; ++k) {
    if (!lam_keep[k]) continue;
    std::size_t first = k;
    while (first > 0 && std::abs(lam[first - 1] - lam[k]) <= tol) --first;
    if (first != k && !lam_keep[first]) {
      lam_keep[k] = false;
      lam_keep[first] = true;
    }
  }

  ClusterReduction out;
  for (std::size_t k = 0; k < n; ++k) {
    if (lam_keep[k]) {
      out.surviving_indices.push_back(k);
      out.reduced_lambda.push_back(lam[k]);
    }
    if (hat_keep[k]) out.reduced_lambda_hat.push_back(hat[k]);
  }
  if (out.reduced_lambda.size() != out.reduced_lambda_hat.size()) {
    throw Error(ErrorCode::kInterlacingViolated,
                "cluster reduction produced unequal degrees; input does not interlace");
  }
  for (std::size_t k = 1; k < out.reduced_lambda.size(); ++k) {
    if (!(out.reduced_lambda[k - 1] - out.reduced_lambda[k] > tol)) {
      throw Error(ErrorCode::kInterlacingViolated,
                  "cluster reduction left a repeated eigenvalue; input does not interlace",
                  out.surviving_indices[k]);
    }
  }
  return out;
}

Vector diagonal_update_vector(const InterlacingPair& pair, const Options& options) {
  const double tol = cluster_scale(pair, options.tol_cluster);
  require_interlacing(pair, tol);
  const std::size_t n = pair.lambda.size();
  Vector y(n, 0.0);
  const ClusterReduction red = cluster_reduce(pair, options.tol_cluster);
  if (red.size() == 0) return y;
  const double scale = cluster_scale(pair, 1.0);
  for (std::size_t k = 0; k < red.size(); ++k) {
    y[red.surviving_indices[k]] =
        std::sqrt(radicand(red.reduced_lambda, red.reduced_lambda_hat, k, options, scale));
  }
  return y;
}

Vector converse_weyl(const EigenDecomposition& a, const Spectrum& lambda_hat,
                     const Options& options) {
  if (a.vectors.dim() != a.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "converse_weyl: spectrum/basis size mismatch");
  }
  const InterlacingPair pair(a.values, lambda_hat);
  const Vector y = diagonal_update_vector(pair, options);
  return a.vectors.apply(y);
}

Vector same_direction_update(const EigenDecomposition& a, std::size_t l, double new_value,
                             const Options& options) {
  const std::size_t n = a.values.size();
  if (l >= n) throw Error(ErrorCode::kInvalidArgument, "same_direction_update: index out of range", l);
  const double current = a.values[l];
  if (new_value < current) {
    throw Error(ErrorCode::kInvalidArgument,
                "same_direction_update: new value is below the current eigenvalue", l);
  }
  std::vector<double> target(a.values.values().begin(), a.values.values().end());
  target[l] = new_value;
  const InterlacingPair pair(a.values, Spectrum(target));
  if (l > 0 && new_value - a.values[l - 1] > cluster_scale(pair, options.tol_cluster)) {
    throw Error(ErrorCode::kInterlacingViolated,
                "same_direction_update: new value passes the next larger eigenvalue", 2 * l - 1);
  }
  return same_direction_vector(a.vectors.column(l), current, new_value);
}

Vector same_direction_vector(std::span<const double> u, double current, double new_value) {
  if (new_value < current) {
    throw Error(ErrorCode::kInvalidArgument,
                "same_direction_vector: new value is below the current eigenvalue");
  }
  const double amplitude = std::sqrt(new_value - current);
  Vector c(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) c[i] = amplitude * u[i];
  return c;
}

PlaneUpdate plane_update(double lambda_n, double lambda_n1, double lambda_hat_n,
                         double lambda_hat_n1) {
  const double gap = lambda_n - lambda_n1;
  const double gap_hat = lambda_hat_n - lambda_hat_n1;
  if (!(gap > 0.0) || !(gap_hat > 0.0) || lambda_hat_n < lambda_n ||
      lambda_n < lambda_hat_n1 || lambda_hat_n1 < lambda_n1) {
    throw Error(ErrorCode::kInterlacingViolated,
                "plane_update: targets do not strictly interlace the pair");
  }
  // Each factor below is at most the corresponding gap, so the ratios lie in
  // [0, 1] and the square roots are well conditioned.
  PlaneUpdate out;
  const double alpha2 =
      ((lambda_hat_n - lambda_n1) / gap_hat) * ((lambda_n - lambda_hat_n1) / gap);
  const double beta2 =
      ((lambda_hat_n1 - lambda_n1) / gap_hat) * ((lambda_hat_n - lambda_n) / gap);
  // Normalize away rounding so the rotation stays orthogonal to working precision.
  const double s = std::sqrt(alpha2 + beta2);
  out.alpha = std::sqrt(alpha2) / s;
  out.beta = std::sqrt(beta2) / s;
  out.y_n = std::sqrt((lambda_hat_n - lambda_n) * ((lambda_n - lambda_hat_n1) / gap));
  out.y_n1 = std::sqrt((lambda_hat_n - lambda_n1) * ((lambda_hat_n1 - lambda_n1) / gap));
  return out;
}

}  // namespace seqalloc::iep
