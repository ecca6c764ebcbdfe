#pragma once

// Rank-one additive inverse eigenvalue solver for real symmetric matrices.
//
// Given A = U diag(λ) Uᵀ and a target λ̂ with
//   λ̂_1 >= λ_1 >= λ̂_2 >= λ_2 >= ... >= λ̂_N >= λ_N,
// produce c with σ(A + c cᵀ) = λ̂. The diagonal problem is solved first; the
// general one follows from c = U y.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "seqalloc/linalg.hpp"

namespace seqalloc::iep {

using linalg::EigenDecomposition;
using linalg::Spectrum;
using linalg::Vector;

struct Options {
  /// Relative to max(1, max|λ|, max|λ̂|). Values closer than this are one
  /// value when cancelling common factors, and this is also the slack allowed
  /// in the interlacing check.
  double tol_cluster = 1e-9;
  /// Negative radicands down to −clip·scale are set to zero; below that the
  /// solver throws kNegativeRadicand.
  double radicand_clip = 1e-12;
  /// Products with more factors than this are accumulated as sums of logs.
  std::size_t log_product_threshold = 16;
};

struct InterlacingPair {
  Spectrum lambda;
  Spectrum lambda_hat;

  InterlacingPair(Spectrum current, Spectrum target);
};

struct ClusterReduction {
  std::vector<std::size_t> surviving_indices;  // into lambda, increasing
  std::vector<double> reduced_lambda;          // strictly decreasing
  std::vector<double> reduced_lambda_hat;      // strictly decreasing

  std::size_t size() const noexcept { return surviving_indices.size(); }
};

/// Absolute tolerance derived from the relative `tol_cluster`.
double cluster_scale(const InterlacingPair& pair, double tol_cluster);

/// Index of the first failed link of the chain λ̂_1 >= λ_1 >= λ̂_2 >= ... >= λ_N
/// (link 2i is λ̂_i >= λ_i, link 2i+1 is λ_i >= λ̂_{i+1}), or nullopt.
std::optional<std::size_t> first_interlacing_violation(const Spectrum& lambda,
                                                       const Spectrum& lambda_hat,
                                                       double tol);

bool interlaces(const Spectrum& lambda, const Spectrum& lambda_hat, double tol);

/// Cancels values common to both spectra (within the absolute tolerance
/// tol_cluster · scale). Of each cluster of equal λ values at most one index
/// survives, and it is the first index of the cluster.
ClusterReduction cluster_reduce(const InterlacingPair& pair, double tol_cluster = 1e-9);

/// y with σ(diag(λ) + y yᵀ) = λ̂. Zero at cancelled indices.
Vector diagonal_update_vector(const InterlacingPair& pair, const Options& options = {});

/// c = U y for A = U diag(λ) Uᵀ.
Vector converse_weyl(const EigenDecomposition& a, const Spectrum& lambda_hat,
                     const Options& options = {});

/// Raises only eigenvalue l: c = √(new_value − λ_l) u_l. The eigenbasis of
/// A + c cᵀ is the basis of A.
Vector same_direction_update(const EigenDecomposition& a, std::size_t l, double new_value,
                             const Options& options = {});

/// √(new_value − current) · u. The building block of same_direction_update for
/// callers that hold the eigenbasis themselves.
Vector same_direction_vector(std::span<const double> u, double current, double new_value);

/// Closed form for a target that differs from λ in two adjacent positions
/// (n, n+1) only: c = y_n u_n + y_{n+1} u_{n+1}, and the new eigenvectors are
/// the (n, n+1) plane rotation of the old ones by (alpha, beta).
struct PlaneUpdate {
  double y_n = 0.0;
  double y_n1 = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
};

/// Requires lambda_n > lambda_n1 and lambda_hat_n >= lambda_n >= lambda_hat_n1
/// >= lambda_n1 with lambda_hat_n > lambda_hat_n1.
PlaneUpdate plane_update(double lambda_n, double lambda_n1, double lambda_hat_n,
                         double lambda_hat_n1);

}  // namespace seqalloc::iep
