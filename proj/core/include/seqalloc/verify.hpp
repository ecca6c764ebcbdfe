#pragma once

// Independent checks on (S, p, r) triples. Every determinant here is a
// product of Jacobi-oracle eigenvalues; nothing reads allocator state.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqalloc/linalg.hpp"

namespace seqalloc::verify {

/// I_N + Σ_{k ∈ users} N p_k s_k s_kᵀ.
linalg::SymMatrix signal_matrix(const linalg::Matrix& S, std::span<const double> p,
                                std::span<const std::size_t> users);
linalg::SymMatrix signal_matrix(const linalg::Matrix& S, std::span<const double> p);

struct SubsetPolicy {
  bool force_exhaustive = false;
  std::size_t exhaustive_limit = 16;  // exhaustive whenever K <= this
  /// Prefixes of this order are always checked in sampled mode. Empty means
  /// identity order.
  std::vector<std::size_t> decode_order;
  std::uint64_t seed = 0x5eed;
  std::size_t sample_count = 10000;
  unsigned threads = 0;  // 0: hardware concurrency, capped at 8
};

struct RegionCheckReport {
  std::size_t checked = 0;
  double worst_slack = 0.0;  // nats; min over J of bound_J − Σ_J r
  std::vector<std::size_t> worst_subset;
  std::optional<std::vector<std::size_t>> violating_subset;
  double tol = 0.0;
  bool exhaustive = false;

  bool passed() const { return !violating_subset.has_value(); }
};

/// Checks Σ_{k∈J} r_k <= (1/2N) log|I + Σ_{k∈J} N p_k s_k s_kᵀ| over the
/// subsets chosen by `policy`. Violations are reported, not thrown.
RegionCheckReport region_membership(const linalg::Matrix& S, std::span<const double> p,
                                    std::span<const double> r, const SubsetPolicy& policy = {},
                                    double tol = 1e-9);

/// Successive-decoding vertex: r_{π_k} = (1/2N)(log|A_k| − log|A_{k−1}|) with
/// users added in `order`. Throws kNonUnitSequence on a non-unit column.
std::vector<double> vertex_rates(const linalg::Matrix& S, std::span<const double> p,
                                 const std::vector<std::size_t>& order);

struct BoundChainReport {
  double p_tot = 0.0;                 // trace P
  double trace_sps = 0.0;             // trace S P Sᵀ
  double trace_identity_gap = 0.0;    // |trace P − trace S P Sᵀ|
  double mean_eigenvalue = 0.0;       // trace A_K / N
  double geometric_mean = 0.0;        // |A_K|^{1/N}
  double am_gm_slack = 0.0;           // (AM − GM)/AM, dimensionless
  std::optional<double> rate_slack;   // GM − exp{2 r_tot}, when rates are given
  double power_slack = 0.0;           // p_tot − (GM − 1), or − (exp{2 r_tot} − 1) with rates
  double gwbe_deviation = 0.0;        // ‖A_K − AM·I‖_∞ / AM
};

BoundChainReport bound_chain(const linalg::Matrix& S, std::span<const double> p,
                             std::optional<std::span<const double>> r = std::nullopt);

/// ‖A_K − λ_max I‖_∞.
double gwbe_deviation(const linalg::Matrix& S, std::span<const double> p, double lambda_max);

struct NecessityReport {
  std::size_t N = 0;
  std::size_t K = 0;

  // Power-constrained side: K users of equal power p_tot/K, users 0 and 1
  // forced onto one sequence.
  double p_tot = 0.0;
  double lambda1_pair = 0.0;       // σ_1(A_2), from the oracle
  double lambda1_pair_formula = 0.0;  // 1 + 2 N p_tot / K
  double lambda1_final = 0.0;      // σ_1(A_K), from the oracle
  double mean_eigenvalue = 0.0;    // 1 + p_tot
  double sum_rate = 0.0;           // Σ vertex rates of the completion
  double sum_capacity = 0.0;       // ½ log(1 + p_tot)
  double rate_gap = 0.0;           // sum_capacity − sum_rate

  // Rate-constrained side: K users of equal rate r_tot/K, same forced pair.
  double r_tot = 0.0;
  double lambda1_pair_rate = 0.0;  // exp{4 N r_tot / K}
  double lambda_max_rate = 0.0;    // exp{2 r_tot}
  double power_used = 0.0;
  double power_minimum = 0.0;      // exp{2 r_tot} − 1
  double power_gap = 0.0;
  double rate_reproduction_error = 0.0;  // max |vertex rate − requested|

  std::string note;
};

/// Builds the 2N−1 user symmetric instance, forces users 0 and 1 to share a
/// sequence, completes the allocation and measures the gap to the optimum.
/// Requires N >= 2.
NecessityReport necessity_demo(std::size_t N);

}  // namespace seqalloc::verify
