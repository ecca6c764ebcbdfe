#pragma once

// User splitting onto N orthogonal sequences.
//
// Demands are cut at the N−1 points j·x_tot/N of their running sum, so the
// resulting virtual users fall into N subsets of equal total. Each subset is
// carried on its own standard basis vector and decoded by successive
// interference cancellation inside the subset.

#include <cstddef>
#include <span>
#include <vector>

namespace seqalloc::split {

struct VirtualUser {
  std::size_t original = 0;  // index into the original demand vector
  double demand = 0.0;
  std::size_t subset = 0;
};

struct Split {
  std::size_t user = 0;
  std::vector<double> parts;  // sums to the user's demand
};

struct PartitionPlan {
  std::size_t N = 1;
  std::vector<VirtualUser> virtual_users;       // in original-user order
  std::vector<std::vector<std::size_t>> subsets;  // virtual indices, increasing
  std::vector<Split> splits;

  std::size_t K_prime() const noexcept { return virtual_users.size(); }
  std::vector<double> virtual_demands() const;
  /// Number of distinct subsets a given original user occupies.
  std::size_t span_of(std::size_t original) const;
};

/// Throws kNonPositiveDemand on a non-positive entry.
PartitionPlan make_partition(std::span<const double> x, std::size_t N);

/// Largest deviation of a subset sum from x_tot/N, relative to x_tot.
double partition_residual(const PartitionPlan& plan, std::span<const double> x_virtual);

/// Subset sums are accepted within this tolerance relative to x_tot.
inline constexpr double kSubsetSumTol = 1e-12;

struct OrthoAllocation {
  std::vector<std::size_t> sequence_index;           // e_n per virtual user
  std::vector<double> powers;                        // per virtual user
  std::vector<double> rates;                         // nats/chip, per virtual user
  std::vector<std::vector<std::size_t>> decode_order;  // per subset, first decoded first
};

/// Rate-constrained: SIC powers p_k = (I_k/N)(exp{2N r_k} − 1), where
/// I_k = exp{2N Σ_{j<k in subset} r_j}. `rates` are per virtual user in nats.
/// Throws kPartitionInvalid unless every subset carries r_tot/N.
OrthoAllocation allocate_orthogonal(const PartitionPlan& plan, std::span<const double> rates);

/// Power-constrained mirror: per-subset vertex rates under the same decode
/// order. Throws kPartitionInvalid unless every subset carries p_tot/N.
OrthoAllocation orthogonal_capacity_allocation(const PartitionPlan& plan,
                                               std::span<const double> powers);

}  // namespace seqalloc::split
