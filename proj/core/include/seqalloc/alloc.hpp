#pragma once

// Sequential spreading-sequence allocation for symbol-synchronous CDMA.
//
// Users are added one at a time. Each addition raises at most two eigenvalues
// of A_k = I + Σ N p_j s_j s_jᵀ, filling dimensions up to a common cap
// λ_max; the update vector c_k comes from the rank-one inverse eigenvalue
// solver, s_k = c_k/‖c_k‖ and N p_k = ‖c_k‖². The terminal A_K is λ_max·I.
//
// Rates are natural-log units (nats/chip) throughout.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "seqalloc/linalg.hpp"

namespace seqalloc::alloc {

enum class Mode {
  kRateConstrained,   // demands are rates; minimize sum power
  kPowerConstrained,  // demands are powers; maximize sum rate
};

struct ProblemInstance {
  std::size_t N = 1;            // processing gain (chips per symbol)
  std::vector<double> demands;  // rates in nats/chip, or powers per chip
  Mode mode = Mode::kPowerConstrained;

  std::size_t K() const noexcept { return demands.size(); }
  double total() const;
  /// Throws kInvalidArgument / kNonPositiveDemand.
  void validate() const;
};

struct Options {
  /// Relative band around λ_max inside which a filled dimension counts as
  /// exactly full (case b).
  double tol_fill = 1e-12;
  /// Forwarded to the interlacing checks.
  double tol_cluster = 1e-9;
  /// Columns with |s_iᵀ s_j| >= 1 − tol_match are the same sequence.
  double tol_match = 1e-9;
};

enum class StepCase {
  kA,        // one eigenvalue grows, dimension not yet full
  kB,        // one eigenvalue grows and exactly fills its dimension
  kC,        // dimension fills and the excess spills into the next one
  kPrivate,  // oversized user on its own orthogonal dimension
};

const char* to_string(StepCase c);

/// Running state of the dimension-filling process on a (sub)system of D
/// dimensions: entries before `fill` sit at lambda_max, entries after it at 1.
struct SpectrumState {
  std::vector<double> lambda;
  std::size_t fill = 0;
  double lambda_max = 1.0;

  /// Checks the fill-pointer shape within tol (relative to lambda_max).
  bool well_formed(double tol) const;
};

struct StepRecord {
  std::size_t user = 0;
  StepCase step = StepCase::kA;
  linalg::Spectrum lambda;  // σ(A_k) after this user
  linalg::Vector c;
  double assigned = 0.0;    // p_k when rate-constrained, r_k otherwise
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::size_t columns_touched = 0;
};

using StepTrace = std::vector<StepRecord>;  // in processing order

struct Allocation {
  linalg::Matrix S;          // N×K, unit columns, column k is user k
  std::vector<double> p;     // powers
  std::vector<double> r;     // rates, nats/chip
  linalg::OrthoBasis basis_final;
  std::size_t distinct_count = 0;
  std::vector<std::size_t> order;          // processing order
  std::vector<std::size_t> private_users;  // peeled users, in peel order
  double lambda_max = 1.0;                 // cap on the shared subsystem
};

struct Result {
  Allocation allocation;
  StepTrace trace;
};

/// Flags user k iff N·x_k > x_tot.
std::vector<bool> check_oversized(const ProblemInstance& inst);

/// Greedy fixed point: repeatedly removes the largest remaining demand while
/// N'·x_k > x'_tot on the reduced system. Returns users in peel order.
std::vector<std::size_t> peel_oversized(const ProblemInstance& inst);

/// Rate-constrained allocation. Refuses (kOversizedUser, index = user) when
/// any user is oversized.
Result allocate_min_power(const ProblemInstance& inst, const std::vector<std::size_t>& order,
                          const Options& options = {});

/// Power-constrained allocation. Same refusal rule.
Result allocate_max_rate(const ProblemInstance& inst, const std::vector<std::size_t>& order,
                         const Options& options = {});

/// Peels oversized users onto private orthogonal dimensions, then runs the
/// matching allocator on the remaining N − L dimensions.
Result allocate_with_oversized(const ProblemInstance& inst,
                               const std::vector<std::size_t>& order,
                               const Options& options = {});

/// Number of distinct columns of S, with s and −s identified.
std::size_t sequence_audit(const linalg::Matrix& S, double tol_match = 1e-9);

std::vector<std::size_t> identity_order(std::size_t k);
std::vector<std::size_t> reverse_order(std::size_t k);
/// Deterministic for a given seed on every platform.
std::vector<std::size_t> random_order(std::size_t k, std::uint64_t seed);

}  // namespace seqalloc::alloc
