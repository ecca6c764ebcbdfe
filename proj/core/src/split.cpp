#include "seqalloc/split.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seqalloc/error.hpp"

namespace seqalloc::split {

namespace {

// A running sum within this fraction of x_tot from a cut point counts as
// landing on it exactly, and the user is not split there.
constexpr double kBoundaryTol = 1e-12;
// Parts smaller than this fraction of x_tot are folded into their neighbour.
constexpr double kMinPart = 1e-15;

void check_partition(const PartitionPlan& plan, std::span<const double> x, const char* what) {
  if (x.size() != plan.K_prime()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": one value per virtual user is required");
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !(x[k] > 0.0)) {
      throw Error(ErrorCode::kNonPositiveDemand,
                  std::string(what) + ": values must be positive", k);
    }
  }
  const double residual = partition_residual(plan, x);
  if (!(residual <= kSubsetSumTol)) {
    std::ostringstream os;
    os << what << ": subsets do not carry equal totals (relative residual " << residual << ")";
    throw Error(ErrorCode::kPartitionInvalid, os.str());
  }
}

}  // namespace

std::vector<double> PartitionPlan::virtual_demands() const {
  std::vector<double> out;
  out.reserve(virtual_users.size());
  for (const auto& v : virtual_users) out.push_back(v.demand);
  return out;
}

std::size_t PartitionPlan::span_of(std::size_t original) const {
  std::vector<std::size_t> seen;
  for (const auto& v : virtual_users) {
    if (v.original == original && std::find(seen.begin(), seen.end(), v.subset) == seen.end()) {
      seen.push_back(v.subset);
    }
  }
  return seen.size();
}

PartitionPlan make_partition(std::span<const double> x, std::size_t N) {
  if (N == 0) throw Error(ErrorCode::kInvalidArgument, "make_partition: N must be positive");
  if (x.empty()) throw Error(ErrorCode::kInvalidArgument, "make_partition: no users");
  double total = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !(x[k] > 0.0)) {
      throw Error(ErrorCode::kNonPositiveDemand, "make_partition: demands must be positive", k);
    }
    total += x[k];
  }
  const double eq_tol = kBoundaryTol * total;
  const double min_part = kMinPart * total;
  const double nn = static_cast<double>(N);
  auto cut = [&](std::size_t j) { return static_cast<double>(j) * total / nn; };

  PartitionPlan plan;
  plan.N = N;
  plan.subsets.resize(N);
  std::size_t subset = 0;
  std::size_t next_cut = 1;  // cuts j = 1..N−1
  double running = 0.0;

  for (std::size_t k = 0; k < x.size(); ++k) {
    const double start = running;
    const double end = running + x[k];
    std::vector<std::pair<double, std::size_t>> pieces;  // (size, subset)
    double pos = start;
    double used = 0.0;
    while (next_cut < N && cut(next_cut) < end - eq_tol) {
      const double piece = cut(next_cut) - pos;
      if (piece >= min_part) {
        pieces.emplace_back(piece, subset);
        used += piece;
      }
      pos = cut(next_cut);
      ++subset;
      ++next_cut;
    }
    double last = x[k] - used;
    const bool lands_on_cut = next_cut < N && std::abs(end - cut(next_cut)) <= eq_tol;
    if (last < min_part && !pieces.empty()) {
      pieces.back().first += last;
    } else {
      pieces.emplace_back(last, subset);
    }
    if (lands_on_cut) {
      ++subset;
      ++next_cut;
    }
    running = end;

    if (pieces.size() > 1) {
      Split s;
      s.user = k;
      for (const auto& pc : pieces) s.parts.push_back(pc.first);
      plan.splits.push_back(std::move(s));
    }
    for (const auto& [size, sub] : pieces) {
      plan.subsets[sub].push_back(plan.virtual_users.size());
      plan.virtual_users.push_back({k, size, sub});
    }
  }
  return plan;
}

double partition_residual(const PartitionPlan& plan, std::span<const double> x_virtual) {
  if (x_virtual.size() != plan.K_prime()) {
    throw Error(ErrorCode::kDimensionMismatch, "partition_residual: size mismatch");
  }
  double total = 0.0;
  for (double v : x_virtual) total += v;
  const double share = total / static_cast<double>(plan.N);
  double worst = 0.0;
  for (const auto& members : plan.subsets) {
    double s = 0.0;
    for (std::size_t v : members) s += x_virtual[v];
    worst = std::max(worst, std::abs(s - share));
  }
  return total > 0.0 ? worst / total : worst;
}

OrthoAllocation allocate_orthogonal(const PartitionPlan& plan, std::span<const double> rates) {
  check_partition(plan, rates, "allocate_orthogonal");
  const double nn = static_cast<double>(plan.N);
  OrthoAllocation out;
  out.sequence_index.resize(plan.K_prime());
  out.powers.resize(plan.K_prime());
  out.rates.assign(rates.begin(), rates.end());
  for (std::size_t n = 0; n < plan.subsets.size(); ++n) {
    double below = 0.0;  // Σ r_j over lower-index members already placed
    for (std::size_t v : plan.subsets[n]) {
      out.sequence_index[v] = n;
      out.powers[v] = std::exp(2.0 * nn * below) * std::expm1(2.0 * nn * rates[v]) / nn;
      below += rates[v];
    }
    out.decode_order.emplace_back(plan.subsets[n].rbegin(), plan.subsets[n].rend());
  }
  return out;
}

OrthoAllocation orthogonal_capacity_allocation(const PartitionPlan& plan,
                                               std::span<const double> powers) {
  check_partition(plan, powers, "orthogonal_capacity_allocation");
  const double nn = static_cast<double>(plan.N);
  OrthoAllocation out;
  out.sequence_index.resize(plan.K_prime());
  out.powers.assign(powers.begin(), powers.end());
  out.rates.resize(plan.K_prime());
  for (std::size_t n = 0; n < plan.subsets.size(); ++n) {
    double interference = 1.0;
    for (std::size_t v : plan.subsets[n]) {
      out.sequence_index[v] = n;
      out.rates[v] = std::log1p(nn * powers[v] / interference) / (2.0 * nn);
      interference += nn * powers[v];
    }
    out.decode_order.emplace_back(plan.subsets[n].rbegin(), plan.subsets[n].rend());
  }
  return out;
}

}  // namespace seqalloc::split
