#include "seqalloc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "seqalloc/alloc.hpp"
#include "seqalloc/error.hpp"

namespace seqalloc::verify {

namespace {

constexpr double kUnitTol = 1e-10;
constexpr std::size_t kMaxExhaustiveUsers = 30;

void check_inputs(const linalg::Matrix& S, std::span<const double> p) {
  if (S.cols() != p.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one power per column of S is required");
  }
  for (std::size_t k = 0; k < S.cols(); ++k) {
    if (!std::isfinite(p[k]) || p[k] < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "powers must be finite and non-negative", k);
    }
    if (std::abs(linalg::norm(S.col(k)) - 1.0) > kUnitTol) {
      throw Error(ErrorCode::kNonUnitSequence, "sequence column is not unit norm", k);
    }
  }
}

std::vector<std::size_t> mask_members(std::uint64_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; mask != 0; ++k, mask >>= 1) {
    if (mask & 1u) out.push_back(k);
  }
  return out;
}

struct Partial {
  double worst = std::numeric_limits<double>::infinity();
  std::size_t where = 0;
};

}  // namespace

linalg::SymMatrix signal_matrix(const linalg::Matrix& S, std::span<const double> p,
                                std::span<const std::size_t> users) {
  const std::size_t n = S.rows();
  const double nn = static_cast<double>(n);
  linalg::SymMatrix a = linalg::SymMatrix::identity(n);
  for (std::size_t k : users) {
    const auto s = S.col(k);
    const double w = nn * p[k];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) a.add(i, j, w * s[i] * s[j]);
    }
  }
  return a;
}

linalg::SymMatrix signal_matrix(const linalg::Matrix& S, std::span<const double> p) {
  const auto all = alloc::identity_order(S.cols());
  return signal_matrix(S, p, all);
}

RegionCheckReport region_membership(const linalg::Matrix& S, std::span<const double> p,
                                    std::span<const double> r, const SubsetPolicy& policy,
                                    double tol) {
  check_inputs(S, p);
  const std::size_t k_users = S.cols();
  if (r.size() != k_users) {
    throw Error(ErrorCode::kDimensionMismatch, "one rate per column of S is required");
  }
  const double nn = static_cast<double>(S.rows());

  RegionCheckReport report;
  report.tol = tol;
  report.exhaustive = policy.force_exhaustive || k_users <= policy.exhaustive_limit;
  if (report.exhaustive && k_users > kMaxExhaustiveUsers) {
    throw Error(ErrorCode::kInvalidArgument, "exhaustive subset check is limited to 30 users");
  }

  // Sampled mode materializes its subsets up front; exhaustive mode walks
  // masks 1..2^K−1 directly.
  std::vector<std::vector<std::size_t>> listed;
  std::size_t count;
  if (report.exhaustive) {
    count = (std::size_t{1} << k_users) - 1;
  } else {
    for (std::size_t k = 0; k < k_users; ++k) listed.push_back({k});
    listed.push_back(alloc::identity_order(k_users));
    const auto order =
        policy.decode_order.empty() ? alloc::identity_order(k_users) : policy.decode_order;
    std::vector<std::size_t> prefix;
    for (std::size_t k : order) {
      prefix.push_back(k);
      auto sorted = prefix;
      std::sort(sorted.begin(), sorted.end());
      listed.push_back(std::move(sorted));
    }
    std::mt19937_64 rng(policy.seed);
    while (listed.size() < 2 * k_users + 1 + policy.sample_count) {
      std::vector<std::size_t> members;
      for (std::size_t k = 0; k < k_users; ++k) {
        if (rng() >> 63) members.push_back(k);
      }
      if (!members.empty()) listed.push_back(std::move(members));
    }
    count = listed.size();
  }

  auto members_of = [&](std::size_t i) {
    return report.exhaustive ? mask_members(static_cast<std::uint64_t>(i) + 1) : listed[i];
  };
  auto slack_of = [&](const std::vector<std::size_t>& members) {
    double sum_r = 0.0;
    for (std::size_t k : members) sum_r += r[k];
    const double bound = linalg::log_det_spd(signal_matrix(S, p, members)) / (2.0 * nn);
    return bound - sum_r;
  };

  unsigned threads = policy.threads;
  if (threads == 0) threads = std::clamp(std::thread::hardware_concurrency(), 1u, 8u);
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count / 64, 1)));

  // Contiguous chunks, one per worker; ties resolve to the lowest index so
  // the report does not depend on the thread count.
  std::vector<Partial> partial(threads);
  std::vector<std::exception_ptr> failure(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          const std::size_t lo = count * t / threads;
          const std::size_t hi = count * (t + 1) / threads;
          for (std::size_t i = lo; i < hi; ++i) {
            const double s = slack_of(members_of(i));
            if (s < partial[t].worst) partial[t] = {s, i};
          }
        } catch (...) {
          failure[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& f : failure) {
    if (f) std::rethrow_exception(f);
  }

  Partial best;
  for (const auto& part : partial) {
    if (part.worst < best.worst) best = part;
  }
  report.checked = count;
  report.worst_slack = best.worst;
  if (count > 0) report.worst_subset = members_of(best.where);
  if (best.worst < -tol) report.violating_subset = report.worst_subset;
  return report;
}

std::vector<double> vertex_rates(const linalg::Matrix& S, std::span<const double> p,
                                 const std::vector<std::size_t>& order) {
  check_inputs(S, p);
  const std::size_t k_users = S.cols();
  if (order.size() != k_users) {
    throw Error(ErrorCode::kInvalidArgument, "vertex_rates: order must list every user");
  }
  const std::size_t n = S.rows();
  const double nn = static_cast<double>(n);
  std::vector<double> r(k_users, 0.0);
  linalg::SymMatrix a = linalg::SymMatrix::identity(n);
  double previous = 0.0;
  for (std::size_t k : order) {
    const auto s = S.col(k);
    const double w = nn * p[k];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) a.add(i, j, w * s[i] * s[j]);
    }
    const double current = linalg::log_det_spd(a);
    r[k] = (current - previous) / (2.0 * nn);
    previous = current;
  }
  return r;
}

BoundChainReport bound_chain(const linalg::Matrix& S, std::span<const double> p,
                             std::optional<std::span<const double>> r) {
  check_inputs(S, p);
  const std::size_t n = S.rows();
  const double nn = static_cast<double>(n);
  BoundChainReport out;
  for (std::size_t k = 0; k < S.cols(); ++k) {
    out.p_tot += p[k];
    double col = 0.0;
    for (double v : S.col(k)) col += v * v;
    out.trace_sps += p[k] * col;
  }
  out.trace_identity_gap = std::abs(out.p_tot - out.trace_sps);

  const linalg::SymMatrix a = signal_matrix(S, p);
  out.mean_eigenvalue = a.trace() / nn;
  out.geometric_mean = std::exp(linalg::log_det_spd(a) / nn);
  out.am_gm_slack = (out.mean_eigenvalue - out.geometric_mean) / out.mean_eigenvalue;
  out.gwbe_deviation = gwbe_deviation(S, p, out.mean_eigenvalue) / out.mean_eigenvalue;
  if (r) {
    double r_tot = 0.0;
    for (double v : *r) r_tot += v;
    out.rate_slack = out.geometric_mean - std::exp(2.0 * r_tot);
    out.power_slack = out.p_tot - std::expm1(2.0 * r_tot);
  } else {
    out.power_slack = out.p_tot - (out.geometric_mean - 1.0);
  }
  return out;
}

double gwbe_deviation(const linalg::Matrix& S, std::span<const double> p, double lambda_max) {
  check_inputs(S, p);
  linalg::SymMatrix a = signal_matrix(S, p);
  for (std::size_t i = 0; i < a.dim(); ++i) a.add(i, i, -lambda_max);
  return a.inf_norm();
}

NecessityReport necessity_demo(std::size_t N) {
  if (N < 2) throw Error(ErrorCode::kInvalidArgument, "necessity demo requires N >= 2");
  const std::size_t K = 2 * N - 1;
  const double nn = static_cast<double>(N);
  const double kk = static_cast<double>(K);

  NecessityReport rep;
  rep.N = N;
  rep.K = K;
  rep.note =
      "users 0 and 1 share one sequence; the rest of the allocation is completed by the "
      "sequential allocator on the remaining N-1 dimensions. The strict gap holds for every "
      "completion, so any completion exhibits it.";

  // Users 0 and 1 as one compound user; it is oversized by construction, so
  // the allocator gives it a private dimension.
  auto completion = [&](alloc::Mode mode, double per_user) {
    alloc::ProblemInstance compound;
    compound.N = N;
    compound.mode = mode;
    compound.demands.assign(K - 1, per_user);
    compound.demands[0] = 2.0 * per_user;
    auto result = alloc::allocate_with_oversized(compound, alloc::identity_order(K - 1));
    const auto& priv = result.allocation.private_users;
    if (std::find(priv.begin(), priv.end(), std::size_t{0}) == priv.end()) {
      throw Error(ErrorCode::kInvalidArgument, "compound user was not peeled");
    }
    linalg::Matrix S(N, K);
    const auto shared = result.allocation.S.col(0);
    std::copy(shared.begin(), shared.end(), S.col(0).begin());
    std::copy(shared.begin(), shared.end(), S.col(1).begin());
    for (std::size_t k = 1; k + 1 < K; ++k) {
      const auto src = result.allocation.S.col(k);
      std::copy(src.begin(), src.end(), S.col(k + 1).begin());
    }
    return std::make_pair(S, result.allocation);
  };

  const auto all = alloc::identity_order(K);
  const std::vector<std::size_t> pair = {0, 1};

  // Power-constrained side.
  {
    rep.p_tot = kk;  // unit power per user
    const double per_user = rep.p_tot / kk;
    auto [S, compound] = completion(alloc::Mode::kPowerConstrained, per_user);
    const std::vector<double> p(K, per_user);
    rep.lambda1_pair = linalg::eig_oracle(signal_matrix(S, p, pair)).values[0];
    rep.lambda1_pair_formula = 1.0 + 2.0 * nn * rep.p_tot / kk;
    rep.lambda1_final = linalg::eig_oracle(signal_matrix(S, p)).values[0];
    rep.mean_eigenvalue = signal_matrix(S, p).trace() / nn;
    const auto rates = vertex_rates(S, p, all);
    for (double v : rates) rep.sum_rate += v;
    rep.sum_capacity = 0.5 * std::log1p(rep.p_tot);
    rep.rate_gap = rep.sum_capacity - rep.sum_rate;
  }

  // Rate-constrained side.
  {
    rep.r_tot = 1.0;
    const double per_user = rep.r_tot / kk;
    auto [S, compound] = completion(alloc::Mode::kRateConstrained, per_user);
    std::vector<double> p(K);
    // Successive cancellation on the shared sequence: user 1 is decoded
    // first and sees user 0 as interference.
    p[0] = std::expm1(2.0 * nn * per_user) / nn;
    p[1] = std::exp(2.0 * nn * per_user) * std::expm1(2.0 * nn * per_user) / nn;
    for (std::size_t k = 1; k + 1 < K; ++k) p[k + 1] = compound.p[k];
    rep.lambda1_pair_rate = linalg::eig_oracle(signal_matrix(S, p, pair)).values[0];
    rep.lambda_max_rate = std::exp(2.0 * rep.r_tot);
    for (double v : p) rep.power_used += v;
    rep.power_minimum = std::expm1(2.0 * rep.r_tot);
    rep.power_gap = rep.power_used - rep.power_minimum;
    const auto rates = vertex_rates(S, p, all);
    for (double v : rates) {
      rep.rate_reproduction_error = std::max(rep.rate_reproduction_error, std::abs(v - per_user));
    }
  }
  return rep;
}

}  // namespace seqalloc::verify
