#include "seqalloc/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "seqalloc/error.hpp"
#include "seqalloc/iep.hpp"

namespace seqalloc::alloc {

namespace {

// Relative slack on the oversized test so that a user sitting exactly on the
// boundary N·x_k = x_tot is not flagged by rounding in x_tot.
constexpr double kOversizeSlack = 1e-12;
// A spill past λ_max in the last dimension can only be rounding; anything
// larger than this means the instance was oversized after all.
constexpr double kLastDimensionSlack = 1e-9;

void validate_order(const std::vector<std::size_t>& order, std::size_t k) {
  if (order.size() != k) {
    throw Error(ErrorCode::kInvalidArgument, "order is not a permutation of the users");
  }
  std::vector<bool> seen(k, false);
  for (std::size_t u : order) {
    if (u >= k || seen[u]) {
      throw Error(ErrorCode::kInvalidArgument, "order is not a permutation of the users", u);
    }
    seen[u] = true;
  }
}

class Engine {
 public:
  Engine(const ProblemInstance& inst, const Options& options,
         std::vector<std::size_t> private_users)
      : inst_(inst),
        options_(options),
        n_(inst.N),
        offset_(private_users.size()),
        basis_(linalg::OrthoBasis::identity(inst.N)) {
    if (offset_ > n_ || (offset_ == n_ && offset_ < inst.K())) {
      throw Error(ErrorCode::kDimensionsExhausted,
                  "oversized users exhaust the available dimensions");
    }
    private_dim_.assign(inst.K(), kShared);
    for (std::size_t d = 0; d < private_users.size(); ++d) private_dim_[private_users[d]] = d;
    private_lambda_.assign(offset_, 1.0);

    const std::size_t dims = n_ - offset_;
    state_.lambda.assign(dims, 1.0);
    state_.fill = 0;
    double shared_total = 0.0;
    for (std::size_t k = 0; k < inst.K(); ++k) {
      if (private_dim_[k] == kShared) shared_total += inst.demands[k];
    }
    const double nn = static_cast<double>(n_);
    if (dims == 0 || shared_total == 0.0) {
      state_.lambda_max = 1.0;
    } else if (inst.mode == Mode::kRateConstrained) {
      state_.lambda_max = std::exp(2.0 * nn * shared_total / static_cast<double>(dims));
    } else {
      state_.lambda_max = 1.0 + nn * shared_total / static_cast<double>(dims);
    }

    alloc_.S = linalg::Matrix(n_, inst.K());
    alloc_.p.assign(inst.K(), 0.0);
    alloc_.r.assign(inst.K(), 0.0);
    alloc_.private_users = std::move(private_users);
    alloc_.lambda_max = state_.lambda_max;
  }

  Result run(const std::vector<std::size_t>& order) {
    alloc_.order = order;
    trace_.reserve(order.size());
    for (std::size_t user : order) {
      if (private_dim_[user] != kShared) {
        add_private(user);
      } else {
        add_shared(user);
      }
    }
    alloc_.basis_final = basis_;
    alloc_.distinct_count = sequence_audit(alloc_.S, options_.tol_match);
    return {std::move(alloc_), std::move(trace_)};
  }

 private:
  static constexpr std::size_t kShared = static_cast<std::size_t>(-1);

  bool rate_mode() const { return inst_.mode == Mode::kRateConstrained; }

  linalg::Spectrum full_spectrum() const {
    if (offset_ == 0) return linalg::Spectrum(state_.lambda);
    std::vector<double> all(private_lambda_);
    all.insert(all.end(), state_.lambda.begin(), state_.lambda.end());
    return linalg::Spectrum(std::move(all));
  }

  void emit(std::size_t user, StepRecord rec, std::span<const double> s) {
    std::copy(s.begin(), s.end(), alloc_.S.col(user).begin());
    rec.user = user;
    rec.lambda = full_spectrum();
    trace_.push_back(std::move(rec));
  }

  void add_private(std::size_t user) {
    const std::size_t d = private_dim_[user];
    const double nn = static_cast<double>(n_);
    const double x = inst_.demands[user];
    StepRecord rec;
    rec.step = StepCase::kPrivate;
    rec.columns_touched = 1;
    if (rate_mode()) {
      alloc_.r[user] = x;
      alloc_.p[user] = std::expm1(2.0 * nn * x) / nn;
      private_lambda_[d] = std::exp(2.0 * nn * x);
      rec.assigned = alloc_.p[user];
    } else {
      alloc_.p[user] = x;
      alloc_.r[user] = std::log1p(nn * x) / (2.0 * nn);
      private_lambda_[d] = 1.0 + nn * x;
      rec.assigned = alloc_.r[user];
    }
    rec.c = iep::same_direction_vector(basis_.column(d), 1.0, private_lambda_[d]);
    emit(user, std::move(rec), basis_.column(d));
  }

  void add_shared(std::size_t user) {
    const std::size_t dims = state_.lambda.size();
    const std::size_t n = state_.fill;
    if (n >= dims) {
      throw Error(ErrorCode::kInvalidArgument,
                  "every dimension is already full; demand totals are inconsistent", user);
    }
    const double nn = static_cast<double>(n_);
    const double x = inst_.demands[user];
    const double lmax = state_.lambda_max;
    const double ln = state_.lambda[n];
    const double grown = rate_mode() ? ln * std::exp(2.0 * nn * x) : ln + nn * x;

    StepCase step;
    if (std::abs(grown - lmax) <= options_.tol_fill * lmax) {
      step = StepCase::kB;
    } else if (grown < lmax) {
      step = StepCase::kA;
    } else if (n + 1 == dims) {
      if (grown > lmax * (1.0 + kLastDimensionSlack)) {
        throw Error(ErrorCode::kOversizedUser,
                    "user overflows the last dimension; instance has an oversized user", user);
      }
      step = StepCase::kB;
    } else {
      step = StepCase::kC;
    }

    const std::size_t col = offset_ + n;
    StepRecord rec;
    rec.step = step;
    if (step != StepCase::kC) {
      const double target = step == StepCase::kA ? grown : lmax;
      rec.c = iep::same_direction_vector(basis_.column(col), ln, target);
      rec.columns_touched = 1;
      if (rate_mode()) {
        alloc_.r[user] = x;
        alloc_.p[user] = (target - ln) / nn;
        rec.assigned = alloc_.p[user];
      } else {
        alloc_.p[user] = x;
        alloc_.r[user] = std::log1p((target - ln) / ln) / (2.0 * nn);
        rec.assigned = alloc_.r[user];
      }
      state_.lambda[n] = target;
      if (step == StepCase::kB) ++state_.fill;
      emit(user, std::move(rec), basis_.column(col));
      return;
    }

    // Case (c): dimension n fills up, the excess spills into n+1 (which is 1).
    const double ln1 = state_.lambda[n + 1];
    double hat_n1 = rate_mode() ? ln1 * ((ln / lmax) * std::exp(2.0 * nn * x))
                                : ln1 + ln + nn * x - lmax;
    if (hat_n1 > ln) {
      if (hat_n1 - ln > options_.tol_fill * lmax) {
        throw Error(ErrorCode::kOversizedUser,
                    "spill exceeds the current eigenvalue; instance has an oversized user", user);
      }
      hat_n1 = ln;
    }
    const iep::PlaneUpdate pu = iep::plane_update(ln, ln1, lmax, hat_n1);
    const auto un = basis_.column(col);
    const auto un1 = basis_.column(col + 1);
    rec.c.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) rec.c[i] = pu.y_n * un[i] + pu.y_n1 * un1[i];
    const double cn = linalg::norm(rec.c);
    std::vector<double> s(n_);
    for (std::size_t i = 0; i < n_; ++i) s[i] = rec.c[i] / cn;
    rec.alpha = pu.alpha;
    rec.beta = pu.beta;
    rec.columns_touched = 2;
    basis_.rotate_plane(col, pu.alpha, pu.beta);

    if (rate_mode()) {
      alloc_.r[user] = x;
      alloc_.p[user] = ((lmax - ln) + (hat_n1 - ln1)) / nn;
      rec.assigned = alloc_.p[user];
    } else {
      alloc_.p[user] = x;
      alloc_.r[user] = (std::log(lmax / ln) + std::log(hat_n1 / ln1)) / (2.0 * nn);
      rec.assigned = alloc_.r[user];
    }
    state_.lambda[n] = lmax;
    state_.lambda[n + 1] = hat_n1;
    ++state_.fill;
    emit(user, std::move(rec), s);
  }

  const ProblemInstance& inst_;
  const Options& options_;
  std::size_t n_;
  std::size_t offset_;
  linalg::OrthoBasis basis_;
  SpectrumState state_;
  std::vector<std::size_t> private_dim_;
  std::vector<double> private_lambda_;
  Allocation alloc_;
  StepTrace trace_;
};

Result allocate_plain(const ProblemInstance& inst, const std::vector<std::size_t>& order,
                      const Options& options, Mode expected) {
  inst.validate();
  if (inst.mode != expected) {
    throw Error(ErrorCode::kInvalidArgument, "instance mode does not match the allocator");
  }
  validate_order(order, inst.K());
  const auto flags = check_oversized(inst);
  for (std::size_t k = 0; k < flags.size(); ++k) {
    if (flags[k]) {
      std::ostringstream os;
      os << "user " << k << " is oversized (N*x_k > x_tot)";
      throw Error(ErrorCode::kOversizedUser, os.str(), k);
    }
  }
  return Engine(inst, options, {}).run(order);
}

}  // namespace

const char* to_string(StepCase c) {
  switch (c) {
    case StepCase::kA: return "2a";
    case StepCase::kB: return "2b";
    case StepCase::kC: return "2c";
    case StepCase::kPrivate: return "private";
  }
  return "?";
}

double ProblemInstance::total() const {
  double t = 0.0;
  for (double x : demands) t += x;
  return t;
}

void ProblemInstance::validate() const {
  if (N == 0) throw Error(ErrorCode::kInvalidArgument, "processing gain N must be positive");
  if (demands.empty()) throw Error(ErrorCode::kInvalidArgument, "instance has no users");
  for (std::size_t k = 0; k < demands.size(); ++k) {
    if (!std::isfinite(demands[k]) || !(demands[k] > 0.0)) {
      std::ostringstream os;
      os << "demand of user " << k << " must be positive and finite";
      throw Error(ErrorCode::kNonPositiveDemand, os.str(), k);
    }
  }
}

bool SpectrumState::well_formed(double tol) const {
  const double band = tol * lambda_max;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (i < fill && std::abs(lambda[i] - lambda_max) > band) return false;
    if (i > fill && lambda[i] != 1.0) return false;
    if (i == fill && (lambda[i] < 1.0 || lambda[i] > lambda_max + band)) return false;
  }
  return true;
}

std::vector<bool> check_oversized(const ProblemInstance& inst) {
  const double total = inst.total();
  const double nn = static_cast<double>(inst.N);
  std::vector<bool> flags(inst.K());
  for (std::size_t k = 0; k < inst.K(); ++k) {
    flags[k] = nn * inst.demands[k] > total * (1.0 + kOversizeSlack);
  }
  return flags;
}

std::vector<std::size_t> peel_oversized(const ProblemInstance& inst) {
  inst.validate();
  std::vector<bool> remaining(inst.K(), true);
  std::size_t dims = inst.N;
  std::vector<std::size_t> peeled;
  for (;;) {
    double total = 0.0;
    std::size_t largest = inst.K();
    for (std::size_t k = 0; k < inst.K(); ++k) {
      if (!remaining[k]) continue;
      total += inst.demands[k];
      if (largest == inst.K() || inst.demands[k] > inst.demands[largest]) largest = k;
    }
    if (largest == inst.K()) break;
    if (!(static_cast<double>(dims) * inst.demands[largest] > total * (1.0 + kOversizeSlack))) {
      break;
    }
    if (dims <= 1) {
      throw Error(ErrorCode::kDimensionsExhausted,
                  "peeling oversized users exhausts the available dimensions", largest);
    }
    peeled.push_back(largest);
    remaining[largest] = false;
    --dims;
  }
  return peeled;
}

Result allocate_min_power(const ProblemInstance& inst, const std::vector<std::size_t>& order,
                          const Options& options) {
  return allocate_plain(inst, order, options, Mode::kRateConstrained);
}

Result allocate_max_rate(const ProblemInstance& inst, const std::vector<std::size_t>& order,
                         const Options& options) {
  return allocate_plain(inst, order, options, Mode::kPowerConstrained);
}

Result allocate_with_oversized(const ProblemInstance& inst,
                               const std::vector<std::size_t>& order, const Options& options) {
  inst.validate();
  validate_order(order, inst.K());
  return Engine(inst, options, peel_oversized(inst)).run(order);
}

std::size_t sequence_audit(const linalg::Matrix& S, double tol_match) {
  std::vector<std::size_t> reps;
  for (std::size_t j = 0; j < S.cols(); ++j) {
    const auto sj = S.col(j);
    const bool seen = std::any_of(reps.begin(), reps.end(), [&](std::size_t r) {
      return std::abs(linalg::dot(S.col(r), sj)) >= 1.0 - tol_match;
    });
    if (!seen) reps.push_back(j);
  }
  return reps.size();
}

std::vector<std::size_t> identity_order(std::size_t k) {
  std::vector<std::size_t> o(k);
  for (std::size_t i = 0; i < k; ++i) o[i] = i;
  return o;
}

std::vector<std::size_t> reverse_order(std::size_t k) {
  std::vector<std::size_t> o(k);
  for (std::size_t i = 0; i < k; ++i) o[i] = k - 1 - i;
  return o;
}

std::vector<std::size_t> random_order(std::size_t k, std::uint64_t seed) {
  // std::shuffle and the standard distributions are implementation-defined;
  // a plain Fisher-Yates over mt19937_64 output is not.
  std::mt19937_64 rng(seed);
  auto o = identity_order(k);
  for (std::size_t i = k; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(o[i - 1], o[j]);
  }
  return o;
}

}  // namespace seqalloc::alloc
