#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace seqalloc::testing {

linalg::OrthoBasis random_orthogonal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> gauss;
  linalg::Matrix q(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    auto col = q.col(j);
    for (;;) {
      for (double& v : col) v = gauss(rng);
      // two passes keep the columns orthogonal to machine precision
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < j; ++i) {
          const double d = linalg::dot(q.col(i), col);
          for (std::size_t r = 0; r < n; ++r) col[r] -= d * q(r, i);
        }
      }
      const double len = linalg::norm(col);
      if (len > 1e-6) {
        for (double& v : col) v /= len;
        break;
      }
    }
  }
  return linalg::OrthoBasis(std::move(q));
}

std::vector<double> random_spectrum(std::size_t n, Rng& rng, double min_gap) {
  std::uniform_real_distribution<double> gap(0.0, 1.0);
  std::uniform_real_distribution<double> base(0.0, 2.0);
  std::vector<double> out(n);
  double v = base(rng);
  for (std::size_t i = n; i-- > 0;) {
    out[i] = v;
    v += min_gap + gap(rng);
  }
  return out;
}

std::vector<double> clustered_spectrum(std::size_t n, std::size_t max_mult, Rng& rng) {
  std::uniform_real_distribution<double> gap(0.5, 1.5);
  std::uniform_int_distribution<std::size_t> mult(1, std::max<std::size_t>(1, max_mult));
  std::vector<double> out;
  double v = 0.5;
  while (out.size() < n) {
    const std::size_t m = std::min(mult(rng), n - out.size());
    for (std::size_t i = 0; i < m; ++i) out.push_back(v);
    v += gap(rng);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<double> interlacing_target(std::span<const double> lambda, Rng& rng,
                                       double min_gap) {
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  std::uniform_real_distribution<double> top(0.1, 2.0);
  std::vector<double> out(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double hi = i == 0 ? lambda[0] + top(rng) : lambda[i - 1];
    const double lo = lambda[i];
    double v = lo + frac(rng) * (hi - lo);
    v = std::clamp(v, lo + min_gap, hi - min_gap);
    out[i] = v;
  }
  return out;
}

std::vector<double> clustered_target(std::span<const double> lambda, Rng& rng) {
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  std::uniform_real_distribution<double> top(0.1, 2.0);
  std::vector<double> out(lambda.begin(), lambda.end());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const bool first_of_cluster = i == 0 || lambda[i - 1] != lambda[i];
    if (!first_of_cluster) continue;
    const double hi = i == 0 ? lambda[0] + top(rng) : lambda[i - 1];
    out[i] = lambda[i] + frac(rng) * (hi - lambda[i]);
  }
  return out;
}

alloc::ProblemInstance random_instance(alloc::Mode mode, std::size_t N, std::size_t K, Rng& rng,
                                       double total_lo, double total_hi) {
  std::uniform_real_distribution<double> raw(0.1, 1.0);
  std::uniform_real_distribution<double> total(total_lo, total_hi);
  alloc::ProblemInstance inst;
  inst.N = N;
  inst.mode = mode;
  for (int attempt = 0;; ++attempt) {
    inst.demands.assign(K, 1.0);
    if (attempt < 100) {
      for (double& d : inst.demands) d = raw(rng);
    }
    const double sum = std::accumulate(inst.demands.begin(), inst.demands.end(), 0.0);
    const double scale = total(rng) / sum;
    for (double& d : inst.demands) d *= scale;
    const double x_tot = inst.total();
    const bool ok = std::none_of(inst.demands.begin(), inst.demands.end(), [&](double d) {
      return static_cast<double>(N) * d > x_tot;
    });
    if (ok) return inst;
  }
}

alloc::ProblemInstance oversized_instance(alloc::Mode mode, std::size_t N, std::size_t L,
                                          Rng& rng) {
  std::uniform_real_distribution<double> small(0.5, 1.0);
  std::uniform_int_distribution<std::size_t> count(2 * N, 3 * N);
  const std::size_t rest = count(rng);
  std::vector<double> tail(rest);
  for (double& d : tail) d = small(rng);
  const double rest_total = std::accumulate(tail.begin(), tail.end(), 0.0);
  alloc::ProblemInstance inst;
  inst.N = N;
  inst.mode = mode;
  for (std::size_t l = 0; l < L; ++l) inst.demands.push_back(3.0 * rest_total * (1.0 + 0.1 * l));
  inst.demands.insert(inst.demands.end(), tail.begin(), tail.end());
  // rates: keep λ_max = exp{2 r_tot} modest
  const double target = mode == alloc::Mode::kRateConstrained ? 2.0 : 10.0;
  const double scale = target / inst.total();
  for (double& d : inst.demands) d *= scale;
  return inst;
}

double rel_diff(double a, double b, double floor) {
  return std::abs(a - b) / std::max({floor, std::abs(a), std::abs(b)});
}

double max_rel_diff(std::span<const double> a, std::span<const double> b, double floor) {
  double scale = floor;
  for (double v : b) scale = std::max(scale, std::abs(v));
  double worst = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

linalg::SymMatrix gram(const linalg::Matrix& S, std::span<const double> p,
                       std::span<const std::size_t> users) {
  const std::size_t n = S.rows();
  auto a = linalg::SymMatrix::identity(n);
  const double nn = static_cast<double>(n);
  for (std::size_t k : users) {
    const auto s = S.col(k);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) a.add(i, j, nn * p[k] * s[i] * s[j]);
    }
  }
  return a;
}

}  // namespace seqalloc::testing
