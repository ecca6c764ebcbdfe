#include <doctest.h>

#include <cmath>
#include <numeric>

#include "seqalloc/alloc.hpp"
#include "seqalloc/error.hpp"
#include "test_support.hpp"

using namespace seqalloc;
using namespace seqalloc::alloc;
using seqalloc::testing::Rng;

namespace {

ProblemInstance powers(std::size_t n, std::vector<double> p) {
  return {n, std::move(p), Mode::kPowerConstrained};
}

ProblemInstance rates(std::size_t n, std::vector<double> r) {
  return {n, std::move(r), Mode::kRateConstrained};
}

std::vector<std::string> cases(const StepTrace& t) {
  std::vector<std::string> out;
  for (const auto& s : t) out.emplace_back(to_string(s.step));
  return out;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("check_oversized") {
  for (bool b : check_oversized(powers(2, {2, 2, 3, 1}))) CHECK_FALSE(b);
  const auto flags = check_oversized(powers(2, {3, 1}));
  CHECK(flags[0]);
  CHECK_FALSE(flags[1]);
  for (bool b : check_oversized(rates(3, {0.2, 0.2, 0.2, 0.2}))) CHECK_FALSE(b);
}

TEST_CASE("allocate_max_rate on the four-user example") {
  const auto res = allocate_max_rate(powers(2, {2, 2, 3, 1}), identity_order(4));
  const std::vector<std::vector<double>> traj{{5, 1}, {9, 1}, {9, 7}, {9, 9}};
  REQUIRE(res.trace.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(seqalloc::testing::max_rel_diff(res.trace[k].lambda.values(), traj[k]) < 1e-12);
  }
  CHECK(cases(res.trace) == std::vector<std::string>{"2a", "2b", "2a", "2b"});
  const auto& al = res.allocation;
  const std::vector<double> expect{std::log(5.0) / 4, std::log(9.0 / 5.0) / 4, std::log(7.0) / 4,
                                   std::log(9.0 / 7.0) / 4};
  for (std::size_t k = 0; k < 4; ++k) CHECK(al.r[k] == doctest::Approx(expect[k]).epsilon(1e-12));
  CHECK(sum(al.r) == doctest::Approx(0.5 * std::log(9.0)).epsilon(1e-12));
  CHECK(al.distinct_count == 2);
  CHECK(std::abs(linalg::dot(al.S.col(0), al.S.col(2))) < 1e-15);
  CHECK(al.lambda_max == doctest::Approx(9.0));
}

TEST_CASE("allocate_min_power") {
  SUBCASE("equal rates alternate between growing and filling") {
    const double t = 0.25;
    const auto res = allocate_min_power(rates(2, {t, t, t, t}), identity_order(4));
    CHECK(cases(res.trace) == std::vector<std::string>{"2a", "2b", "2a", "2b"});
    CHECK(sum(res.allocation.p) == doctest::Approx(std::expm1(2.0)).epsilon(1e-10));
  }
  SUBCASE("uneven rates spill into the second dimension") {
    const auto res = allocate_min_power(rates(2, {0.3, 0.3, 0.2, 0.2}), identity_order(4));
    CHECK(cases(res.trace) == std::vector<std::string>{"2a", "2c", "2a", "2b"});
    CHECK(sum(res.allocation.p) == doctest::Approx(std::expm1(2.0)).epsilon(1e-10));
    CHECK(std::isfinite(res.trace[1].alpha));
    CHECK(res.trace[1].alpha * res.trace[1].alpha + res.trace[1].beta * res.trace[1].beta ==
          doctest::Approx(1.0));
    CHECK(res.allocation.distinct_count <= 3);
  }
  SUBCASE("scalar system") {
    const auto res = allocate_min_power(rates(1, {0.7}), identity_order(1));
    CHECK(res.allocation.p[0] == doctest::Approx(std::expm1(1.4)));
    CHECK(std::abs(res.allocation.S(0, 0)) == 1.0);
  }
  SUBCASE("refusals") {
    try {
      allocate_min_power(rates(2, {0.9, 0.1}), identity_order(2));
      FAIL("expected a throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kOversizedUser);
      CHECK(e.index() == std::optional<std::size_t>(0));
    }
    CHECK_THROWS_AS(allocate_min_power(rates(2, {0.3, 0.0, 0.3}), identity_order(3)), Error);
    CHECK_THROWS_AS(allocate_min_power(powers(2, {1, 1}), identity_order(2)), Error);
    CHECK_THROWS_AS(allocate_min_power(rates(2, {0.1, 0.1}), std::vector<std::size_t>{0, 0}),
                    Error);
  }
}

TEST_CASE("random instances reach the optimum") {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const std::size_t k = n + trial % 11;
    const auto ri = seqalloc::testing::random_instance(Mode::kRateConstrained, n, k, rng, 0.2, 2.0);
    const auto rr = allocate_min_power(ri, random_order(k, trial));
    CHECK(seqalloc::testing::rel_diff(sum(rr.allocation.p), std::expm1(2.0 * ri.total())) < 1e-10);
    CHECK(rr.allocation.distinct_count <= 2 * n - 1);

    const auto pi = seqalloc::testing::random_instance(Mode::kPowerConstrained, n, k, rng, 1.0, 20.0);
    const auto pr = allocate_max_rate(pi, identity_order(k));
    CHECK(seqalloc::testing::rel_diff(sum(pr.allocation.r), 0.5 * std::log1p(pi.total())) < 1e-10);
    CHECK(linalg::orthonormality_residual(pr.allocation.basis_final.matrix()) < 1e-10);

    for (const auto* trace : {&rr.trace, &pr.trace}) {
      for (const auto& step : *trace) {
        CHECK(step.columns_touched <= 2);
        if (step.step != StepCase::kC) continue;
        CHECK(step.alpha >= 0.0);
        CHECK(step.alpha <= 1.0);
        CHECK(step.beta >= 0.0);
        CHECK(step.beta <= 1.0);
      }
    }
  }
}

TEST_CASE("oversized users") {
  SUBCASE("peeling order") {
    CHECK(peel_oversized(powers(3, {10, 1, 1, 1, 1})) == std::vector<std::size_t>{0});
    CHECK(peel_oversized(powers(2, {2, 2, 3, 1})).empty());
    CHECK(peel_oversized(powers(3, {1, 1})) == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("no oversized user matches the plain allocator") {
    const auto a = allocate_with_oversized(powers(2, {2, 2, 3, 1}), identity_order(4));
    const auto b = allocate_max_rate(powers(2, {2, 2, 3, 1}), identity_order(4));
    CHECK(a.allocation.S == b.allocation.S);
    CHECK(a.allocation.r == b.allocation.r);
  }
  SUBCASE("private dimension") {
    const auto res = allocate_with_oversized(powers(3, {10, 1, 1, 1, 1}), identity_order(5));
    const auto& al = res.allocation;
    CHECK(al.private_users == std::vector<std::size_t>{0});
    for (std::size_t k = 1; k < 5; ++k) CHECK(std::abs(linalg::dot(al.S.col(0), al.S.col(k))) < 1e-14);
    CHECK(al.r[0] == doctest::Approx(std::log1p(30.0) / 6.0));
    // remaining four users share two dimensions at the optimum 1 + 3·4/2 = 7
    double rest = 0.0;
    for (std::size_t k = 1; k < 5; ++k) rest += al.r[k];
    CHECK(rest == doctest::Approx(2.0 * std::log(7.0) / 6.0).epsilon(1e-12));
  }
}

TEST_CASE("sequence_audit") {
  linalg::Matrix s(2, 3);
  s(0, 0) = 1.0;
  s(0, 1) = -1.0;
  s(1, 2) = 1.0;
  CHECK(sequence_audit(s) == 2);
  Rng rng(9);
  const auto q = seqalloc::testing::random_orthogonal(5, rng);
  CHECK(sequence_audit(q.matrix()) == 5);
}

TEST_CASE("orders") {
  CHECK(identity_order(3) == std::vector<std::size_t>{0, 1, 2});
  CHECK(reverse_order(3) == std::vector<std::size_t>{2, 1, 0});
  auto r = random_order(20, 42);
  CHECK(r == random_order(20, 42));
  std::sort(r.begin(), r.end());
  CHECK(r == identity_order(20));
}
