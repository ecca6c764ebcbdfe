#include <doctest.h>

#include <cmath>

#include "seqalloc/error.hpp"
#include "seqalloc/split.hpp"
#include "test_support.hpp"

using namespace seqalloc;
using namespace seqalloc::split;
using seqalloc::testing::Rng;

using Subsets = std::vector<std::vector<std::size_t>>;

TEST_CASE("make_partition") {
  SUBCASE("boundary lands between users") {
    const std::vector<double> x{2, 2, 3, 1};
    const auto plan = make_partition(x, 2);
    CHECK(plan.splits.empty());
    CHECK(plan.K_prime() == 4);
    CHECK(plan.subsets == Subsets{{0, 1}, {2, 3}});
  }
  SUBCASE("boundary inside a user") {
    const std::vector<double> x{3, 3, 2};
    const auto plan = make_partition(x, 2);
    REQUIRE(plan.splits.size() == 1);
    CHECK(plan.splits[0].user == 1);
    CHECK(plan.splits[0].parts == std::vector<double>{1.0, 2.0});
    CHECK(plan.K_prime() == 4);
    CHECK(plan.subsets == Subsets{{0, 1}, {2, 3}});
    CHECK(plan.virtual_users[1].original == 1);
    CHECK(plan.virtual_users[2].original == 1);
    CHECK(partition_residual(plan, plan.virtual_demands()) < kSubsetSumTol);
  }
  SUBCASE("single dimension") {
    const std::vector<double> x{1, 5, 2};
    const auto plan = make_partition(x, 1);
    CHECK(plan.splits.empty());
    CHECK(plan.subsets == Subsets{{0, 1, 2}});
  }
  SUBCASE("an oversized user spans several subsets") {
    const std::vector<double> x{10, 1, 1};
    const auto plan = make_partition(x, 4);
    CHECK(plan.span_of(0) == 4);
    CHECK(plan.K_prime() <= x.size() + 3);
    CHECK(partition_residual(plan, plan.virtual_demands()) < kSubsetSumTol);
  }
  SUBCASE("errors") {
    const std::vector<double> x{1, -1};
    CHECK_THROWS_AS(make_partition(x, 2), Error);
  }
}

TEST_CASE("allocate_orthogonal") {
  SUBCASE("one user per subset") {
    const std::vector<double> r{0.3, 0.3};
    const auto plan = make_partition(r, 2);
    const auto oa = allocate_orthogonal(plan, plan.virtual_demands());
    for (double p : oa.powers) CHECK(p == doctest::Approx(std::expm1(4 * 0.3) / 2));
  }
  SUBCASE("random plans reach the minimum power") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 2 + trial % 5;
      const auto inst = seqalloc::testing::random_instance(alloc::Mode::kRateConstrained, n,
                                                            n + trial % 9, rng, 0.2, 2.0);
      const auto plan = make_partition(inst.demands, n);
      const auto oa = allocate_orthogonal(plan, plan.virtual_demands());
      double total = 0.0;
      for (double p : oa.powers) total += p;
      CHECK(seqalloc::testing::rel_diff(total, std::expm1(2.0 * inst.total())) < 1e-10);
    }
  }
  SUBCASE("unequal subsets are refused") {
    const std::vector<double> x{2, 2, 3, 1};
    const auto plan = make_partition(x, 2);
    const std::vector<double> wrong{2, 2, 3, 2};
    try {
      allocate_orthogonal(plan, wrong);
      FAIL("expected a throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kPartitionInvalid);
    }
  }
}

TEST_CASE("orthogonal_capacity_allocation") {
  SUBCASE("four-user example") {
    const std::vector<double> p{2, 2, 3, 1};
    const auto plan = make_partition(p, 2);
    const auto oa = orthogonal_capacity_allocation(plan, plan.virtual_demands());
    double total = 0.0;
    for (double r : oa.rates) total += r;
    CHECK(total == doctest::Approx(0.5 * std::log(9.0)).epsilon(1e-12));
    CHECK(oa.decode_order[0] == std::vector<std::size_t>{1, 0});
  }
  SUBCASE("one user per subset") {
    const std::vector<double> p{4, 4, 4};
    const auto plan = make_partition(p, 3);
    const auto oa = orthogonal_capacity_allocation(plan, plan.virtual_demands());
    for (double r : oa.rates) CHECK(r == doctest::Approx(std::log1p(12.0) / 6.0));
  }
}
