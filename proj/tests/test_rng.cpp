#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "wmps/rng.hpp"

using namespace wmps;

TEST(Rng, SameSeedSameSequence) {
    Rng a(42), b(42);
    for(int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    Rng c(42), d(42);
    for(int i = 0; i < 100; ++i) EXPECT_EQ(c.normal(), d.normal());
}

TEST(Rng, UniformStaysInHalfOpenUnitInterval) {
    Rng    rng(1);
    double sum = 0.0;
    for(int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 4 * std::sqrt(1.0 / 12 / 100000));
}

TEST(Rng, NormalHasUnitVariance) {
    Rng          rng(2);
    const int    n = 200000;
    double       s = 0.0, s2 = 0.0;
    for(int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 4 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 4 * std::sqrt(2.0 / n));
}

TEST(Rng, DerivedSeedsAreDistinctAcrossEveryArgument) {
    std::set<std::uint64_t> seen;
    for(std::uint64_t m = 0; m < 4; ++m)
        for(std::uint64_t g = 0; g < 4; ++g)
            for(std::uint64_t t = 0; t < 16; ++t)
                for(std::uint64_t s = 0; s < 4; ++s) seen.insert(derive_seed(m, g, t, s));
    EXPECT_EQ(seen.size(), 4U * 4 * 16 * 4);
}

TEST(Rng, DerivedSeedIsPure) {
    static_assert(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
    EXPECT_NE(derive_seed(1, 2, 3, 4), derive_seed(1, 3, 2, 4));
}
