#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "pme/noise_stream.hpp"

using namespace pme;

// Random123 known-answer vectors for philox4x32_10
TEST(Philox, KnownAnswers) {
    using A4 = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32(A4{0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(NoiseIncrements, Reproducible) {
    const NoiseIncrements a(42), b(42), c(43);
    EXPECT_EQ(a.standard_normal(17, 3), b.standard_normal(17, 3));
    EXPECT_NE(a.standard_normal(17, 3), c.standard_normal(17, 3));
    EXPECT_NE(a.standard_normal(17, 3), a.standard_normal(18, 3));
    EXPECT_NE(a.standard_normal(17, 2), a.standard_normal(17, 3));
}

TEST(NoiseIncrements, FillIsPrefixStable) {
    const NoiseIncrements n(5);
    std::vector<double> short_(3), long_(8);
    n.fill(9, 0.01, short_);
    n.fill(9, 0.01, long_);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(short_[k], long_[k]);
    EXPECT_DOUBLE_EQ(long_[5], 0.1 * n.standard_normal(9, 5));
}

TEST(NoiseIncrements, StandardNormalMoments) {
    const NoiseIncrements n(2024);
    const std::size_t count = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (std::size_t j = 0; j < count; ++j) {
        const double z = n.standard_normal(j / 4, j % 4);
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / count, 0.0, 0.01);
    EXPECT_NEAR(s2 / count, 1.0, 0.015);
    EXPECT_NEAR(s4 / count, 3.0, 0.08);
}
