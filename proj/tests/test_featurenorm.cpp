#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "blocknorm/blocknorm.hpp"
#include "support/oracles.hpp"

using namespace blocknorm;

TEST(FeatureNorm, MatchesBruteForceOracle) {
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<std::size_t> m(1, 64), hw(1, 16);
    for (int i = 0; i < 200; ++i) {
        const Tensor z = oracle::random_tensor(Shape{m(rng), hw(rng), hw(rng)}, rng, -3.0, 3.0);
        EXPECT_LE(oracle::relative_error(feature_norm_score(z), oracle::feature_norm(z)), 1e-6);
    }
}

TEST(FeatureNorm, HandComputedCases) {
    // Channel 0: ReLU keeps 3 and 4, so a_0 = 5; channel 1 is all negative.
    const Tensor z({2, 2, 2}, {3, -1, 4, -7, -1, -2, -3, -4});
    const FeatureNormResult r = feature_norm(z);
    ASSERT_EQ(r.per_channel.size(), 2u);
    EXPECT_DOUBLE_EQ(r.per_channel[0], 5.0);
    EXPECT_DOUBLE_EQ(r.per_channel[1], 0.0);
    EXPECT_DOUBLE_EQ(r.mean, 2.5);

    EXPECT_DOUBLE_EQ(feature_norm_score(Tensor({2, 1, 1}, {2, 0})), 1.0);
    EXPECT_DOUBLE_EQ(feature_norm_score(Tensor(Shape{4, 3, 3})), 0.0);
    EXPECT_DOUBLE_EQ(channel_norm(std::vector<float>{-1, -2}), 0.0);
}

TEST(FeatureNorm, PositiveHomogeneity) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        const Tensor z = oracle::random_tensor(Shape{8, 5, 5}, rng);
        for (float lambda : {0.25f, 2.0f, 16.0f}) {
            Tensor scaled = z;
            for (float& v : scaled.mutable_data()) v *= lambda;
            EXPECT_DOUBLE_EQ(feature_norm_score(scaled), lambda * feature_norm_score(z));
        }
    }
}

TEST(FeatureNorm, IgnoresNegativeEntries) {
    std::mt19937_64 rng(8);
    const Tensor z = oracle::random_tensor(Shape{6, 4, 4}, rng);
    Tensor more_negative = z;
    for (float& v : more_negative.mutable_data()) {
        if (v < 0) v *= 10.0f;
    }
    EXPECT_EQ(feature_norm_score(more_negative), feature_norm_score(z));
    EXPECT_EQ(feature_norm_score(relu(z)), feature_norm_score(z));
}

TEST(FeatureNorm, InvariantToSpatialPermutationWithinChannel) {
    std::mt19937_64 rng(9);
    const Tensor z = oracle::random_tensor(Shape{5, 6, 6}, rng);
    Tensor shuffled = z;
    for (std::size_t c = 0; c < 5; ++c) {
        auto d = shuffled.mutable_data().subspan(c * 36, 36);
        std::shuffle(d.begin(), d.end(), rng);
    }
    EXPECT_NEAR(feature_norm_score(shuffled), feature_norm_score(z), 1e-12 * feature_norm_score(z));
}

TEST(FeatureNorm, AccumulatesInDoublePrecision) {
    // 224 x 224 entries of 1 + tiny: float accumulation drifts, double does not.
    Tensor z = Tensor::filled(Shape{1, 224, 224}, 1.0f);
    EXPECT_DOUBLE_EQ(feature_norm_score(z), 224.0);
}

TEST(NormRatio, RatioAndDegenerateDenominator) {
    EXPECT_DOUBLE_EQ(norm_ratio(3.0, 1.5), 2.0);
    EXPECT_DOUBLE_EQ(norm_ratio(0.0, 1.0), 0.0);
    try {
        norm_ratio(1.0, 0.0, "block2", 7);
        FAIL() << "expected DegenerateRatio";
    } catch (const DegenerateRatio& e) {
        EXPECT_EQ(e.block(), "block2");
        EXPECT_EQ(e.sample(), 7u);
    }
}

TEST(FeatureNorm, SmallCases) {
    EXPECT_EQ(channel_norm(Tensor(Shape{4, 4}).data()), 0.0);
    std::mt19937_64 rng(14);
    const Tensor one = oracle::random_tensor(Shape{1, 5, 5}, rng);
    EXPECT_EQ(feature_norm_score(one), feature_norm(one).per_channel[0]);

    const Tensor z({2, 2, 2}, {1, 1, 1, 1, 0, 0, 0, 0});
    const FeatureNormResult r = feature_norm(z);
    EXPECT_EQ(r.per_channel, (std::vector<double>{2.0, 0.0}));
    EXPECT_EQ(r.mean, 1.0);
    EXPECT_EQ(feature_norm_score(Tensor::filled(Shape{1, 2, 2}, 1.0f)), 2.0);

    EXPECT_EQ(norm_ratio(5.0, 5.0), 1.0);
    EXPECT_EQ(norm_ratio(6.0, 2.0), 3.0);
}
