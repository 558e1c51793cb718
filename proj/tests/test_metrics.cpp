#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "blocknorm/blocknorm.hpp"
#include "support/oracles.hpp"

using namespace blocknorm;

namespace {

struct ScorePair {
    std::vector<double> id, ood;
};

ScorePair random_pair(std::mt19937_64& rng, bool ties) {
    std::uniform_int_distribution<std::size_t> size(1, 200);
    std::uniform_int_distribution<int> level(0, 12);
    std::normal_distribution<double> id(0.7, 1.0), ood(0.0, 1.0);
    ScorePair p{std::vector<double>(size(rng)), std::vector<double>(size(rng))};
    for (double& v : p.id) v = ties ? level(rng) + 1 : id(rng);
    for (double& v : p.ood) v = ties ? level(rng) : ood(rng);
    return p;
}

}  // namespace

TEST(Auroc, MatchesAllPairsOracle) {
    std::mt19937_64 rng(808);
    for (int i = 0; i < 300; ++i) {
        const ScorePair p = random_pair(rng, i % 2 == 0);
        EXPECT_NEAR(auroc(p.id, p.ood), oracle::auroc_pairs(p.id, p.ood), 1e-12) << "set " << i;
    }
}

TEST(Auroc, HandComputedCases) {
    EXPECT_DOUBLE_EQ(auroc(std::vector<double>{3, 4}, std::vector<double>{1, 2}), 1.0);
    EXPECT_DOUBLE_EQ(auroc(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 0.0);
    EXPECT_DOUBLE_EQ(auroc(std::vector<double>{1, 1}, std::vector<double>{1, 1, 1}), 0.5);
    EXPECT_DOUBLE_EQ(auroc(std::vector<double>{2, 0}, std::vector<double>{1}), 0.5);
    EXPECT_DOUBLE_EQ(auroc(std::vector<double>{1, 2, 3}, std::vector<double>{2}), 0.5);
    EXPECT_THROW(auroc(std::vector<double>{}, std::vector<double>{1}), InputError);
    EXPECT_THROW(auroc(std::vector<double>{1}, std::vector<double>{}), InputError);
}

TEST(Auroc, SwappingRolesComplements) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        const ScorePair p = random_pair(rng, i % 2 == 1);
        EXPECT_NEAR(auroc(p.id, p.ood) + auroc(p.ood, p.id), 1.0, 1e-12);
    }
}

TEST(Auroc, InvariantUnderStrictlyIncreasingMaps) {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 50; ++i) {
        ScorePair p = random_pair(rng, i % 2 == 1);
        const double base = auroc(p.id, p.ood);
        ScorePair q = p;
        for (auto* v : {&q.id, &q.ood}) {
            for (double& s : *v) s = std::exp(0.5 * s) + 3.0;
        }
        EXPECT_NEAR(auroc(q.id, q.ood), base, 1e-12);
        for (auto* v : {&p.id, &p.ood}) {
            for (double& s : *v) s += 100.0;
        }
        EXPECT_NEAR(auroc(p.id, p.ood), base, 1e-12);
    }
}

TEST(FprAtTpr, CountsOodScoresAtOrAboveThreshold) {
    std::vector<double> id(100);
    for (int i = 0; i < 100; ++i) id[i] = i + 1;  // gamma = 6 at 95 % TPR
    const std::vector<double> ood{0, 5, 5.9, 6, 6, 50, 200};
    EXPECT_DOUBLE_EQ(fpr_at_tpr(id, ood), 4.0 / 7.0);

    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const ScorePair p = random_pair(rng, i % 2 == 0);
        const double gamma = calibrate_threshold(p.id, 0.95);
        EXPECT_GE(oracle::count_at_least(p.id, gamma), oracle::ceil_fraction(95, 100, p.id.size()));
        EXPECT_EQ(fpr_at_tpr(p.id, p.ood),
                  static_cast<double>(oracle::count_at_least(p.ood, gamma)) / static_cast<double>(p.ood.size()));
    }
}

TEST(EvaluateScores, AveragesOverOodSets) {
    ScoreSet s;
    s.id_scores = {3, 4, 5, 6};
    s.ood_scores["a"] = {1, 2};
    s.ood_scores["b"] = {4, 7};
    const EvalReport r = evaluate_scores(s, 0.5);
    EXPECT_EQ(r.per_set.size(), 2u);
    EXPECT_DOUBLE_EQ(r.per_set.at("a").auroc, 1.0);
    EXPECT_DOUBLE_EQ(r.per_set.at("b").auroc, oracle::auroc_pairs(s.id_scores, s.ood_scores["b"]));
    EXPECT_DOUBLE_EQ(r.mean_auroc, (r.per_set.at("a").auroc + r.per_set.at("b").auroc) / 2.0);
    EXPECT_DOUBLE_EQ(r.per_set.at("b").fpr_at_tpr, 0.5);  // gamma = 5
    EXPECT_EQ(r.per_set.at("b").n_ood, 2u);

    ScoreSet empty_set = s;
    empty_set.ood_scores["c"] = {};
    EXPECT_THROW(evaluate_scores(empty_set), InputError);
    ScoreSet none = s;
    none.ood_scores.clear();
    EXPECT_THROW(evaluate_scores(none), InputError);
}

TEST(Auroc, SmallCases) {
    EXPECT_EQ(auroc(std::vector<double>{2, 3}, std::vector<double>{0, 1}), 1.0);
    const std::vector<double> same{0.1, 0.7, 0.7, 2.0};
    EXPECT_EQ(auroc(same, std::vector<double>{2.0, 0.7, 0.1, 0.7}), 0.5);
    EXPECT_EQ(fpr_at_tpr(std::vector<double>{5, 6, 7}, std::vector<double>{1, 2}), 0.0);
}

TEST(FprAtTpr, SameDistributionEqualsDirectCount) {
    std::mt19937_64 rng(15);
    std::normal_distribution<double> n;
    std::vector<double> id(100), ood(100);
    for (double& v : id) v = n(rng);
    for (double& v : ood) v = n(rng);
    const double gamma = calibrate_threshold(id, 0.95);
    EXPECT_EQ(fpr_at_tpr(id, ood), static_cast<double>(oracle::count_at_least(ood, gamma)) / 100.0);
}
