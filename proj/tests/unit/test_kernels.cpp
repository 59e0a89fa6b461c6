#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nesy/errors.hpp"
#include "nesy/vertex/kernels.hpp"
#include "oracles.hpp"

using namespace nesy;
using namespace nesy::vertex;
using fixtures::to_set;

TEST(GaussianKernel, SelfSimilarityIsOne) {
    std::vector<double> x{0.3, -1.2, 4.0};
    EXPECT_DOUBLE_EQ(gaussian_kernel(x, x, 0.7), 1.0);
}

TEST(GaussianKernel, DistanceOfTwoSigmaSquaredGivesInverseE) {
    const double sigma = 0.8;
    std::vector<double> x{0.0, 0.0};
    std::vector<double> y{std::sqrt(2.0) * sigma, 0.0};  // |x - y|^2 = 2 sigma^2
    EXPECT_NEAR(gaussian_kernel(x, y, sigma), 0.367879441171442, 1e-12);
}

TEST(GaussianKernel, MatchesElementwiseFormula) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        auto pair = oracle::random_set(rng, 2, 8);
        EXPECT_NEAR(gaussian_kernel(pair[0], pair[1], 1.3), oracle::k(pair[0], pair[1], 1.3), 1e-12);
    }
}

TEST(GaussianKernel, SymmetricAndBounded) {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 50; ++t) {
        auto pair = oracle::random_set(rng, 2, 5, 3.0);
        double a = gaussian_kernel(pair[0], pair[1], 0.9);
        EXPECT_EQ(a, gaussian_kernel(pair[1], pair[0], 0.9));
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 1.0);
    }
}

TEST(GaussianKernel, RejectsBadArguments) {
    std::vector<double> x{1.0, 2.0};
    std::vector<double> y{1.0};
    EXPECT_THROW(gaussian_kernel(x, y, 1.0), ArgumentError);
    EXPECT_THROW(gaussian_kernel(x, x, 0.0), ArgumentError);
    EXPECT_THROW(gaussian_kernel(x, x, -1.0), ArgumentError);
}

TEST(MedianHeuristic, TwoPointsAtDistanceRootTwo) {
    auto s = to_set({{0.0, 0.0}, {1.0, 1.0}});
    EXPECT_NEAR(median_heuristic_sigma(s), 1.0, 1e-15);
}

TEST(MedianHeuristic, IdenticalPoolFallsBackToOne) {
    auto s = to_set({{2.0, 2.0}, {2.0, 2.0}, {2.0, 2.0}});
    EXPECT_EQ(median_heuristic_sigma(s), 1.0);
}

TEST(MedianHeuristic, MatchesExhaustivePairwiseMedian) {
    std::mt19937_64 rng(5);
    for (std::size_t n : {10u, 11u, 2u, 3u}) {
        auto rows = oracle::random_set(rng, n, 4);
        EXPECT_NEAR(median_heuristic_sigma(to_set(rows)), oracle::median_sigma(rows), 1e-12);
        EXPECT_NEAR(serial::median_heuristic_sigma(to_set(rows)), oracle::median_sigma(rows), 1e-12);
    }
}

TEST(MedianHeuristic, NeedsTwoSamples) {
    EXPECT_THROW(median_heuristic_sigma(to_set({{1.0}})), ArgumentError);
}

TEST(KernelMeanEmbedding, SingletonAtItsOwnPoint) {
    std::vector<double> p{0.5, 0.5};
    EXPECT_DOUBLE_EQ(kme_eval(to_set({p}), p, 1.0), 1.0);
}

TEST(KernelMeanEmbedding, CopiesAverageToSingleKernel) {
    std::vector<double> p{0.0, 1.0}, q{1.0, -1.0};
    auto s = to_set({p, p, p, p, p});
    EXPECT_NEAR(kme_eval(s, q, 0.6), oracle::k(p, q, 0.6), 1e-15);
}

TEST(KernelMeanEmbedding, MatchesDirectSummation) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 30; ++t) {
        auto rows = oracle::random_set(rng, 2 + t % 9, 8);
        auto point = oracle::random_set(rng, 1, 8).front();
        EXPECT_NEAR(kme_eval(to_set(rows), point, 1.7), oracle::kme(rows, point, 1.7), 1e-12);
    }
}

TEST(KernelMeanEmbedding, DimensionMismatch) {
    std::vector<double> q{1.0};
    EXPECT_THROW(kme_eval(to_set({{1.0, 2.0}}), q, 1.0), ArgumentError);
}

TEST(Mmd, IdenticalCopiesGiveZero) {
    std::vector<double> p{1.0, 2.0, 3.0};
    auto s = to_set({p, p, p, p});
    EXPECT_NEAR(mmd2_full(s, s, 1.0), 0.0, 1e-15);
}

TEST(Mmd, TwoPointSetAgainstItself) {
    std::vector<double> a{0.0, 0.0}, b{1.0, 0.5};
    auto s = to_set({a, b});
    // within terms are k(a,b) each, cross term is (2/4)(2 + 2k(a,b))
    double kab = oracle::k(a, b, 0.9);
    EXPECT_NEAR(mmd2_full(s, s, 0.9), kab - 1.0, 1e-12);
    EXPECT_NEAR(mmd2_full(s, s, 0.9), oracle::mmd2({a, b}, {a, b}, 0.9), 1e-12);
}

TEST(Mmd, MatchesThreeTermEstimator) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 25; ++t) {
        auto x = oracle::random_set(rng, 5, 8);
        auto y = oracle::random_set(rng, 5, 8, 1.5);
        EXPECT_NEAR(mmd2_full(to_set(x), to_set(y), 2.0), oracle::mmd2(x, y, 2.0), 1e-12);
    }
}

TEST(Mmd, UndersizedSetsRejected) {
    auto one = to_set({{1.0}});
    auto two = to_set({{1.0}, {2.0}});
    EXPECT_THROW(mmd2_full(one, two, 1.0), ArgumentError);
    EXPECT_THROW(mmd2_full(two, one, 1.0), ArgumentError);
    EXPECT_THROW(mmd2_within(one, 1.0), ArgumentError);
}

TEST(CrossTerm, SinglePointAgainstItselfIsTwo) {
    auto s = to_set({{0.2, 0.4}});
    EXPECT_DOUBLE_EQ(mmd2_cross(s, s, 1.0), 2.0);
}

TEST(CrossTerm, DecaysForFarPoints) {
    auto x = to_set({{0.0}});
    auto y = to_set({{100.0}});
    double v = mmd2_cross(x, y, 1.0);
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1e-300);
}

TEST(CrossTerm, RecombinesIntoFullEstimator) {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 25; ++t) {
        auto x = to_set(oracle::random_set(rng, 2 + t % 7, 8));
        auto y = to_set(oracle::random_set(rng, 3 + t % 5, 8));
        double lhs = mmd2_full(x, y, 1.1);
        double rhs = mmd2_within(x, 1.1) + mmd2_within(y, 1.1) - mmd2_cross(x, y, 1.1);
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(CrossTerm, SymmetricAndInRange) {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 25; ++t) {
        auto x = to_set(oracle::random_set(rng, 4, 3));
        auto y = to_set(oracle::random_set(rng, 6, 3));
        double a = mmd2_cross(x, y, 0.8);
        EXPECT_NEAR(a, mmd2_cross(y, x, 0.8), 1e-15);
        EXPECT_GT(a, 0.0);
        EXPECT_LE(a, 2.0);
    }
}

TEST(Estimators, PermutationInvariant) {
    std::mt19937_64 rng(51);
    auto x = oracle::random_set(rng, 7, 8);
    auto y = oracle::random_set(rng, 6, 8);
    double full = mmd2_full(to_set(x), to_set(y), 1.0);
    double cross = mmd2_cross(to_set(x), to_set(y), 1.0);
    for (int t = 0; t < 10; ++t) {
        std::shuffle(x.begin(), x.end(), rng);
        std::shuffle(y.begin(), y.end(), rng);
        EXPECT_NEAR(mmd2_full(to_set(x), to_set(y), 1.0), full, 1e-12);
        EXPECT_NEAR(mmd2_cross(to_set(x), to_set(y), 1.0), cross, 1e-12);
    }
}

TEST(Estimators, ParallelAgreesWithSerialReference) {
    std::mt19937_64 rng(61);
    for (int t = 0; t < 20; ++t) {
        auto x = to_set(oracle::random_set(rng, 40 + t, 16));
        auto y = to_set(oracle::random_set(rng, 30 + t, 16));
        EXPECT_NEAR(mmd2_full(x, y, 2.5), serial::mmd2_full(x, y, 2.5), 1e-12);
        EXPECT_NEAR(mmd2_cross(x, y, 2.5), serial::mmd2_cross(x, y, 2.5), 1e-12);
        EXPECT_NEAR(mmd2_within(x, 2.5), serial::mmd2_within(x, 2.5), 1e-12);
        EXPECT_NEAR(kme_eval(x, y[0], 2.5), serial::kme_eval(x, y[0], 2.5), 1e-12);
        EXPECT_EQ(median_heuristic_sigma(x), serial::median_heuristic_sigma(x));
    }
}
