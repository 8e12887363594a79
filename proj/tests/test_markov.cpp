#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "stochrc/markov.hpp"
#include "stochrc/rng.hpp"

using namespace stochrc;

namespace {

// Random column-stochastic matrix; with sparsify, a random subset of
// entries is zeroed first (keeping at least one per column) so that
// non-contracting cases show up.
TransitionMatrix random_matrix(std::size_t m, SplitMix64& g, bool sparsify) {
    std::vector<double> e(m * m);
    for (std::size_t b = 0; b < m; ++b) {
        double sum = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            double v = g.uniform01() + 1e-3;
            if (sparsify && g.uniform01() < 0.4) v = 0.0;
            e[b * m + a] = v;
            sum += v;
        }
        if (sum == 0.0) {
            const std::size_t a = static_cast<std::size_t>(g.next() % m);
            e[b * m + a] = 1.0;
            sum = 1.0;
        }
        for (std::size_t a = 0; a < m; ++a) e[b * m + a] /= sum;
    }
    return TransitionMatrix(m, std::move(e));
}

ProbabilityVector random_distribution(std::size_t m, SplitMix64& g) {
    std::vector<double> e(m);
    double sum = 0.0;
    for (auto& v : e) {
        v = -std::log(1.0 - g.uniform01());
        sum += v;
    }
    for (auto& v : e) v /= sum;
    return ProbabilityVector(std::move(e));
}

} // namespace

TEST(ProbabilityVector, RejectsBadInput) {
    EXPECT_THROW(ProbabilityVector({0.5, -0.1, 0.6}), std::invalid_argument);
    EXPECT_THROW(ProbabilityVector({0.5, 0.4}), std::invalid_argument); // sums to 0.9
    EXPECT_THROW(ProbabilityVector({}), std::invalid_argument);
}

TEST(ProbabilityVector, RenormalizesTinyDrift) {
    ProbabilityVector p({0.5, 0.5 + 5e-13});
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(TransitionMatrix, RejectsBadColumns) {
    // column 0 sums to 0.8
    EXPECT_THROW(TransitionMatrix(2, {0.4, 0.4, 0.5, 0.5}), std::invalid_argument);
    EXPECT_THROW(TransitionMatrix(2, {1.2, -0.2, 0.5, 0.5}), std::invalid_argument);
}

TEST(Propagate, IdentityFixesInput) {
    const auto p = TransitionMatrix::identity(2);
    const ProbabilityVector v({0.3, 0.7});
    const auto out = propagate(p, v);
    EXPECT_DOUBLE_EQ(out[0], 0.3);
    EXPECT_DOUBLE_EQ(out[1], 0.7);
}

TEST(Propagate, RankOneMapsEverythingToItsColumn) {
    const TransitionMatrix p(2, {0.6, 0.4, 0.6, 0.4});
    SplitMix64 g(7);
    for (int i = 0; i < 10; ++i) {
        const auto out = propagate(p, random_distribution(2, g));
        EXPECT_NEAR(out[0], 0.6, 1e-15);
        EXPECT_NEAR(out[1], 0.4, 1e-15);
    }
}

TEST(Propagate, HandComputedProduct) {
    // columns (0.9, 0.1) and (0.2, 0.8); P = (0.5, 0.5)
    const TransitionMatrix p(2, {0.9, 0.1, 0.2, 0.8});
    const auto out = propagate(p, ProbabilityVector({0.5, 0.5}));
    EXPECT_NEAR(out[0], 0.55, 1e-15);
    EXPECT_NEAR(out[1], 0.45, 1e-15);
}

TEST(Propagate, DimensionMismatchThrows) {
    EXPECT_THROW(propagate(TransitionMatrix::identity(2), ProbabilityVector::uniform(3)),
                 std::invalid_argument);
}

TEST(Propagate, PreservesOneNorm) {
    SplitMix64 g(11);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t m = (i % 3 == 0) ? 2 : (i % 3 == 1) ? 4 : 8;
        const auto p = random_matrix(m, g, i % 2 == 0);
        const auto out = propagate(p, random_distribution(m, g));
        double sum = 0.0;
        for (std::size_t a = 0; a < m; ++a) sum += out[a];
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(ContractionCoefficient, KnownValues) {
    EXPECT_DOUBLE_EQ(contraction_coefficient(TransitionMatrix::identity(2)), 1.0);
    EXPECT_DOUBLE_EQ(contraction_coefficient(TransitionMatrix(2, {0.6, 0.4, 0.6, 0.4})), 0.0);
    // 0.5 * (|0.9 - 0.2| + |0.1 - 0.8|) = 0.7
    EXPECT_DOUBLE_EQ(contraction_coefficient(TransitionMatrix(2, {0.9, 0.1, 0.2, 0.8})), 0.7);
}

TEST(ContractionCoefficient, BoundsRandomPairsAndIsAttained) {
    SplitMix64 g(23);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t m = (i % 3 == 0) ? 2 : (i % 3 == 1) ? 4 : 8;
        const auto p = random_matrix(m, g, i % 2 == 0);
        const double eps = contraction_coefficient(p);
        const auto p1 = random_distribution(m, g);
        const auto p2 = random_distribution(m, g);
        EXPECT_LE(l1_distance(propagate(p, p1), propagate(p, p2)),
                  eps * l1_distance(p1, p2) + 1e-12);

        // The bound is tight over basis-vector pairs.
        double best = 0.0;
        for (std::size_t b1 = 0; b1 < m; ++b1)
            for (std::size_t b2 = b1 + 1; b2 < m; ++b2) {
                const auto e1 = ProbabilityVector::basis(m, b1);
                const auto e2 = ProbabilityVector::basis(m, b2);
                best = std::max(best,
                                l1_distance(propagate(p, e1), propagate(p, e2)) /
                                    l1_distance(e1, e2));
            }
        EXPECT_NEAR(best, eps, 1e-9);
    }
}

TEST(IsContracting, KnownValues) {
    EXPECT_FALSE(is_contracting(TransitionMatrix::identity(2)));
    EXPECT_TRUE(is_contracting(TransitionMatrix(2, {0.5, 0.5, 0.5, 0.5})));
    // p = [[1, 0.5], [0, 0.5]]: p^T p = [[1, 0.5], [0.5, 0.5]] has no zeros.
    EXPECT_TRUE(is_contracting(TransitionMatrix(2, {1.0, 0.0, 0.5, 0.5})));
}

TEST(IsContracting, EquivalentToStrictCoefficient) {
    SplitMix64 g(31);
    int non_contracting_seen = 0;
    for (int i = 0; i < 600; ++i) {
        const std::size_t m = (i % 3 == 0) ? 2 : (i % 3 == 1) ? 4 : 8;
        const auto p = random_matrix(m, g, true);
        const double eps = contraction_coefficient(p);
        if (is_contracting(p)) {
            EXPECT_LT(eps, 1.0);
        } else {
            ++non_contracting_seen;
            EXPECT_DOUBLE_EQ(eps, 1.0);
            // Some basis pair realizes the worst case exactly.
            bool found = false;
            for (std::size_t b1 = 0; b1 < m && !found; ++b1)
                for (std::size_t b2 = b1 + 1; b2 < m && !found; ++b2) {
                    const auto d = l1_distance(propagate(p, ProbabilityVector::basis(m, b1)),
                                               propagate(p, ProbabilityVector::basis(m, b2)));
                    if (std::abs(d - 2.0) < 1e-15) found = true;
                }
            EXPECT_TRUE(found);
        }
    }
    EXPECT_GT(non_contracting_seen, 50); // the sparsifier must actually exercise this branch
}

TEST(HasPositiveRow, KnownValuesAndSufficiency) {
    EXPECT_TRUE(has_positive_row(TransitionMatrix(2, {0.5, 0.5, 0.5, 0.5})));
    EXPECT_FALSE(has_positive_row(TransitionMatrix::identity(2)));
    // columns (0.5, 0.5) and (0, 1): row 1 is (0.5, 1), all positive.
    EXPECT_TRUE(has_positive_row(TransitionMatrix(2, {0.5, 0.5, 0.0, 1.0})));

    SplitMix64 g(41);
    for (int i = 0; i < 400; ++i) {
        const auto p = random_matrix(4, g, true);
        if (has_positive_row(p)) EXPECT_TRUE(is_contracting(p));
    }
}

TEST(Contraction, IteratedPropagationContractsGeometrically) {
    SplitMix64 g(59);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 4;
        auto p1 = random_distribution(m, g);
        auto p2 = random_distribution(m, g);
        double bound = l1_distance(p1, p2);
        for (int k = 0; k < 30; ++k) {
            const auto p = random_matrix(m, g, false);
            bound *= contraction_coefficient(p);
            p1 = propagate(p, p1);
            p2 = propagate(p, p2);
            EXPECT_LE(l1_distance(p1, p2), bound + 1e-12);
        }
    }
}
