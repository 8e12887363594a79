#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "stochrc/esn.hpp"
#include "stochrc/io.hpp"
#include "stochrc/rng.hpp"
#include "stochrc/sampler.hpp"

using namespace stochrc;

namespace {

constexpr double kPi4 = std::numbers::pi / 4.0;

InputSeries random_inputs(std::size_t steps, std::uint64_t seed) {
    SplitMix64 g(seed);
    std::vector<double> u(steps);
    for (auto& x : u) x = g.uniform_pm1();
    return InputSeries::scalar(std::move(u));
}

EsnConfig constant_config(int detectors, double value) {
    EsnConfig cfg;
    cfg.detectors = detectors;
    cfg.input_dim = 1;
    cfg.a.assign(static_cast<std::size_t>(detectors) * detectors, 0.0);
    cfg.b.assign(static_cast<std::size_t>(detectors), 0.0);
    cfg.rho = ActivationDistribution::constant(value);
    cfg.r_zeta = 1.0;
    return cfg;
}

} // namespace

TEST(RunTrajectory, ForcedOutcomes) {
    const auto inputs = random_inputs(12, 3);
    const std::vector<int> x0{0, 0};
    const auto ones = run_trajectory(constant_config(2, 1.0), inputs, 99, x0);
    const auto zeros = run_trajectory(constant_config(2, 0.0), inputs, 99, x0);
    for (std::size_t k = 1; k < ones.size(); ++k) {
        EXPECT_EQ(ones[k], 3u);
        EXPECT_EQ(zeros[k], 0u);
    }
    EXPECT_EQ(ones[0], 0u); // initial state preserved
}

TEST(RunTrajectory, DeterministicGivenSeed) {
    const auto cfg = sample_weights(5, 3, 1, ActivationDistribution::qubit(), kPi4, 1.0);
    const auto inputs = random_inputs(60, 17);
    const std::vector<int> x0{0, 0, 0};
    EXPECT_EQ(run_trajectory(cfg, inputs, 1234, x0), run_trajectory(cfg, inputs, 1234, x0));
    EXPECT_NE(run_trajectory(cfg, inputs, 1234, x0), run_trajectory(cfg, inputs, 1235, x0));
}

TEST(AccumulateCounts, SingleRunHasOneCountPerRow) {
    const auto cfg = sample_weights(5, 2, 1, ActivationDistribution::qubit(), kPi4, 1.0);
    const auto inputs = random_inputs(20, 19);
    const auto table = accumulate_counts(cfg, inputs, 1, 7);
    table.validate();
    for (std::size_t k = 0; k < table.steps; ++k) {
        std::int64_t sum = 0;
        for (std::size_t a = 0; a < table.outcomes; ++a) sum += table.at(k, a);
        EXPECT_EQ(sum, 1);
    }
}

TEST(AccumulateCounts, ForcedOutcomeFillsOneColumn) {
    const auto inputs = random_inputs(10, 23);
    const auto table = accumulate_counts(constant_config(2, 1.0), inputs, 500, 7);
    for (std::size_t k = 1; k < table.steps; ++k) EXPECT_EQ(table.at(k, 3), 500);
}

TEST(AccumulateCounts, MatchesPerRunTrajectories) {
    const auto cfg = sample_weights(11, 2, 1, ActivationDistribution::optical(), 1.0, 1.0);
    const auto inputs = random_inputs(15, 29);
    const std::uint64_t master = 4242;
    const std::int64_t runs = 64;
    const auto table = accumulate_counts(cfg, inputs, runs, master);

    std::vector<std::int64_t> expect(table.steps * table.outcomes, 0);
    const std::vector<int> x0{0, 0};
    for (std::int64_t r = 0; r < runs; ++r) {
        const auto path = run_trajectory(cfg, inputs, derive_seed(master, static_cast<std::uint64_t>(r)), x0);
        for (std::size_t k = 0; k < path.size(); ++k) expect[k * table.outcomes + path[k]] += 1;
    }
    EXPECT_EQ(table.counts, expect);
}

TEST(AccumulateCounts, WorkerCountNeverChangesCounts) {
    const auto cfg = sample_weights(13, 3, 1, ActivationDistribution::qubit(), kPi4, 1.0);
    const auto inputs = random_inputs(25, 31);
    const auto t1 = accumulate_counts(cfg, inputs, 1000, 555, 1);
    const auto t4 = accumulate_counts(cfg, inputs, 1000, 555, 4);
    const auto t16 = accumulate_counts(cfg, inputs, 1000, 555, 16);
    EXPECT_EQ(t1.counts, t4.counts);
    EXPECT_EQ(t1.counts, t16.counts);
}

TEST(EstimateProbabilities, PriorOnlyAndFormula) {
    CountTable t;
    t.steps = 1;
    t.outcomes = 4;
    t.n_runs = 0;
    t.counts = {0, 0, 0, 0};
    // Validation requires row sums == n_runs; n_runs = 0 means prior only.
    const auto est0 = estimate_probabilities(t);
    for (std::size_t a = 0; a < 4; ++a) EXPECT_DOUBLE_EQ(est0[0][a], 0.25);

    CountTable t2;
    t2.steps = 1;
    t2.outcomes = 2;
    t2.n_runs = 10;
    t2.counts = {3, 7};
    const auto est = estimate_probabilities(t2);
    EXPECT_DOUBLE_EQ(est[0][0], 4.0 / 12.0);
    EXPECT_DOUBLE_EQ(est[0][1], 8.0 / 12.0);
}

TEST(EstimateProbabilities, StrictlyPositiveRowsSummingToOne) {
    const auto cfg = sample_weights(17, 2, 1, ActivationDistribution::qubit(), kPi4, 1.0);
    const auto inputs = random_inputs(30, 37);
    const auto est = estimate_probabilities(accumulate_counts(cfg, inputs, 50, 9));
    for (const auto& row : est) {
        double sum = 0.0;
        for (std::size_t a = 0; a < row.size(); ++a) {
            EXPECT_GT(row[a], 0.0);
            sum += row[a];
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(EstimateProbabilities, BinomialConcentrationAgainstExactMarginals) {
    const auto cfg = sample_weights(21, 2, 1, ActivationDistribution::qubit(), kPi4, 1.0);
    const auto inputs = random_inputs(10, 41);
    const std::int64_t runs = 100000;
    const auto est = estimate_probabilities(accumulate_counts(cfg, inputs, runs, 11, 2));
    const auto exact = simulate_exact(cfg, inputs, ProbabilityVector::basis(4, 0));

    std::size_t total = 0, ok = 0;
    for (std::size_t k = 0; k < exact.size(); ++k)
        for (std::size_t a = 0; a < 4; ++a) {
            const double p = exact[k][a];
            // five binomial sigmas plus the estimator's exact prior
            // shrinkage |E[est] - p| = |1 - M p| / (runs + M)
            const double tol = 5.0 * std::sqrt(p * (1.0 - p) / runs) +
                               std::abs(1.0 - 4.0 * p) / static_cast<double>(runs + 4);
            ++total;
            if (std::abs(est[k][a] - p) <= tol) ++ok;
        }
    EXPECT_GE(static_cast<double>(ok) / static_cast<double>(total), 0.99);
}

TEST(EstimateProbabilities, ConsistencyImprovesWithRuns) {
    const auto cfg = sample_weights(25, 2, 1, ActivationDistribution::optical(), 1.0, 1.0);
    const auto inputs = random_inputs(10, 43);
    const auto exact = simulate_exact(cfg, inputs, ProbabilityVector::basis(4, 0));
    const auto small = estimate_probabilities(accumulate_counts(cfg, inputs, 1000, 13, 2));
    const auto large = estimate_probabilities(accumulate_counts(cfg, inputs, 1000000, 13, 2));

    std::size_t improved = 0, total = 0;
    for (std::size_t k = 1; k < exact.size(); ++k)
        for (std::size_t a = 0; a < 4; ++a) {
            ++total;
            if (std::abs(large[k][a] - exact[k][a]) <= std::abs(small[k][a] - exact[k][a]))
                ++improved;
        }
    EXPECT_GE(static_cast<double>(improved) / static_cast<double>(total), 0.95);
}

TEST(Sampler, ChiSquareAgainstExactSingleStep) {
    // One propagation step from a known state; Pearson statistic over the 4
    // outcome cells should stay below the 99.9% chi-square(3) quantile in
    // at least 99% of repetitions.
    const auto cfg = sample_weights(29, 2, 1, ActivationDistribution::qubit(), kPi4, 1.0);
    const auto inputs = random_inputs(1, 47);
    const auto exact = simulate_exact(cfg, inputs, ProbabilityVector::basis(4, 0));
    const double chi2_999_df3 = 16.266;

    const std::int64_t runs = 2000;
    int below = 0;
    const int reps = 300;
    for (int rep = 0; rep < reps; ++rep) {
        const auto table = accumulate_counts(cfg, inputs, runs, 1000 + static_cast<std::uint64_t>(rep));
        double stat = 0.0;
        for (std::size_t a = 0; a < 4; ++a) {
            const double expect = exact[1][a] * static_cast<double>(runs);
            const double diff = static_cast<double>(table.at(1, a)) - expect;
            stat += diff * diff / expect;
        }
        if (stat < chi2_999_df3) ++below;
    }
    EXPECT_GE(static_cast<double>(below) / reps, 0.99);
}

TEST(CountTable, CsvShape) {
    const auto table = accumulate_counts(constant_config(1, 0.5), random_inputs(3, 53), 10, 3);
    std::ostringstream os;
    write_csv(os, table);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "k,a,count");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, table.steps * table.outcomes);
}
