// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file tests/test_simulator.cpp
//! Thinning, chain stepping and the backward stationary sampler.
//---------------------------------------------------------------------------//
#include "bpire/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bpire/parallel.hpp"
#include "bpire/tailstats.hpp"
#include "test_support.hpp"

namespace bpire
{
namespace
{
TEST(Thin, ZeroParentsGiveZero)
{
    Rng rng(1);
    for (OffspringFamily law : {OffspringFamily{offspring::Poisson{2.0}},
                                OffspringFamily{offspring::Geometric0{0.1}}})
        EXPECT_EQ(thin(law, 0, rng), 0u);
}

// The one-draw parametric thinning against summing x single draws. The 1%
// level is split over the 20 comparisons.
TEST(Thin, MatchesBruteForceSum)
{
    std::vector<OffspringFamily> const laws{offspring::Poisson{0.5},
                                            offspring::Bernoulli{0.4},
                                            offspring::Geometric0{0.6},
                                            offspring::Binomial{3, 0.3}};
    Rng const master(2024);
    std::uint64_t stream = 0;
    for (auto const& law : laws)
    {
        for (Count x : {1u, 2u, 4u, 5u, 17u})
        {
            Rng fast = master.split(stream++);
            Rng slow = master.split(stream++);
            int const n = 100000;
            std::vector<Count> a(n), b(n);
            for (int r = 0; r < n; ++r)
            {
                a[r] = thin(law, x, fast);
                Count sum = 0;
                for (Count j = 0; j < x; ++j)
                    sum += thin(law, 1, slow);
                b[r] = sum;
            }
            auto const chi = chi_square_homogeneity(std::span<Count const>(a),
                                                    std::span<Count const>(b));
            EXPECT_GT(chi.p_value, 0.01 / 20) << to_string(law) << " x=" << x;
        }
    }
}

TEST(Thin, BernoulliMean)
{
    Rng rng(4);
    std::vector<Count> draws(100000);
    for (auto& d : draws)
        d = thin(offspring::Bernoulli{0.3}, 50, rng);
    auto const [mean, se] = test::mean_se(draws);
    EXPECT_NEAR(mean, 15.0, 4 * se);
}

TEST(Step, EmptySumPlusImmigration)
{
    Rng rng(1);
    EnvDraw const xi{offspring::Poisson{0.5}, immigration::Constant{3}};
    EXPECT_EQ(step({0, 0}, xi, rng).value, 3u);
    EnvDraw const identity{offspring::Bernoulli{1.0}, immigration::Constant{0}};
    auto const next = step({5, 2}, identity, rng);
    EXPECT_EQ(next.value, 5u);
    EXPECT_EQ(next.generation, 3u);
}

TEST(Step, LargePopulationMean)
{
    Rng rng(6);
    EnvDraw const xi{offspring::Poisson{0.5}, immigration::Constant{0}};
    std::vector<Count> draws(10000);
    for (auto& d : draws)
        d = step({10000, 0}, xi, rng).value;
    auto const [mean, se] = test::mean_se(draws);
    EXPECT_NEAR(mean, 5000.0, 4 * se);
}

TEST(Forward, ZeroStepsIsInitialState)
{
    Rng rng(1);
    auto const path = simulate_forward(7, 0, test::two_poisson_env(), rng);
    ASSERT_EQ(path.size(), 1u);
    EXPECT_EQ(path[0].value, 7u);
}

TEST(Forward, ExtinctionPlusConstantImmigration)
{
    auto const env = EnvSpec::atomic(
        {{1.0, offspring::Bernoulli{0.0}, immigration::Constant{2}}});
    Rng rng(1);
    auto const path = simulate_forward(100, 20, env, rng);
    for (std::size_t n = 1; n < path.size(); ++n)
        EXPECT_EQ(path[n].value, 2u);
}

TEST(Forward, TerminalMatchesTrajectory)
{
    auto const env = test::two_poisson_env();
    Rng a(31), b(31);
    auto const path = simulate_forward(3, 25, env, a);
    EXPECT_EQ(forward_terminal(3, 25, env, b), path.back().value);
}

// E X_{n+1} = E m E X_n + E B; from a large start the log-mean falls at
// rate log E m.
TEST(Forward, MeanDecaysAtMeanOffspringRate)
{
    auto const env = test::two_poisson_env(immigration::Constant{0});
    int const reps = 2000, steps = 10;
    std::vector<double> sums(steps + 1, 0.0);
    Rng const master(77);
    for (int r = 0; r < reps; ++r)
    {
        Rng rng = master.split(r);
        auto const path = simulate_forward(1000000, steps, env, rng);
        for (int n = 0; n <= steps; ++n)
            sums[n] += double(path[n].value);
    }
    std::vector<std::pair<double, double>> points;
    for (int n = 1; n <= steps; ++n)
        points.push_back({double(n), sums[n] / reps});
    auto const fit = fit_geometric_decay(points);
    EXPECT_NEAR(std::log(fit.rho_hat) / std::log(0.6), 1.0, 0.05);
}

TEST(Truncation, SmallestSufficientK)
{
    auto const model = test::config_a();
    EXPECT_EQ(choose_truncation(model, 1e-4), 12u);
    EXPECT_EQ(choose_truncation(model, 0.999), 0u);
    EXPECT_EQ(choose_truncation(model, 1.0), 0u);
    EXPECT_EQ(choose_truncation(model, 5.0), 0u);
    // Check the defining inequality directly.
    for (double eps : {1e-2, 1e-6, 1e-9})
    {
        auto const k = choose_truncation(model, eps);
        EXPECT_LE(std::pow(0.45, double(k + 1)) / 0.55, eps);
        if (k > 0)
        {
            EXPECT_GT(std::pow(0.45, double(k)) / 0.55, eps);
        }
    }
}

TEST(Truncation, RejectsSupercritical)
{
    auto const model = test::single_atom(offspring::Poisson{1.2},
                                         test::pareto2(), 1.0);
    EXPECT_THROW(choose_truncation(model, 1e-6), NotSubcritical);
}

TEST(Backward, ZeroTruncationIsImmigrationLaw)
{
    auto const model = test::config_a();
    Rng const master(3);
    Rng direct(4);
    int const n = 100000;
    std::vector<Count> a(n), b(n);
    for (int r = 0; r < n; ++r)
    {
        a[r] = sample_stationary_backward(model, 0, master.split(r)).value;
        b[r] = sample_immigration(test::pareto2(), direct);
    }
    auto const chi = chi_square_homogeneity(std::span<Count const>(a),
                                            std::span<Count const>(b));
    EXPECT_GT(chi.p_value, 0.01);
}

TEST(Backward, SterileEnvironmentKeepsOnlyFirstTerm)
{
    auto const model = test::single_atom(offspring::Bernoulli{0.0},
                                         test::pareto2(), 1.0);
    Rng const master(5);
    for (int r = 0; r < 1000; ++r)
    {
        Rng const rng = master.split(r);
        EXPECT_EQ(sample_stationary_backward(model, 15, rng).value,
                  sample_stationary_backward(model, 0, rng).value);
    }
}

TEST(Backward, ProbabilityOfZeroForHalfBernoulli)
{
    auto const model = test::single_atom(offspring::Bernoulli{0.5},
                                         immigration::Bernoulli{0.5}, 1.0);
    auto const samples = collect_samples(
        1000000, 1, Rng(8), [&](Rng& rng) {
            return sample_stationary_backward(model, 30, rng).value;
        });
    double const zeros = double(std::upper_bound(samples.begin(),
                                                 samples.end(), Count{0})
                                - samples.begin());
    double const p0 = test::half_product();
    EXPECT_NEAR(p0, 0.2887880950866, 1e-10);
    EXPECT_NEAR(zeros / 1e6, p0, 4 * test::binomial_se(p0, 1e6));
}

TEST(Backward, PartialSumsGrowWithTruncation)
{
    auto const model = test::config_a();
    Rng const master(12);
    std::vector<EnvDraw> scratch;
    for (int r = 0; r < 2000; ++r)
    {
        Rng const rng = master.split(r);
        Count prev = 0;
        for (std::uint64_t k = 0; k <= 20; ++k)
        {
            Count const cur = sample_stationary_backward(model, k, rng, scratch).value;
            ASSERT_GE(cur, prev) << "replica " << r << " K " << k;
            prev = cur;
        }
    }
}

TEST(Backward, AgreesWithForwardChain)
{
    auto const model = test::config_a();
    auto const k = choose_truncation(model, 1e-6);
    std::size_t const n = 100000;
    auto const backward = collect_samples(n, 1, Rng(41), [&](Rng& rng) {
        return sample_stationary_backward(model, k, rng).value;
    });
    auto const forward = collect_samples(n, 1, Rng(42), [&](Rng& rng) {
        return forward_terminal(0, k, model.env, rng);
    });
    double const d = ks_statistic(std::span<Count const>(backward),
                                  std::span<Count const>(forward));
    EXPECT_LT(d, ks_critical_value(n, n, 0.01));
}

TEST(Backward, OneStepLeavesLawUnchanged)
{
    auto const model = test::config_a();
    auto const k = choose_truncation(model, 1e-6);
    std::size_t const n = 100000;
    auto const base = collect_samples(n, 1, Rng(51), [&](Rng& rng) {
        return sample_stationary_backward(model, k, rng).value;
    });
    auto const stepped = collect_samples(n, 1, Rng(52), [&](Rng& rng) {
        ChainState s{sample_stationary_backward(model, k, rng.substream(7)).value, 0};
        return step(s, sample_environment(model.env, rng), rng).value;
    });
    double const d = ks_statistic(std::span<Count const>(base),
                                  std::span<Count const>(stepped));
    EXPECT_LT(d, ks_critical_value(n, n, 0.01));
}

TEST(Backward, WorkerCountDoesNotChangeSamples)
{
    auto const model = test::config_a();
    auto sampler = [&](Rng& rng) {
        return sample_stationary_backward(model, 18, rng).value;
    };
    auto const one = collect_samples(100000, 1, Rng(9), sampler);
    EXPECT_EQ(one, collect_samples(100000, 1, Rng(9), sampler));
    EXPECT_EQ(one, collect_samples(100000, 4, Rng(9), sampler));
    EXPECT_EQ(one, collect_samples(100000, 16, Rng(9), sampler));
    EXPECT_NE(one, collect_samples(100000, 1, Rng(10), sampler));
}

TEST(RandomSum, DegenerateCounts)
{
    auto const model = test::config_a();
    Rng rng(3);
    for (int i = 0; i < 100; ++i)
        EXPECT_EQ(random_sum_sample(model, immigration::Constant{0}, rng), 0u);

    // B = 1: a single offspring draw from a random atom, mean E m = 0.6.
    std::vector<Count> draws(200000);
    for (auto& d : draws)
        d = random_sum_sample(model, immigration::Constant{1}, rng);
    auto const [mean, se] = test::mean_se(draws);
    EXPECT_NEAR(mean, 0.6, 4 * se);
}

TEST(ComposedThinning, ZeroDepthAndIdentityThinning)
{
    auto const model = test::config_a();
    auto const identity = test::single_atom(offspring::Bernoulli{1.0},
                                            test::pareto2(), 1.0);
    Rng const master(14);
    std::size_t const n = 50000;
    auto const b = collect_samples(n, 1, master.substream(0), [&](Rng& rng) {
        return sample_immigration(test::pareto2(), rng);
    });
    auto const zero = collect_samples(n, 1, master.substream(1), [&](Rng& rng) {
        return composed_thinning_sample(model, 0, rng);
    });
    auto const ident = collect_samples(n, 1, master.substream(2), [&](Rng& rng) {
        return composed_thinning_sample(identity, 4, rng);
    });
    double const crit = ks_critical_value(n, n, 0.01);
    EXPECT_LT(ks_statistic(std::span<Count const>(b), std::span<Count const>(zero)),
              crit);
    EXPECT_LT(ks_statistic(std::span<Count const>(b), std::span<Count const>(ident)),
              crit);
}

TEST(GreySum, DegenerateCases)
{
    auto const model = test::config_a();
    auto const sterile = test::single_atom(offspring::Bernoulli{0.0},
                                           test::pareto2(), 1.0);
    Rng const master(15);
    std::size_t const n = 50000;
    auto const b = collect_samples(n, 1, master.substream(0), [&](Rng& rng) {
        return sample_immigration(test::pareto2(), rng);
    });
    auto const no_n = collect_samples(n, 1, master.substream(1), [&](Rng& rng) {
        return grey_sum_sample(model, immigration::Constant{0}, rng);
    });
    auto const no_a = collect_samples(n, 1, master.substream(2), [&](Rng& rng) {
        return grey_sum_sample(sterile, immigration::DiscretePareto{2.0, 2.0}, rng);
    });
    double const crit = ks_critical_value(n, n, 0.01);
    EXPECT_LT(ks_statistic(std::span<Count const>(b), std::span<Count const>(no_n)),
              crit);
    EXPECT_LT(ks_statistic(std::span<Count const>(b), std::span<Count const>(no_a)),
              crit);
}

TEST(Overflow, HugeMeansAreReported)
{
    Rng rng(1);
    EXPECT_THROW(thin(offspring::Poisson{1e10}, Count{1} << 60, rng), Overflow);
}

}  // namespace
}  // namespace bpire
