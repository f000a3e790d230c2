// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/simulator.hpp
//! Branching chain with immigration, thinning, and the backward-series
//! stationary sampler.
//---------------------------------------------------------------------------//
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "env_model.hpp"
#include "errors.hpp"
#include "laws.hpp"
#include "rng.hpp"

namespace bpire
{
using Count = std::uint64_t;

struct ChainState
{
    Count value = 0;
    std::uint64_t generation = 0;

    bool operator==(ChainState const&) const = default;
};

struct StationarySample
{
    Count value;
    std::uint64_t truncation;
};

//---------------------------------------------------------------------------//
// Stream layout shared by the backward sampler and the SRE comparison: the
// environments xi_0, xi_1, ... come sequentially from substream(kEnvStream)
// and term i (B_i and its thinnings) from substream(kTermStream + i).
// Extending K therefore never changes the draws of earlier terms.
//---------------------------------------------------------------------------//
inline constexpr std::uint64_t kEnvStream = 0;
inline constexpr std::uint64_t kTermStream = 1;

namespace detail
{
// Largest mean/count accepted before declaring overflow; keeps Boost's
// samplers in their exact regime with headroom below 2^64.
inline constexpr double kMaxMean = 0x1.0p62;

inline Count checked_add(Count a, Count b)
{
    if (b > std::numeric_limits<Count>::max() - a)
        throw Overflow("population exceeds 64-bit range");
    return a + b;
}

inline Count poisson_draw(double mean, Rng& rng)
{
    if (mean <= 0.0)
        return 0;
    if (!(mean < kMaxMean))
        throw Overflow("thinning mean exceeds 2^62");
    boost::random::poisson_distribution<std::int64_t, double> dist(mean);
    return static_cast<Count>(dist(rng));
}

inline Count binomial_draw(Count trials, double p, Rng& rng)
{
    if (trials == 0 || p <= 0.0)
        return 0;
    if (p >= 1.0)
        return trials;
    if (!(static_cast<double>(trials) < kMaxMean))
        throw Overflow("binomial trial count exceeds 2^62");
    boost::random::binomial_distribution<std::int64_t, double> dist(
        static_cast<std::int64_t>(trials), p);
    return static_cast<Count>(dist(rng));
}

// Failures before the r-th success, as a gamma-mixed Poisson.
inline Count negative_binomial_draw(Count r, double p, Rng& rng)
{
    if (r == 0 || p >= 1.0)
        return 0;
    if (!(static_cast<double>(r) * (1.0 - p) / p < kMaxMean))
        throw Overflow("negative binomial mean exceeds 2^62");
    boost::random::gamma_distribution<double> gamma(static_cast<double>(r),
                                                    (1.0 - p) / p);
    return poisson_draw(gamma(rng), rng);
}
}  // namespace detail

//---------------------------------------------------------------------------//
// Primitive draws
//---------------------------------------------------------------------------//

/// theta o x: the sum of x iid offspring draws, in one parametric draw.
inline Count thin(OffspringFamily const& law, Count x, Rng& rng)
{
    if (x == 0)
        return 0;
    double const xd = static_cast<double>(x);
    return std::visit(
        Overloaded{
            [&](offspring::Poisson const& l) {
                return detail::poisson_draw(xd * l.rate, rng);
            },
            [&](offspring::Bernoulli const& l) {
                return detail::binomial_draw(x, l.p, rng);
            },
            [&](offspring::Geometric0 const& l) {
                return detail::negative_binomial_draw(x, l.p, rng);
            },
            [&](offspring::Binomial const& l) {
                if (l.trials != 0
                    && x > std::numeric_limits<Count>::max() / l.trials)
                    throw Overflow("binomial trial count overflows");
                return detail::binomial_draw(x * l.trials, l.p, rng);
            },
        },
        law);
}

/// B ~ law by inversion: min{x >= 0 : S(x) <= U}.
inline Count sample_immigration(ImmigrationFamily const& law, Rng& rng)
{
    if (auto const* c = std::get_if<immigration::Constant>(&law))
        return c->b;
    return survival_quantile(law, rng.uniform01());
}

/// One generation: theta o X_n + B_{n+1}.
inline ChainState step(ChainState const& state, EnvDraw const& draw, Rng& rng)
{
    Count const offspring = thin(draw.offspring, state.value, rng);
    Count const immigrants = sample_immigration(draw.immigration, rng);
    return {detail::checked_add(offspring, immigrants), state.generation + 1};
}

/// Trajectory X_0..X_steps with a fresh environment each generation.
inline std::vector<ChainState>
simulate_forward(Count x0, std::uint64_t steps, EnvSpec const& env, Rng& rng)
{
    std::vector<ChainState> path;
    path.reserve(steps + 1);
    path.push_back({x0, 0});
    for (std::uint64_t n = 0; n < steps; ++n)
        path.push_back(step(path.back(), sample_environment(env, rng), rng));
    return path;
}

/// Terminal value X_steps only; same draws as simulate_forward.
inline Count
forward_terminal(Count x0, std::uint64_t steps, EnvSpec const& env, Rng& rng)
{
    ChainState state{x0, 0};
    for (std::uint64_t n = 0; n < steps; ++n)
        state = step(state, sample_environment(env, rng), rng);
    return state.value;
}

//---------------------------------------------------------------------------//
// Backward series
//---------------------------------------------------------------------------//

/*!
 * Smallest K with q^{K+1} / (1 - q) <= epsilon, where q = E m(xi)^kappa.
 *
 * The omitted terms beyond K carry relative tail weight of that order.
 */
inline std::uint64_t choose_truncation(ModelSpec const& model, double epsilon)
{
    double const q = kappa_moment(model.env, model.kappa);
    if (!(q < 1.0))
        throw NotSubcritical("E m(xi)^kappa >= 1; backward series diverges");
    if (!(epsilon > 0.0))
        throw InvalidParameter("truncation epsilon must be positive");
    if (epsilon >= 1.0)
        return 0;
    std::uint64_t k = 0;
    double power = q;
    while (power / (1.0 - q) > epsilon)
    {
        power *= q;
        ++k;
    }
    return k;
}

namespace detail
{
inline void draw_environments(EnvSpec const& env,
                              std::uint64_t count,
                              Rng const& rng,
                              std::vector<EnvDraw>& out)
{
    out.clear();
    out.reserve(count);
    Rng stream = rng.substream(kEnvStream);
    for (std::uint64_t j = 0; j < count; ++j)
        out.push_back(sample_environment(env, stream));
}

// Theta_{i-1} o B_i: draw B_i from xi_i, then thin through xi_{i-1} ... xi_0.
inline Count backward_term(std::vector<EnvDraw> const& envs,
                           std::uint64_t i,
                           Count b,
                           Rng& stream)
{
    Count value = b;
    for (std::uint64_t j = i; j-- > 0 && value != 0;)
        value = thin(envs[j].offspring, value, stream);
    return value;
}
}  // namespace detail

/// X~_K = sum_{i=0}^{K} Theta_{i-1} o B_i with environments shared across
/// terms. `scratch` is reused between calls to avoid reallocation.
inline StationarySample sample_stationary_backward(ModelSpec const& model,
                                                   std::uint64_t truncation,
                                                   Rng const& rng,
                                                   std::vector<EnvDraw>& scratch)
{
    detail::draw_environments(model.env, truncation + 1, rng, scratch);
    Count total = 0;
    for (std::uint64_t i = 0; i <= truncation; ++i)
    {
        Rng stream = rng.substream(kTermStream + i);
        Count const b = sample_immigration(scratch[i].immigration, stream);
        total = detail::checked_add(
            total, detail::backward_term(scratch, i, b, stream));
    }
    return {total, truncation};
}

inline StationarySample sample_stationary_backward(ModelSpec const& model,
                                                   std::uint64_t truncation,
                                                   Rng const& rng)
{
    std::vector<EnvDraw> scratch;
    return sample_stationary_backward(model, truncation, rng, scratch);
}

//---------------------------------------------------------------------------//
// Per-lemma sampling primitives
//---------------------------------------------------------------------------//

/// sum_{i=1}^{B} A_i with B ~ b_law independent of xi.
inline Count random_sum_sample(ModelSpec const& model,
                               ImmigrationFamily const& b_law,
                               Rng& rng)
{
    Count const b = sample_immigration(b_law, rng);
    EnvDraw const xi = sample_environment(model.env, rng);
    return thin(xi.offspring, b, rng);
}

/// Theta_{i-1} o B_i with fresh environments xi_0..xi_i.
inline Count
composed_thinning_sample(ModelSpec const& model, std::uint64_t i, Rng& rng)
{
    std::vector<EnvDraw> envs;
    envs.reserve(i + 1);
    for (std::uint64_t j = 0; j <= i; ++j)
        envs.push_back(sample_environment(model.env, rng));
    Count const b = sample_immigration(envs[i].immigration, rng);
    return detail::backward_term(envs, i, b, rng);
}

/// B + sum_{i=1}^{N} A_i with N ~ n_law independent of (xi, B, A).
inline Count grey_sum_sample(ModelSpec const& model,
                             ImmigrationFamily const& n_law,
                             Rng& rng)
{
    Count const n = sample_immigration(n_law, rng);
    EnvDraw const xi = sample_environment(model.env, rng);
    Count const b = sample_immigration(xi.immigration, rng);
    return detail::checked_add(b, thin(xi.offspring, n, rng));
}

}  // namespace bpire
