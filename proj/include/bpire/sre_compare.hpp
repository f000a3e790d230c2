// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/sre_compare.hpp
//! Affine recursion Y' = C Y + D with C = m(xi), D = B, driven by the same
//! streams as the backward sampler so the two can be compared path by path.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <vector>

#include "env_model.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "simulator.hpp"

namespace bpire
{
struct SreState
{
    double value = 0.0;
    std::uint64_t generation = 0;
};

inline SreState sre_step(SreState const& state, double c, double d)
{
    if (!(c >= 0.0) || !(d >= 0.0))
        throw InvalidParameter("SRE coefficients must be non-negative");
    return {c * state.value + d, state.generation + 1};
}

/*!
 * Perpetuity sum_{i=0}^{K} Pi_{i-1} B_i with Pi_{-1} = 1.
 *
 * Environments and B_i come from the same substreams as
 * sample_stationary_backward, so for a shared rng the i-th terms of the two
 * series use identical (xi_0..xi_i, B_i).
 */
inline double sample_perpetuity(ModelSpec const& model,
                                std::uint64_t truncation,
                                Rng const& rng,
                                std::vector<EnvDraw>& scratch)
{
    detail::draw_environments(model.env, truncation + 1, rng, scratch);
    double total = 0.0;
    double product = 1.0;
    for (std::uint64_t i = 0; i <= truncation; ++i)
    {
        Rng stream = rng.substream(kTermStream + i);
        Count const b = sample_immigration(scratch[i].immigration, stream);
        total += product * static_cast<double>(b);
        product *= mean_offspring(scratch[i].offspring);
    }
    return total;
}

inline double
sample_perpetuity(ModelSpec const& model, std::uint64_t truncation, Rng const& rng)
{
    std::vector<EnvDraw> scratch;
    return sample_perpetuity(model, truncation, rng, scratch);
}

/// Theta_{i-1} o B_i - Pi_{i-1} B_i on one coupled set of draws.
inline double coupled_gap_sample(ModelSpec const& model,
                                 std::uint64_t i,
                                 Rng const& rng,
                                 std::vector<EnvDraw>& scratch)
{
    detail::draw_environments(model.env, i + 1, rng, scratch);
    Rng stream = rng.substream(kTermStream + i);
    Count const b = sample_immigration(scratch[i].immigration, stream);
    double product = 1.0;
    for (std::uint64_t j = 0; j < i; ++j)
        product *= mean_offspring(scratch[j].offspring);
    Count const thinned = detail::backward_term(scratch, i, b, stream);
    return static_cast<double>(thinned) - product * static_cast<double>(b);
}

inline double
coupled_gap_sample(ModelSpec const& model, std::uint64_t i, Rng const& rng)
{
    std::vector<EnvDraw> scratch;
    return coupled_gap_sample(model, i, rng, scratch);
}

}  // namespace bpire
