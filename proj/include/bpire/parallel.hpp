// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/parallel.hpp
//! Data-parallel replica execution with scheduling-independent results.
//---------------------------------------------------------------------------//
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace bpire
{
inline constexpr std::uint64_t kDefaultChunk = 1u << 15;

/*!
 * Evaluate fn(first, last) over fixed replica chunks on `workers` threads.
 *
 * Chunk boundaries depend only on the replica count, and results come back
 * indexed by chunk, so merging them in order gives the same answer for any
 * worker count. If chunks throw, the exception of the lowest chunk index is
 * rethrown.
 */
template<class ChunkFn>
auto map_chunks(std::uint64_t replicas,
                unsigned workers,
                ChunkFn fn,
                std::uint64_t chunk = kDefaultChunk)
{
    using Partial = decltype(fn(std::uint64_t{}, std::uint64_t{}));
    std::uint64_t const chunks = (replicas + chunk - 1) / chunk;
    std::vector<Partial> results(chunks);
    std::vector<std::exception_ptr> errors(chunks);
    std::atomic<std::uint64_t> next{0};

    auto worker = [&] {
        for (std::uint64_t c = next++; c < chunks; c = next++)
        {
            try
            {
                std::uint64_t const first = c * chunk;
                results[c] = fn(first, std::min(replicas, first + chunk));
            }
            catch (...)
            {
                errors[c] = std::current_exception();
            }
        }
    };

    workers = std::max(1u, workers);
    if (workers == 1 || chunks <= 1)
    {
        worker();
    }
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < std::min<std::uint64_t>(workers, chunks); ++w)
            pool.emplace_back(worker);
    }
    for (auto const& e : errors)
    {
        if (e)
            std::rethrow_exception(e);
    }
    return results;
}

/// Sorted multiset of sampler(rng_r) over replicas r, rng_r = master.split(r).
/// The sampler is copied once per chunk, so it may hold mutable scratch.
template<class Sampler>
auto collect_samples(std::uint64_t replicas,
                     unsigned workers,
                     Rng const& master,
                     Sampler const& sampler)
{
    using Value = decltype(std::declval<Sampler&>()(std::declval<Rng&>()));
    auto chunks = map_chunks(
        replicas, workers, [&](std::uint64_t first, std::uint64_t last) {
            Sampler local = sampler;
            std::vector<Value> out;
            out.reserve(last - first);
            for (std::uint64_t r = first; r < last; ++r)
            {
                Rng rng = master.split(r);
                out.push_back(local(rng));
            }
            return out;
        });
    std::vector<Value> merged;
    merged.reserve(replicas);
    for (auto const& part : chunks)
        merged.insert(merged.end(), part.begin(), part.end());
    std::sort(merged.begin(), merged.end());
    return merged;
}

/// Counts of sampler outputs strictly above each threshold, without storing
/// the samples.
template<class Sampler, class T>
std::vector<std::uint64_t> count_exceedances(std::uint64_t replicas,
                                             unsigned workers,
                                             Rng const& master,
                                             std::span<T const> thresholds,
                                             Sampler const& sampler)
{
    auto chunks = map_chunks(
        replicas, workers, [&](std::uint64_t first, std::uint64_t last) {
            Sampler local = sampler;
            std::vector<std::uint64_t> counts(thresholds.size(), 0);
            for (std::uint64_t r = first; r < last; ++r)
            {
                Rng rng = master.split(r);
                auto const value = local(rng);
                for (std::size_t j = 0; j < thresholds.size(); ++j)
                    counts[j] += value > thresholds[j];
            }
            return counts;
        });
    std::vector<std::uint64_t> total(thresholds.size(), 0);
    for (auto const& part : chunks)
    {
        for (std::size_t j = 0; j < total.size(); ++j)
            total[j] += part[j];
    }
    return total;
}

}  // namespace bpire
