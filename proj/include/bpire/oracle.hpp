// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/oracle.hpp
//! Exact small-instance ground truth: truncated transition kernel with power
//! iteration, and brute-force random-sum tails by iterated convolution.
//---------------------------------------------------------------------------//
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "env_model.hpp"
#include "errors.hpp"
#include "laws.hpp"

namespace bpire
{
inline constexpr std::size_t kMaxOracleStates = 4096;

/// Row-stochastic kernel on {0..n_max}; mass above n_max lands in n_max.
struct TruncatedKernel
{
    std::size_t n_max = 0;
    std::vector<double> P;          //!< row-major, (n_max+1)^2
    std::vector<double> row_clip;   //!< P(next >= n_max) per row
    double mass_clip = 0.0;         //!< max over rows of row_clip

    std::size_t states() const noexcept { return n_max + 1; }
    double operator()(std::size_t x, std::size_t y) const
    {
        return P[x * states() + y];
    }
};

struct ExactDistribution
{
    std::vector<double> pmf;
    double residual = 0.0;  //!< stationary flux of clipped mass
    std::uint64_t sweeps = 0;
};

/*!
 * P[x][y] = sum_j w_j (law of theta_j o x  *  immigration_j)(y).
 *
 * The x-fold offspring law comes from the closed-form convolution family;
 * everything past n_max is folded into the last column so rows stay
 * stochastic.
 */
inline TruncatedKernel build_kernel(EnvSpec const& env, std::size_t n_max)
{
    if (!env.is_atomic())
        throw PmfUnavailable("continuous environments have no atom pmfs");
    if (n_max < 1 || n_max + 1 > kMaxOracleStates)
        throw InvalidParameter("oracle supports 1 <= n_max < 4096");

    std::size_t const states = n_max + 1;
    TruncatedKernel kernel;
    kernel.n_max = n_max;
    kernel.P.assign(states * states, 0.0);
    kernel.row_clip.assign(states, 0.0);

    std::vector<double> thinned(states), arrival(states), row(states);
    for (auto const& atom : env.atoms())
    {
        for (std::size_t y = 0; y < states; ++y)
            arrival[y] = immigration_pmf(atom.immigration, y);

        for (std::size_t x = 0; x < states; ++x)
        {
            for (std::size_t k = 0; k < states; ++k)
                thinned[k] = std::exp(convolution_log_pmf(atom.offspring, x, k));
            std::fill(row.begin(), row.end(), 0.0);
            for (std::size_t k = 0; k < states; ++k)
            {
                if (thinned[k] == 0.0)
                    continue;
                for (std::size_t b = 0; k + b < n_max; ++b)
                    row[k + b] += thinned[k] * arrival[b];
            }
            double* out = &kernel.P[x * states];
            for (std::size_t y = 0; y < n_max; ++y)
                out[y] += atom.weight * row[y];
        }
    }

    for (std::size_t x = 0; x < states; ++x)
    {
        double* out = &kernel.P[x * states];
        double below = 0.0;
        for (std::size_t y = 0; y < n_max; ++y)
            below += out[y];
        out[n_max] = std::max(0.0, 1.0 - below);
        kernel.row_clip[x] = out[n_max];
        kernel.mass_clip = std::max(kernel.mass_clip, out[n_max]);
    }
    return kernel;
}

/// Left fixed vector of the kernel, iterated until the sweep-to-sweep total
/// variation drops below tol.
inline ExactDistribution stationary_power_iteration(TruncatedKernel const& kernel,
                                                    double tol = 1e-12,
                                                    std::uint64_t max_iter
                                                    = 1000000)
{
    std::size_t const states = kernel.states();
    std::vector<double> pi(states, 0.0), next(states);
    pi[0] = 1.0;
    for (std::uint64_t sweep = 1; sweep <= max_iter; ++sweep)
    {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t x = 0; x < states; ++x)
        {
            double const mass = pi[x];
            if (mass == 0.0)
                continue;
            double const* row = &kernel.P[x * states];
            for (std::size_t y = 0; y < states; ++y)
                next[y] += mass * row[y];
        }
        double total = 0.0;
        for (double v : next)
            total += v;
        double tv = 0.0;
        for (std::size_t y = 0; y < states; ++y)
        {
            next[y] /= total;
            tv += std::abs(next[y] - pi[y]);
        }
        pi.swap(next);
        if (0.5 * tv < tol)
        {
            ExactDistribution result;
            result.residual = 0.0;
            for (std::size_t x = 0; x < states; ++x)
                result.residual += pi[x] * kernel.row_clip[x];
            result.pmf = std::move(pi);
            result.sweeps = sweep;
            return result;
        }
    }
    throw NoConvergence("power iteration did not converge");
}

/// ||pi P - pi||_1 for a candidate stationary pmf.
inline double
stationarity_defect(TruncatedKernel const& kernel, std::vector<double> const& pi)
{
    std::size_t const states = kernel.states();
    std::vector<double> image(states, 0.0);
    for (std::size_t x = 0; x < states; ++x)
        for (std::size_t y = 0; y < states; ++y)
            image[y] += pi[x] * kernel(x, y);
    double l1 = 0.0;
    for (std::size_t y = 0; y < states; ++y)
        l1 += std::abs(image[y] - pi[y]);
    return l1;
}

/*!
 * P(sum_{i=1}^{B} A_i > x), B ~ b_law independent of xi, computed exactly by
 * iterating the single-draw offspring pmf (not the closed-form family).
 *
 * B is truncated at `cap`; the neglected mass P(B > cap) must be below 1e-12.
 */
inline double brute_force_random_sum_tail(EnvSpec const& env,
                                          ImmigrationFamily const& b_law,
                                          std::uint64_t x,
                                          std::uint64_t cap)
{
    if (!env.is_atomic())
        throw PmfUnavailable("continuous environments have no atom pmfs");
    if (survival(b_law, cap) >= 1e-12)
        throw ResidualTooLarge("P(B > cap) >= 1e-12; raise cap");

    std::size_t const width = x + 1;
    double tail = 0.0;
    for (auto const& atom : env.atoms())
    {
        std::vector<double> single(width);
        for (std::size_t k = 0; k < width; ++k)
            single[k] = std::exp(offspring_log_pmf(atom.offspring, k));

        // partial[k] = P(A_1 + ... + A_b = k) for k <= x.
        std::vector<double> partial(width, 0.0), next(width);
        partial[0] = 1.0;
        double atom_tail = 0.0;
        for (std::uint64_t b = 0; b <= cap; ++b)
        {
            if (b > 0)
            {
                std::fill(next.begin(), next.end(), 0.0);
                for (std::size_t i = 0; i < width; ++i)
                {
                    if (partial[i] == 0.0)
                        continue;
                    for (std::size_t j = 0; i + j < width; ++j)
                        next[i + j] += partial[i] * single[j];
                }
                partial.swap(next);
            }
            double const pb = immigration_pmf(b_law, b);
            if (pb == 0.0)
                continue;
            double at_most = 0.0;
            for (double p : partial)
                at_most += p;
            atom_tail += pb * std::max(0.0, 1.0 - at_most);
        }
        tail += atom.weight * atom_tail;
    }
    return tail;
}

}  // namespace bpire
