// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/laws.hpp
//! Parametric offspring and immigration laws on {0, 1, 2, ...}.
//---------------------------------------------------------------------------//
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>

#include "errors.hpp"

namespace bpire
{
//---------------------------------------------------------------------------//
// Offspring laws. Each is closed under convolution, so the sum of x iid
// draws is again a single parametric draw.
//---------------------------------------------------------------------------//
namespace offspring
{
struct Poisson
{
    double rate;

    bool operator==(Poisson const&) const = default;
};
struct Bernoulli
{
    double p;

    bool operator==(Bernoulli const&) const = default;
};
//! Failures before the first success; support {0, 1, ...}.
struct Geometric0
{
    double p;

    bool operator==(Geometric0 const&) const = default;
};
struct Binomial
{
    std::uint64_t trials;
    double p;

    bool operator==(Binomial const&) const = default;
};
}  // namespace offspring

using OffspringFamily = std::variant<offspring::Poisson,
                                     offspring::Bernoulli,
                                     offspring::Geometric0,
                                     offspring::Binomial>;

//---------------------------------------------------------------------------//
// Immigration laws, parameterized by their survival function S(x) = P(B > x).
//---------------------------------------------------------------------------//
namespace immigration
{
//! S(x) = min(1, c (ln(e + x))^beta (1 + x)^-kappa).
struct DiscretePareto
{
    double kappa;
    double c = 1.0;
    double beta = 0.0;

    bool operator==(DiscretePareto const&) const = default;
};
struct Bernoulli
{
    double q;

    bool operator==(Bernoulli const&) const = default;
};
struct Constant
{
    std::uint64_t b;

    bool operator==(Constant const&) const = default;
};
struct Geometric0
{
    double p;

    bool operator==(Geometric0 const&) const = default;
};
}  // namespace immigration

using ImmigrationFamily = std::variant<immigration::DiscretePareto,
                                       immigration::Bernoulli,
                                       immigration::Constant,
                                       immigration::Geometric0>;

template<class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template<class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

namespace detail
{
inline bool is_probability(double p)
{
    return p >= 0.0 && p <= 1.0;
}

inline double log_binomial_pmf(std::uint64_t n, double p, std::uint64_t k)
{
    if (k > n)
        return -INFINITY;
    if (p == 0.0)
        return k == 0 ? 0.0 : -INFINITY;
    if (p == 1.0)
        return k == n ? 0.0 : -INFINITY;
    double const nd = static_cast<double>(n);
    double const kd = static_cast<double>(k);
    return std::lgamma(nd + 1) - std::lgamma(kd + 1) - std::lgamma(nd - kd + 1)
           + kd * std::log(p) + (nd - kd) * std::log1p(-p);
}

inline double log_poisson_pmf(double mean, std::uint64_t k)
{
    if (mean == 0.0)
        return k == 0 ? 0.0 : -INFINITY;
    double const kd = static_cast<double>(k);
    return kd * std::log(mean) - mean - std::lgamma(kd + 1);
}

// Failures before the r-th success.
inline double log_negbin_pmf(std::uint64_t r, double p, std::uint64_t k)
{
    if (r == 0 || p == 1.0)
        return k == 0 ? 0.0 : -INFINITY;
    double const rd = static_cast<double>(r);
    double const kd = static_cast<double>(k);
    return std::lgamma(rd + kd) - std::lgamma(kd + 1) - std::lgamma(rd)
           + rd * std::log(p) + kd * std::log1p(-p);
}
}  // namespace detail

//---------------------------------------------------------------------------//
// Offspring law operations
//---------------------------------------------------------------------------//

inline void validate(OffspringFamily const& law)
{
    std::visit(
        Overloaded{
            [](offspring::Poisson const& l) {
                if (!(l.rate >= 0.0 && std::isfinite(l.rate)))
                    throw InvalidParameter("poisson rate must be >= 0");
            },
            [](offspring::Bernoulli const& l) {
                if (!detail::is_probability(l.p))
                    throw InvalidParameter("bernoulli p must lie in [0, 1]");
            },
            [](offspring::Geometric0 const& l) {
                if (!(l.p > 0.0 && l.p <= 1.0))
                    throw InvalidParameter("geometric0 p must lie in (0, 1]");
            },
            [](offspring::Binomial const& l) {
                if (!detail::is_probability(l.p))
                    throw InvalidParameter("binomial p must lie in [0, 1]");
            },
        },
        law);
}

/// Conditional mean offspring count m(xi).
inline double mean_offspring(OffspringFamily const& law)
{
    return std::visit(
        Overloaded{
            [](offspring::Poisson const& l) { return l.rate; },
            [](offspring::Bernoulli const& l) { return l.p; },
            [](offspring::Geometric0 const& l) { return (1.0 - l.p) / l.p; },
            [](offspring::Binomial const& l) {
                return static_cast<double>(l.trials) * l.p;
            },
        },
        law);
}

/// log P(A = k) for a single offspring draw.
inline double offspring_log_pmf(OffspringFamily const& law, std::uint64_t k)
{
    return std::visit(
        Overloaded{
            [k](offspring::Poisson const& l) {
                return detail::log_poisson_pmf(l.rate, k);
            },
            [k](offspring::Bernoulli const& l) {
                return detail::log_binomial_pmf(1, l.p, k);
            },
            [k](offspring::Geometric0 const& l) {
                return detail::log_negbin_pmf(1, l.p, k);
            },
            [k](offspring::Binomial const& l) {
                return detail::log_binomial_pmf(l.trials, l.p, k);
            },
        },
        law);
}

/// log P(A_1 + ... + A_x = k) from the closed-form convolution family.
inline double
convolution_log_pmf(OffspringFamily const& law, std::uint64_t x, std::uint64_t k)
{
    if (x == 0)
        return k == 0 ? 0.0 : -INFINITY;
    return std::visit(
        Overloaded{
            [=](offspring::Poisson const& l) {
                return detail::log_poisson_pmf(static_cast<double>(x) * l.rate,
                                               k);
            },
            [=](offspring::Bernoulli const& l) {
                return detail::log_binomial_pmf(x, l.p, k);
            },
            [=](offspring::Geometric0 const& l) {
                return detail::log_negbin_pmf(x, l.p, k);
            },
            [=](offspring::Binomial const& l) {
                return detail::log_binomial_pmf(x * l.trials, l.p, k);
            },
        },
        law);
}

/// E[A^order] by series summation with a geometric tail bound <= tol.
inline double
offspring_moment(OffspringFamily const& law, double order, double tol = 1e-12)
{
    if (!(order > 0.0))
        throw InvalidParameter("moment order must be positive");

    // Bounded support: exact finite sum.
    std::uint64_t support_max = std::numeric_limits<std::uint64_t>::max();
    if (auto const* b = std::get_if<offspring::Bernoulli>(&law))
        return b->p;
    if (auto const* b = std::get_if<offspring::Binomial>(&law))
        support_max = b->trials;
    if (mean_offspring(law) == 0.0)
        return 0.0;

    // Ratio of consecutive terms t_{k+1}/t_k for the unbounded families; both
    // ratios are non-increasing in k, so once below one the remaining tail is
    // dominated by a geometric series.
    auto term_ratio = [&](std::uint64_t k) -> double {
        double const growth = std::pow(static_cast<double>(k + 1) / k, order);
        if (auto const* p = std::get_if<offspring::Poisson>(&law))
            return growth * p->rate / static_cast<double>(k + 1);
        if (auto const* g = std::get_if<offspring::Geometric0>(&law))
            return growth * (1.0 - g->p);
        return 0.0;
    };

    double sum = 0.0;
    for (std::uint64_t k = 1; k <= support_max; ++k)
    {
        double const term = std::exp(order * std::log(static_cast<double>(k))
                                     + offspring_log_pmf(law, k));
        sum += term;
        if (support_max != std::numeric_limits<std::uint64_t>::max())
            continue;
        double const ratio = term_ratio(k);
        if (ratio < 1.0 && term * ratio / (1.0 - ratio) <= tol)
            break;
        if (k > (std::uint64_t{1} << 32))
            throw SeriesDivergence("offspring moment series did not converge");
    }
    return sum;
}

//---------------------------------------------------------------------------//
// Immigration law operations
//---------------------------------------------------------------------------//

inline void validate(ImmigrationFamily const& law)
{
    std::visit(
        Overloaded{
            [](immigration::DiscretePareto const& l) {
                if (!(l.kappa > 0.0 && std::isfinite(l.kappa)))
                    throw InvalidParameter("pareto kappa must be > 0");
                if (!(l.c > 0.0 && l.c <= 1.0e300))
                    throw InvalidParameter("pareto prefactor c must be > 0");
                if (!(l.beta >= 0.0))
                    throw InvalidParameter("pareto beta must be >= 0");
            },
            [](immigration::Bernoulli const& l) {
                if (!detail::is_probability(l.q))
                    throw InvalidParameter("bernoulli q must lie in [0, 1]");
            },
            [](immigration::Constant const&) {},
            [](immigration::Geometric0 const& l) {
                if (!(l.p > 0.0 && l.p <= 1.0))
                    throw InvalidParameter("geometric0 p must lie in (0, 1]");
            },
        },
        law);
}

/// Survival function P(B > x), evaluated at real x >= 0.
inline double survival(ImmigrationFamily const& law, double x)
{
    return std::visit(
        Overloaded{
            [x](immigration::DiscretePareto const& l) {
                double s = l.c * std::pow(1.0 + x, -l.kappa);
                if (l.beta != 0.0)
                    s *= std::pow(std::log(M_E + x), l.beta);
                return std::min(1.0, s);
            },
            [x](immigration::Bernoulli const& l) {
                return x < 1.0 ? l.q : 0.0;
            },
            [x](immigration::Constant const& l) {
                return x < static_cast<double>(l.b) ? 1.0 : 0.0;
            },
            [x](immigration::Geometric0 const& l) {
                return std::pow(1.0 - l.p, std::floor(x) + 1.0);
            },
        },
        law);
}

inline double survival(ImmigrationFamily const& law, std::uint64_t x)
{
    return survival(law, static_cast<double>(x));
}

/// P(B = k) recovered from the survival function.
inline double immigration_pmf(ImmigrationFamily const& law, std::uint64_t k)
{
    if (auto const* c = std::get_if<immigration::Constant>(&law))
        return k == c->b ? 1.0 : 0.0;
    double const upper = k == 0 ? 1.0 : survival(law, k - 1);
    return upper - survival(law, k);
}

/*!
 * Smallest integer x >= 0 with S(x) <= level.
 *
 * This is inversion sampling when level is a uniform variate, and the
 * survival-level quantile used to place tail thresholds otherwise.
 */
inline std::uint64_t
survival_quantile(ImmigrationFamily const& law, double level)
{
    constexpr std::uint64_t limit = std::uint64_t{1} << 63;
    return std::visit(
        Overloaded{
            [&](immigration::DiscretePareto const& l) -> std::uint64_t {
                auto s = [&](std::uint64_t x) { return survival(law, x); };
                if (s(0) <= level)
                    return 0;
                std::uint64_t x = 0;
                if (l.beta == 0.0)
                {
                    double const guess
                        = std::ceil(std::pow(l.c / level, 1.0 / l.kappa) - 1.0);
                    if (!(guess < static_cast<double>(limit)))
                        throw Overflow("immigration draw exceeds 2^63");
                    x = guess > 0.0 ? static_cast<std::uint64_t>(guess) : 0;
                    // Repair rounding in the closed form.
                    while (x > 0 && s(x - 1) <= level)
                        --x;
                    while (s(x) > level)
                        ++x;
                    return x;
                }
                // Slowly varying factor: bracket, then bisect.
                std::uint64_t lo = 0, hi = 1;
                while (s(hi) > level)
                {
                    lo = hi;
                    if (hi >= limit)
                        throw Overflow("immigration draw exceeds 2^63");
                    hi *= 2;
                }
                while (hi - lo > 1)
                {
                    std::uint64_t const mid = lo + (hi - lo) / 2;
                    (s(mid) > level ? lo : hi) = mid;
                }
                return hi;
            },
            [&](immigration::Bernoulli const& l) -> std::uint64_t {
                return l.q > level ? 1 : 0;
            },
            [&](immigration::Constant const& l) -> std::uint64_t {
                return level < 1.0 ? l.b : 0;
            },
            [&](immigration::Geometric0 const& l) -> std::uint64_t {
                if (l.p == 1.0 || level >= 1.0 - l.p)
                    return 0;
                double x = std::ceil(std::log(level) / std::log1p(-l.p)) - 1.0;
                if (!(x < static_cast<double>(limit)))
                    throw Overflow("immigration draw exceeds 2^63");
                auto k = static_cast<std::uint64_t>(std::max(0.0, x));
                while (k > 0 && survival(law, k - 1) <= level)
                    --k;
                while (survival(law, k) > level)
                    ++k;
                return k;
            },
        },
        law);
}

//---------------------------------------------------------------------------//
// Human-readable forms, matching the config syntax.
//---------------------------------------------------------------------------//
namespace detail
{
inline std::string fmt_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

inline std::string to_string(OffspringFamily const& law)
{
    using detail::fmt_real;
    return std::visit(
        Overloaded{
            [](offspring::Poisson const& l) {
                return "poisson(" + fmt_real(l.rate) + ")";
            },
            [](offspring::Bernoulli const& l) {
                return "bernoulli(" + fmt_real(l.p) + ")";
            },
            [](offspring::Geometric0 const& l) {
                return "geometric0(" + fmt_real(l.p) + ")";
            },
            [](offspring::Binomial const& l) {
                return "binomial(" + std::to_string(l.trials) + ", "
                       + fmt_real(l.p) + ")";
            },
        },
        law);
}

inline std::string to_string(ImmigrationFamily const& law)
{
    using detail::fmt_real;
    return std::visit(
        Overloaded{
            [](immigration::DiscretePareto const& l) {
                return "discrete_pareto(" + fmt_real(l.kappa) + ", "
                       + fmt_real(l.c) + ", " + fmt_real(l.beta) + ")";
            },
            [](immigration::Bernoulli const& l) {
                return "bernoulli(" + fmt_real(l.q) + ")";
            },
            [](immigration::Constant const& l) {
                return "constant(" + std::to_string(l.b) + ")";
            },
            [](immigration::Geometric0 const& l) {
                return "geometric0(" + fmt_real(l.p) + ")";
            },
        },
        law);
}

}  // namespace bpire
