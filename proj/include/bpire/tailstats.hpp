// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/tailstats.hpp
//! Finite-sample tail statistics: empirical survival, tail ratios against an
//! exact reference, Hill estimation, geometric decay fits, and the two-sample
//! distances used to compare samplers.
//---------------------------------------------------------------------------//
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"

namespace bpire
{
//---------------------------------------------------------------------------//
// Types
//---------------------------------------------------------------------------//

struct TailReport
{
    std::vector<double> x_grid;
    std::vector<double> survival;
    std::vector<double> se;
    std::vector<double> ratio;     //!< empty unless a reference was given
    std::vector<double> ratio_se;  //!< empty unless a reference was given
    std::uint64_t n = 0;
};

struct HillEstimate
{
    double kappa_hat;
    double ci95;
};

struct HillReport
{
    std::vector<std::size_t> k_grid;
    std::vector<double> estimate;
    std::vector<double> ci95;
};

struct GeometricFit
{
    double rho_hat;
    double r2;
    double intercept;  //!< ln c in v_n ~ c rho^n
};

using SurvivalFn = std::function<double(double)>;

//---------------------------------------------------------------------------//
// Survival and tail ratios
//---------------------------------------------------------------------------//

/// Survival report from exceedance counts #{s > x_j} out of n.
inline TailReport tail_from_counts(std::span<std::uint64_t const> counts,
                                   std::uint64_t n,
                                   std::span<double const> x_grid)
{
    if (n == 0)
        throw EmptyInput("no samples");
    TailReport report;
    report.n = n;
    report.x_grid.assign(x_grid.begin(), x_grid.end());
    double const nd = static_cast<double>(n);
    for (auto count : counts)
    {
        double const p = static_cast<double>(count) / nd;
        report.survival.push_back(p);
        report.se.push_back(std::sqrt(p * (1.0 - p) / nd));
    }
    return report;
}

/// Empirical P(S > x_j) on ascending samples, by binary search.
template<class T>
TailReport empirical_tail(std::span<T const> sorted, std::span<double const> x_grid)
{
    if (sorted.empty())
        throw EmptyInput("no samples");
    if (!std::is_sorted(x_grid.begin(), x_grid.end()))
        throw InvalidParameter("threshold grid must be increasing");
    std::vector<std::uint64_t> counts;
    counts.reserve(x_grid.size());
    for (double x : x_grid)
    {
        auto it = std::upper_bound(
            sorted.begin(), sorted.end(), x, [](double lhs, T const& rhs) {
                return lhs < static_cast<double>(rhs);
            });
        counts.push_back(static_cast<std::uint64_t>(sorted.end() - it));
    }
    return tail_from_counts(counts, sorted.size(), x_grid);
}

/// Divide an empirical survival by the exact reference survival.
inline TailReport with_reference(TailReport report, SurvivalFn const& reference)
{
    report.ratio.clear();
    report.ratio_se.clear();
    for (std::size_t j = 0; j < report.x_grid.size(); ++j)
    {
        double const ref = reference(report.x_grid[j]);
        if (!(ref > 0.0) || !std::isnormal(ref))
            throw ReferenceVanishes("reference survival vanishes at x = "
                                    + std::to_string(report.x_grid[j]));
        report.ratio.push_back(report.survival[j] / ref);
        report.ratio_se.push_back(report.se[j] / ref);
    }
    return report;
}

template<class T>
TailReport tail_ratio(std::span<T const> sorted,
                      SurvivalFn const& reference,
                      std::span<double const> x_grid)
{
    return with_reference(empirical_tail(sorted, x_grid), reference);
}

/// Smallest integer x >= 0 with reference(x) <= level.
inline std::uint64_t survival_threshold(SurvivalFn const& reference, double level)
{
    if (reference(0.0) <= level)
        return 0;
    std::uint64_t lo = 0, hi = 1;
    while (reference(static_cast<double>(hi)) > level)
    {
        lo = hi;
        if (hi >= (std::uint64_t{1} << 62))
            throw Overflow("survival level below reference range");
        hi *= 2;
    }
    while (hi - lo > 1)
    {
        std::uint64_t const mid = lo + (hi - lo) / 2;
        (reference(static_cast<double>(mid)) > level ? lo : hi) = mid;
    }
    return hi;
}

//---------------------------------------------------------------------------//
// Hill estimator
//---------------------------------------------------------------------------//

/// floor(n^{2/3}), exact for integer n.
inline std::size_t default_hill_k(std::size_t n)
{
    auto k = static_cast<std::size_t>(std::pow(static_cast<double>(n), 2.0 / 3));
    using Wide = unsigned __int128;
    Wide const n2 = static_cast<Wide>(n) * n;
    while (k > 0 && static_cast<Wide>(k) * k * k > n2)
        --k;
    while (static_cast<Wide>(k + 1) * (k + 1) * (k + 1) <= n2)
        ++k;
    return k;
}

/*!
 * Hill estimator of the tail index from the top-k order statistics.
 *
 * Integer samples are shifted by +0.5 first so that ties at small values do
 * not produce log(0) terms.
 */
template<class T>
HillEstimate hill_estimate(std::span<T const> sorted, std::size_t k)
{
    std::size_t const n = sorted.size();
    if (k < 2 || k >= n)
        throw InvalidParameter("Hill estimator needs 2 <= k < n");
    double const shift = std::is_integral_v<T> ? 0.5 : 0.0;
    T const& threshold_value = sorted[n - 1 - k];
    if (threshold_value == sorted[n - 1])
        throw DegenerateOrderStats("top order statistics are all equal");
    double const threshold = static_cast<double>(threshold_value) + shift;
    if (!(threshold > 0.0))
        throw NonPositiveValue("Hill threshold order statistic must be > 0");
    double log_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        log_sum += std::log((static_cast<double>(sorted[n - 1 - i]) + shift)
                            / threshold);
    double const kappa_hat = static_cast<double>(k) / log_sum;
    return {kappa_hat, 1.96 * kappa_hat / std::sqrt(static_cast<double>(k))};
}

/// Hill plot over a log-spaced k grid up to n / 2, always including k_extra.
template<class T>
HillReport hill_plot(std::span<T const> sorted, std::size_t k_extra = 0)
{
    std::size_t const n = sorted.size();
    std::vector<std::size_t> ks;
    for (double k = 10.0; k < static_cast<double>(n) / 2; k *= 1.25)
        ks.push_back(static_cast<std::size_t>(k));
    if (k_extra >= 2 && k_extra < n)
        ks.push_back(k_extra);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    HillReport report;
    for (auto k : ks)
    {
        try
        {
            auto const est = hill_estimate(sorted, k);
            report.k_grid.push_back(k);
            report.estimate.push_back(est.kappa_hat);
            report.ci95.push_back(est.ci95);
        }
        catch (DegenerateOrderStats const&)
        {
            // Ties at the top: no estimate at this k.
        }
    }
    return report;
}

//---------------------------------------------------------------------------//
// Geometric decay
//---------------------------------------------------------------------------//

/// Least-squares fit of ln v_n = a + n ln rho.
inline GeometricFit
fit_geometric_decay(std::span<std::pair<double, double> const> points)
{
    if (points.size() < 3)
        throw InvalidParameter("geometric fit needs at least 3 points");
    double sx = 0, sy = 0;
    for (auto const& [n, v] : points)
    {
        if (!(v > 0.0))
            throw NonPositiveValue("geometric fit needs positive values");
        sx += n;
        sy += std::log(v);
    }
    double const count = static_cast<double>(points.size());
    double const mx = sx / count, my = sy / count;
    double sxx = 0, sxy = 0, syy = 0;
    for (auto const& [n, v] : points)
    {
        double const dx = n - mx, dy = std::log(v) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0)
        throw InvalidParameter("geometric fit needs distinct n");
    double const slope = sxy / sxx;
    double const intercept = my - slope * mx;
    double ss_res = 0;
    for (auto const& [n, v] : points)
    {
        double const r = std::log(v) - (intercept + slope * n);
        ss_res += r * r;
    }
    double const r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return {std::exp(slope), r2, intercept};
}

//---------------------------------------------------------------------------//
// Distribution comparisons
//---------------------------------------------------------------------------//

/// Two-sample Kolmogorov-Smirnov statistic on ascending samples.
template<class T>
double ks_statistic(std::span<T const> a, std::span<T const> b)
{
    if (a.empty() || b.empty())
        throw EmptyInput("KS needs two non-empty samples");
    double const na = static_cast<double>(a.size());
    double const nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size())
    {
        T const v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v)
            ++i;
        while (j < b.size() && b[j] == v)
            ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

/// Asymptotic two-sample KS rejection threshold at significance alpha.
inline double ks_critical_value(std::size_t n, std::size_t m, double alpha)
{
    double const c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    double const nd = static_cast<double>(n), md = static_cast<double>(m);
    return c * std::sqrt((nd + md) / (nd * md));
}

/// Relative frequencies of 0..states-1; mass at or above `states` is dropped.
inline std::vector<double>
empirical_pmf(std::span<std::uint64_t const> samples, std::size_t states)
{
    if (samples.empty())
        throw EmptyInput("no samples");
    std::vector<double> pmf(states, 0.0);
    for (auto s : samples)
    {
        if (s < states)
            pmf[s] += 1.0;
    }
    for (auto& p : pmf)
        p /= static_cast<double>(samples.size());
    return pmf;
}

/// Half the l1 distance; the shorter pmf is zero-padded.
inline double total_variation(std::span<double const> p, std::span<double const> q)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < std::max(p.size(), q.size()); ++i)
    {
        double const a = i < p.size() ? p[i] : 0.0;
        double const b = i < q.size() ? q[i] : 0.0;
        sum += std::abs(a - b);
    }
    return 0.5 * sum;
}

struct ChiSquareResult
{
    double statistic;
    int dof;
    double p_value;
};

/*!
 * Chi-square test of homogeneity between two integer samples.
 *
 * Adjacent values are pooled (in increasing order) until each bin expects at
 * least five observations from both samples.
 */
inline ChiSquareResult chi_square_homogeneity(std::span<std::uint64_t const> a,
                                              std::span<std::uint64_t const> b)
{
    if (a.empty() || b.empty())
        throw EmptyInput("chi-square needs two non-empty samples");
    std::map<std::uint64_t, std::pair<double, double>> freq;
    for (auto v : a)
        freq[v].first += 1;
    for (auto v : b)
        freq[v].second += 1;

    double const na = static_cast<double>(a.size());
    double const nb = static_cast<double>(b.size());
    double const share_a = na / (na + nb), share_b = nb / (na + nb);
    auto small = [&](std::pair<double, double> const& bin) {
        double const total = bin.first + bin.second;
        return total * share_a < 5.0 || total * share_b < 5.0;
    };

    std::vector<std::pair<double, double>> bins;
    std::pair<double, double> open{0, 0};
    for (auto const& [value, counts] : freq)
    {
        open.first += counts.first;
        open.second += counts.second;
        if (!small(open))
        {
            bins.push_back(open);
            open = {0, 0};
        }
    }
    if (open.first + open.second > 0)
    {
        if (bins.empty())
            bins.push_back(open);
        else
        {
            bins.back().first += open.first;
            bins.back().second += open.second;
        }
    }
    if (bins.size() < 2)
        return {0.0, 0, 1.0};

    double stat = 0.0;
    for (auto const& [oa, ob] : bins)
    {
        double const total = oa + ob;
        double const ea = total * share_a, eb = total * share_b;
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    int const dof = static_cast<int>(bins.size()) - 1;
    return {stat, dof, boost::math::gamma_q(dof / 2.0, stat / 2.0)};
}

}  // namespace bpire
