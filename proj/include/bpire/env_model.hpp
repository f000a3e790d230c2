// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/env_model.hpp
//! Random environment law, its moment functionals, and condition checks.
//---------------------------------------------------------------------------//
#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "laws.hpp"
#include "rng.hpp"

namespace bpire
{
//---------------------------------------------------------------------------//
// Types
//---------------------------------------------------------------------------//

/// One environment atom: a coupled (offspring, immigration) pair with weight.
struct Atom
{
    double weight;
    OffspringFamily offspring;
    ImmigrationFamily immigration;
};

/// Poisson offspring with rate ~ Uniform(lo, hi), immigration law fixed.
struct UniformPoissonRate
{
    double lo;
    double hi;
    ImmigrationFamily immigration;
};

/// A realized environment xi_n.
struct EnvDraw
{
    OffspringFamily offspring;
    ImmigrationFamily immigration;
};

/*!
 * Distribution of the environment xi over pairs of laws.
 *
 * Either a finite mixture of atoms or a continuous Poisson-rate family.
 * Immutable after construction.
 */
class EnvSpec
{
  public:
    static EnvSpec atomic(std::vector<Atom> atoms)
    {
        if (atoms.empty())
            throw InvalidParameter("environment needs at least one atom");
        double total = 0.0;
        for (auto const& atom : atoms)
        {
            if (!(atom.weight > 0.0))
                throw InvalidParameter("atom weights must be positive");
            validate(atom.offspring);
            validate(atom.immigration);
            total += atom.weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw InvalidParameter("atom weights must sum to 1");

        EnvSpec env;
        env.cumulative_.reserve(atoms.size());
        double running = 0.0;
        for (auto const& atom : atoms)
        {
            running += atom.weight;
            env.cumulative_.push_back(running);
        }
        env.cumulative_.back() = 1.0;
        env.kind_ = std::move(atoms);
        return env;
    }

    static EnvSpec
    uniform_poisson_rate(double lo, double hi, ImmigrationFamily immigration)
    {
        if (!(lo >= 0.0 && hi >= lo && std::isfinite(hi)))
            throw InvalidParameter("uniform rate range must satisfy 0<=lo<=hi");
        validate(immigration);
        EnvSpec env;
        env.kind_ = UniformPoissonRate{lo, hi, std::move(immigration)};
        return env;
    }

    bool is_atomic() const noexcept
    {
        return std::holds_alternative<std::vector<Atom>>(kind_);
    }
    std::span<Atom const> atoms() const
    {
        return std::get<std::vector<Atom>>(kind_);
    }
    UniformPoissonRate const& continuous() const
    {
        return std::get<UniformPoissonRate>(kind_);
    }

    /// Atom index for a uniform variate u in (0, 1).
    std::size_t atom_index(double u) const noexcept
    {
        std::size_t j = 0;
        while (j + 1 < cumulative_.size() && !(u < cumulative_[j]))
            ++j;
        return j;
    }

  private:
    EnvSpec() = default;

    std::variant<std::vector<Atom>, UniformPoissonRate> kind_;
    std::vector<double> cumulative_;
};

/// Environment plus the exponents kappa and delta of the standing assumption.
struct ModelSpec
{
    EnvSpec env;
    double kappa;
    double delta;
};

struct ConditionReport
{
    double kappa_moment;  //!< E m(xi)^kappa
    double log_mean;      //!< E log m(xi)
    double moment_A;      //!< E A^{max(1,kappa)+delta}
    bool subcritical;
    bool pass;
};

//---------------------------------------------------------------------------//
// Quadrature
//---------------------------------------------------------------------------//
namespace detail
{
template<class F>
double simpson_recurse(F const& f,
                       double a,
                       double b,
                       double fa,
                       double fm,
                       double fb,
                       double whole,
                       double tol,
                       int depth)
{
    double const m = 0.5 * (a + b);
    double const lm = 0.5 * (a + m);
    double const rm = 0.5 * (m + b);
    double const flm = f(lm);
    double const frm = f(rm);
    double const left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double const right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double const delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw QuadratureFailure("adaptive Simpson hit the bisection cap");
    return simpson_recurse(f, a, m, fa, flm, fm, left, tol / 2, depth - 1)
           + simpson_recurse(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature to absolute error tol, at most max_depth
/// bisection levels.
template<class F>
double integrate(F const& f, double a, double b, double tol, int max_depth = 60)
{
    if (a == b)
        return 0.0;
    double const fa = f(a);
    double const fb = f(b);
    double const fm = f(0.5 * (a + b));
    double const whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

//---------------------------------------------------------------------------//
// Moment functionals
//---------------------------------------------------------------------------//

/// E m(xi)^kappa.
inline double kappa_moment(EnvSpec const& env, double kappa, double tol = 1e-10)
{
    if (!(kappa >= 0.0))
        throw InvalidParameter("kappa must be non-negative");
    if (env.is_atomic())
    {
        double sum = 0.0;
        for (auto const& atom : env.atoms())
            sum += atom.weight * std::pow(mean_offspring(atom.offspring), kappa);
        return sum;
    }
    auto const& c = env.continuous();
    if (c.lo == c.hi)
        return std::pow(c.lo, kappa);
    double const width = c.hi - c.lo;
    return integrate(
        [&](double rate) { return std::pow(rate, kappa) / width; },
        c.lo,
        c.hi,
        tol);
}

/// E log m(xi); -inf when some atom has zero mean.
inline double log_mean(EnvSpec const& env)
{
    if (env.is_atomic())
    {
        double sum = 0.0;
        for (auto const& atom : env.atoms())
            sum += atom.weight * std::log(mean_offspring(atom.offspring));
        return sum;
    }
    auto const& c = env.continuous();
    if (c.lo == c.hi)
        return std::log(c.lo);
    auto antiderivative = [](double v) {
        return v > 0.0 ? v * std::log(v) - v : 0.0;
    };
    return (antiderivative(c.hi) - antiderivative(c.lo)) / (c.hi - c.lo);
}

/// E A^order, averaged over the environment.
inline double moment_A(EnvSpec const& env, double order, double tol = 1e-10)
{
    if (!(order >= 1.0))
        throw InvalidParameter("moment order must be >= 1");
    if (env.is_atomic())
    {
        double sum = 0.0;
        for (auto const& atom : env.atoms())
            sum += atom.weight * offspring_moment(atom.offspring, order, tol);
        return sum;
    }
    auto const& c = env.continuous();
    auto conditional = [&](double rate) {
        return offspring_moment(offspring::Poisson{rate}, order, tol * 1e-3);
    };
    if (c.lo == c.hi)
        return conditional(c.lo);
    double const width = c.hi - c.lo;
    return integrate(
        [&](double rate) { return conditional(rate) / width; },
        c.lo,
        c.hi,
        tol);
}

inline ConditionReport check_conditions(ModelSpec const& model)
{
    if (!(model.kappa > 0.0) || !(model.delta > 0.0))
        throw InvalidParameter("kappa and delta must be positive");
    ConditionReport report{};
    report.kappa_moment = kappa_moment(model.env, model.kappa);
    report.log_mean = log_mean(model.env);
    report.moment_A
        = moment_A(model.env, std::max(1.0, model.kappa) + model.delta);
    report.subcritical = report.log_mean < 0.0;
    report.pass = report.kappa_moment < 1.0 && std::isfinite(report.moment_A);
    return report;
}

//---------------------------------------------------------------------------//
// Sampling and marginals
//---------------------------------------------------------------------------//

/// Draw xi; consumes exactly one uniform variate.
inline EnvDraw sample_environment(EnvSpec const& env, Rng& rng)
{
    double const u = rng.uniform01();
    if (env.is_atomic())
    {
        auto const& atom = env.atoms()[env.atom_index(u)];
        return {atom.offspring, atom.immigration};
    }
    auto const& c = env.continuous();
    return {offspring::Poisson{c.lo + (c.hi - c.lo) * u}, c.immigration};
}

/// Survival of the marginal immigration B (mixture over the environment).
inline double marginal_immigration_survival(EnvSpec const& env, double x)
{
    if (!env.is_atomic())
        return survival(env.continuous().immigration, x);
    double sum = 0.0;
    for (auto const& atom : env.atoms())
        sum += atom.weight * survival(atom.immigration, x);
    return sum;
}

/// The immigration law when every environment state shares it.
inline std::optional<ImmigrationFamily> common_immigration(EnvSpec const& env)
{
    if (!env.is_atomic())
        return env.continuous().immigration;
    auto const atoms = env.atoms();
    for (auto const& atom : atoms)
    {
        if (!(atom.immigration == atoms.front().immigration))
            return std::nullopt;
    }
    return atoms.front().immigration;
}

}  // namespace bpire
