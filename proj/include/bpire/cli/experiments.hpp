// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/cli/experiments.hpp
//! Named experiments: sample, summarize, compare against the theory value.
//---------------------------------------------------------------------------//
#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "../dump.hpp"
#include "../env_model.hpp"
#include "../oracle.hpp"
#include "../parallel.hpp"
#include "../simulator.hpp"
#include "../sre_compare.hpp"
#include "../tailstats.hpp"
#include "config.hpp"

namespace bpire::cli
{
//---------------------------------------------------------------------------//
// Report types
//---------------------------------------------------------------------------//

enum class Check
{
    relative,  //!< |estimate / theory - 1| <= tolerance
    absolute,  //!< |estimate - theory| <= tolerance
    below,     //!< estimate < theory
    at_least,  //!< estimate >= theory
};

struct Metric
{
    std::string name;
    double estimate;
    double theory;
    double tolerance;
    Check check;
    bool pass;
};

inline Metric
make_metric(std::string name, double estimate, double theory, double tol, Check check)
{
    bool pass = false;
    switch (check)
    {
        case Check::relative:
            pass = std::abs(estimate / theory - 1.0) <= tol;
            break;
        case Check::absolute:
            pass = std::abs(estimate - theory) <= tol;
            break;
        case Check::below:
            pass = estimate < theory;
            break;
        case Check::at_least:
            pass = estimate >= theory;
            break;
    }
    if (!std::isfinite(estimate))
        pass = pass && check == Check::below && std::isinf(theory);
    return {std::move(name), estimate, theory, tol, check, pass};
}

struct CsvTable
{
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct RunReport
{
    Experiment experiment{};
    std::uint64_t seed{};
    nlohmann::json config{};
    double wall_ms = 0.0;
    bool hypothesis_ok = true;
    std::vector<Metric> metrics{};
    nlohmann::json summary = nlohmann::json::object();
    std::vector<CsvTable> tables{};
    std::vector<std::uint64_t> count_samples{};  //!< kept for dumps
    std::vector<double> real_samples{};          //!< kept for dumps

    bool pass() const
    {
        if (!hypothesis_ok)
            return false;
        for (auto const& m : metrics)
        {
            if (!m.pass)
                return false;
        }
        return true;
    }
};

//---------------------------------------------------------------------------//
// JSON
//---------------------------------------------------------------------------//

namespace detail
{
// JSON has no infinities; they serialize as null.
inline nlohmann::json real(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline char const* check_name(Check c)
{
    switch (c)
    {
        case Check::relative:
            return "relative";
        case Check::absolute:
            return "absolute";
        case Check::below:
            return "below";
        case Check::at_least:
            return "at_least";
    }
    return "";
}
}  // namespace detail

inline nlohmann::json to_json(ConditionReport const& r)
{
    return {{"kappa_moment", detail::real(r.kappa_moment)},
            {"log_mean", detail::real(r.log_mean)},
            {"moment_A", detail::real(r.moment_A)},
            {"subcritical", r.subcritical},
            {"pass", r.pass}};
}

/// Echo of everything that determines the numeric output.
inline nlohmann::json to_json(ExperimentConfig const& cfg)
{
    nlohmann::json env;
    if (cfg.model.env.is_atomic())
    {
        env["atoms"] = nlohmann::json::array();
        for (auto const& atom : cfg.model.env.atoms())
        {
            env["atoms"].push_back({{"weight", atom.weight},
                                    {"offspring", bpire::to_string(atom.offspring)},
                                    {"immigration", bpire::to_string(atom.immigration)}});
        }
    }
    else
    {
        auto const& c = cfg.model.env.continuous();
        env["uniform_poisson_rate"] = {{"lo", c.lo},
                                       {"hi", c.hi},
                                       {"immigration", bpire::to_string(c.immigration)}};
    }
    nlohmann::json j{{"experiment", std::string(to_string(cfg.experiment))},
                     {"kappa", cfg.model.kappa},
                     {"delta", cfg.model.delta},
                     {"env", env},
                     {"replicas", cfg.replicas},
                     {"seed", cfg.seed},
                     {"epsilon_trunc", cfg.epsilon_trunc},
                     {"grid", cfg.grid},
                     {"check_levels", cfg.check_levels},
                     {"tolerance", cfg.tolerance}};
    switch (cfg.experiment)
    {
        case Experiment::lemma1:
            if (cfg.b_law)
                j["b_law"] = bpire::to_string(*cfg.b_law);
            break;
        case Experiment::grey:
            if (cfg.n_law)
                j["n_law"] = bpire::to_string(*cfg.n_law);
            break;
        case Experiment::corollary:
            j["max_i"] = cfg.corollary_max_i;
            j["level"] = cfg.corollary_level;
            j["r2_min"] = cfg.r2_min;
            break;
        case Experiment::decay:
            j["alpha"] = cfg.decay_alpha;
            j["max_n"] = cfg.decay_max_n;
            break;
        case Experiment::sre:
            j["gap_max_i"] = cfg.gap_max_i;
            j["gap_replicas"] = cfg.gap_replicas;
            break;
        case Experiment::oracle:
            j["n_max"] = cfg.oracle_n_max;
            j["oracle_tol"] = cfg.oracle_tol;
            j["max_iter"] = cfg.oracle_max_iter;
            break;
        case Experiment::hill:
        case Experiment::theorem:
            j["hill_k"] = cfg.hill_k;
            break;
        default:
            break;
    }
    return j;
}

inline nlohmann::json to_json(RunReport const& report)
{
    nlohmann::json metrics = nlohmann::json::array();
    for (auto const& m : report.metrics)
    {
        metrics.push_back({{"name", m.name},
                           {"estimate", detail::real(m.estimate)},
                           {"theory", detail::real(m.theory)},
                           {"tolerance", detail::real(m.tolerance)},
                           {"check", detail::check_name(m.check)},
                           {"pass", m.pass}});
    }
    return {{"experiment", std::string(to_string(report.experiment))},
            {"seed", report.seed},
            {"pass", report.pass()},
            {"hypothesis_ok", report.hypothesis_ok},
            {"metrics", metrics},
            {"summary", report.summary},
            {"config", report.config},
            {"wall_ms", report.wall_ms}};
}

//---------------------------------------------------------------------------//
// Experiments
//---------------------------------------------------------------------------//

namespace detail
{
inline std::string level_tag(double level)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", level);
    return buf;
}

struct TailSetup
{
    SurvivalFn reference;
    std::vector<double> x;        //!< thresholds for cfg.grid
    std::vector<double> check_x;  //!< thresholds for cfg.check_levels
};

inline TailSetup tail_setup(ExperimentConfig const& cfg, SurvivalFn reference)
{
    TailSetup setup{std::move(reference), {}, {}};
    auto thresholds = [&](std::vector<double> const& levels) {
        std::vector<double> xs;
        for (double level : levels)
            xs.push_back(static_cast<double>(
                survival_threshold(setup.reference, level)));
        return xs;
    };
    setup.x = thresholds(cfg.grid);
    setup.check_x = thresholds(cfg.check_levels);
    return setup;
}

inline SurvivalFn marginal_reference(EnvSpec const& env)
{
    return [&env](double x) { return marginal_immigration_survival(env, x); };
}

inline CsvTable ratio_table(TailReport const& t, std::string file = "ratio.csv")
{
    CsvTable table{std::move(file), {"x", "survival", "se", "ratio", "ratio_se"}, {}};
    for (std::size_t j = 0; j < t.x_grid.size(); ++j)
        table.rows.push_back(
            {t.x_grid[j], t.survival[j], t.se[j], t.ratio[j], t.ratio_se[j]});
    return table;
}

inline CsvTable hill_table(HillReport const& h)
{
    CsvTable table{"hill.csv", {"k", "kappa_hat", "ci95"}, {}};
    for (std::size_t j = 0; j < h.k_grid.size(); ++j)
        table.rows.push_back(
            {static_cast<double>(h.k_grid[j]), h.estimate[j], h.ci95[j]});
    return table;
}

inline nlohmann::json unreliable_levels(std::vector<double> const& levels,
                                        std::uint64_t n)
{
    nlohmann::json out = nlohmann::json::array();
    double const floor = 1.0 / std::sqrt(static_cast<double>(n));
    for (double level : levels)
    {
        if (level < floor)
            out.push_back(level);
    }
    return out;
}

// Ratio metrics at the check levels, from a tail report over check_x.
inline void add_ratio_metrics(RunReport& report,
                              ExperimentConfig const& cfg,
                              TailReport const& checked,
                              double theory)
{
    // Levels decrease, so check_x increases in the same order.
    for (std::size_t j = 0; j < cfg.check_levels.size(); ++j)
    {
        report.metrics.push_back(
            make_metric("ratio@" + level_tag(cfg.check_levels[j]),
                        checked.ratio[j],
                        theory,
                        cfg.tolerance,
                        Check::relative));
    }
}

struct BackwardSampler
{
    ModelSpec const* model;
    std::uint64_t truncation;
    std::vector<EnvDraw> scratch;

    Count operator()(Rng& rng)
    {
        return sample_stationary_backward(*model, truncation, rng, scratch).value;
    }
};

struct PerpetuitySampler
{
    ModelSpec const* model;
    std::uint64_t truncation;
    std::vector<EnvDraw> scratch;

    double operator()(Rng& rng)
    {
        return sample_perpetuity(*model, truncation, rng, scratch);
    }
};

inline void run_check(ExperimentConfig const&, RunReport& report,
                      ConditionReport const& cond)
{
    report.metrics.push_back(make_metric(
        "kappa_moment", cond.kappa_moment, 1.0, 0.0, Check::below));
    report.metrics.push_back(make_metric("moment_A",
                                         cond.moment_A,
                                         std::numeric_limits<double>::infinity(),
                                         0.0,
                                         Check::below));
}

inline void run_theorem(ExperimentConfig const& cfg, RunReport& report, double q)
{
    auto const& model = cfg.model;
    auto const truncation = choose_truncation(model, cfg.epsilon_trunc);
    auto const setup = tail_setup(cfg, marginal_reference(model.env));
    auto samples = collect_samples(cfg.replicas,
                                   cfg.workers,
                                   Rng(cfg.seed),
                                   BackwardSampler{&model, truncation, {}});
    std::span<Count const> view(samples);

    auto const grid = tail_ratio(view, setup.reference, setup.x);
    auto const checked = tail_ratio(view, setup.reference, setup.check_x);
    double const theory = 1.0 / (1.0 - q);
    add_ratio_metrics(report, cfg, checked, theory);

    std::size_t const k = cfg.hill_k ? cfg.hill_k : default_hill_k(view.size());
    auto const hill = hill_estimate(view, k);
    report.tables.push_back(ratio_table(grid));
    report.tables.push_back(hill_table(hill_plot(view, k)));
    report.summary = {{"constant_hat", checked.ratio.front()},
                      {"constant_theory", theory},
                      {"kappa_hat", hill.kappa_hat},
                      {"hill_k", k},
                      {"truncation", truncation},
                      {"unreliable_levels",
                       unreliable_levels(cfg.grid, cfg.replicas)}};
    report.count_samples = std::move(samples);
}

inline void run_lemma1(ExperimentConfig const& cfg, RunReport& report, double q)
{
    auto const& model = cfg.model;
    auto const b_law = cfg.b_law ? cfg.b_law : common_immigration(model.env);
    if (!b_law)
        throw ValidationError("b_law",
                              "atoms disagree on immigration; set [lemma1] "
                              "b_law");
    auto const setup = tail_setup(
        cfg, [law = *b_law](double x) { return survival(law, x); });
    auto sampler = [&](Rng& rng) { return random_sum_sample(model, *b_law, rng); };

    std::vector<double> all = setup.x;
    all.insert(all.end(), setup.check_x.begin(), setup.check_x.end());
    auto const counts = count_exceedances(
        cfg.replicas, cfg.workers, Rng(cfg.seed), std::span<double const>(all),
        sampler);
    std::span<std::uint64_t const> cspan(counts);
    auto const grid = with_reference(
        tail_from_counts(cspan.first(setup.x.size()), cfg.replicas, setup.x),
        setup.reference);
    auto const checked = with_reference(
        tail_from_counts(cspan.subspan(setup.x.size()), cfg.replicas,
                         setup.check_x),
        setup.reference);
    add_ratio_metrics(report, cfg, checked, q);
    report.tables.push_back(ratio_table(grid));
    report.summary = {{"constant_hat", checked.ratio.front()},
                      {"constant_theory", q},
                      {"unreliable_levels",
                       unreliable_levels(cfg.grid, cfg.replicas)}};
}

inline void run_grey(ExperimentConfig const& cfg, RunReport& report, double q)
{
    auto const& model = cfg.model;
    if (!cfg.n_law)
        throw ValidationError("n_law", "[grey] n_law is required");
    auto const b_common = common_immigration(model.env);
    auto const* n_par = std::get_if<immigration::DiscretePareto>(&*cfg.n_law);
    auto const* b_par
        = b_common ? std::get_if<immigration::DiscretePareto>(&*b_common)
                   : nullptr;
    if (!n_par || !b_par || n_par->kappa != b_par->kappa
        || n_par->beta != b_par->beta)
        throw ValidationError("n_law",
                              "grey needs discrete_pareto N and B with equal "
                              "kappa and beta");
    double const c_ratio = n_par->c / b_par->c;
    double const theory = 1.0 + c_ratio * q;

    auto const setup = tail_setup(cfg, marginal_reference(model.env));
    auto sampler = [&](Rng& rng) { return grey_sum_sample(model, *cfg.n_law, rng); };
    std::vector<double> all = setup.x;
    all.insert(all.end(), setup.check_x.begin(), setup.check_x.end());
    auto const counts = count_exceedances(
        cfg.replicas, cfg.workers, Rng(cfg.seed), std::span<double const>(all),
        sampler);
    std::span<std::uint64_t const> cspan(counts);
    auto const grid = with_reference(
        tail_from_counts(cspan.first(setup.x.size()), cfg.replicas, setup.x),
        setup.reference);
    auto const checked = with_reference(
        tail_from_counts(cspan.subspan(setup.x.size()), cfg.replicas,
                         setup.check_x),
        setup.reference);
    add_ratio_metrics(report, cfg, checked, theory);
    report.tables.push_back(ratio_table(grid));
    report.summary = {{"constant_hat", checked.ratio.front()},
                      {"constant_theory", theory},
                      {"C", c_ratio}};
}

inline void run_corollary(ExperimentConfig const& cfg, RunReport& report, double q)
{
    auto const& model = cfg.model;
    auto const reference = marginal_reference(model.env);
    double const x = static_cast<double>(
        survival_threshold(reference, cfg.corollary_level));
    double const ref = reference(x);
    double const threshold[] = {x};

    CsvTable table{"corollary.csv",
                   {"i", "x", "survival", "se", "ratio", "ratio_se", "theory"},
                   {}};
    std::vector<std::pair<double, double>> points;
    Rng const base(cfg.seed);
    for (std::uint64_t i = 0; i <= cfg.corollary_max_i; ++i)
    {
        auto sampler = [&](Rng& rng) {
            return composed_thinning_sample(model, i, rng);
        };
        auto const counts = count_exceedances(cfg.replicas,
                                              cfg.workers,
                                              base.substream(i),
                                              std::span<double const>(threshold),
                                              sampler);
        auto const tail = with_reference(
            tail_from_counts(counts, cfg.replicas, threshold),
            [&](double) { return ref; });
        double const theory = std::pow(q, static_cast<double>(i));
        table.rows.push_back({static_cast<double>(i), x, tail.survival[0],
                              tail.se[0], tail.ratio[0], tail.ratio_se[0],
                              theory});
        report.metrics.push_back(make_metric("ratio_i" + std::to_string(i),
                                             tail.ratio[0],
                                             theory,
                                             cfg.tolerance,
                                             Check::relative));
        if (tail.ratio[0] > 0.0)
            points.push_back({static_cast<double>(i), tail.ratio[0]});
    }
    auto const fit = fit_geometric_decay(points);
    report.metrics.push_back(
        make_metric("rho_hat", fit.rho_hat, q, cfg.tolerance, Check::relative));
    report.metrics.push_back(
        make_metric("r2", fit.r2, cfg.r2_min, 0.0, Check::at_least));
    report.tables.push_back(std::move(table));
    report.summary = {{"x", x},
                      {"rho_hat", fit.rho_hat},
                      {"rho_theory", q},
                      {"r2", fit.r2}};
}

inline void run_decay(ExperimentConfig const& cfg, RunReport& report)
{
    auto const& model = cfg.model;
    std::uint64_t const max_n = cfg.decay_max_n;
    double const alpha = cfg.decay_alpha;
    Rng const master(cfg.seed);

    struct Moments
    {
        std::vector<double> sum, sum_sq;
    };
    auto chunks = map_chunks(
        cfg.replicas, cfg.workers, [&](std::uint64_t first, std::uint64_t last) {
            Moments m{std::vector<double>(max_n + 1, 0.0),
                      std::vector<double>(max_n + 1, 0.0)};
            for (std::uint64_t r = first; r < last; ++r)
            {
                Rng rng = master.split(r);
                // Z_n = Theta_{n-1} o 1 with iid environments.
                Count z = 1;
                for (std::uint64_t n = 1; n <= max_n && z != 0; ++n)
                {
                    z = thin(sample_environment(model.env, rng).offspring, z, rng);
                    double const v = std::pow(static_cast<double>(z), alpha);
                    m.sum[n] += v;
                    m.sum_sq[n] += v * v;
                }
            }
            return m;
        });
    std::vector<double> sum(max_n + 1, 0.0), sum_sq(max_n + 1, 0.0);
    for (auto const& part : chunks)
    {
        for (std::uint64_t n = 1; n <= max_n; ++n)
        {
            sum[n] += part.sum[n];
            sum_sq[n] += part.sum_sq[n];
        }
    }

    double const nrep = static_cast<double>(cfg.replicas);
    double const mean_m = kappa_moment(model.env, 1.0);
    double const alpha_m = kappa_moment(model.env, alpha);
    CsvTable table{"decay.csv", {"n", "moment", "se", "first_moment_theory"}, {}};
    std::vector<std::pair<double, double>> points;
    for (std::uint64_t n = 1; n <= max_n; ++n)
    {
        double const mean = sum[n] / nrep;
        double const var = std::max(0.0, sum_sq[n] / nrep - mean * mean);
        table.rows.push_back({static_cast<double>(n), mean,
                              std::sqrt(var / nrep),
                              std::pow(mean_m, static_cast<double>(n))});
        if (mean > 0.0)
            points.push_back({static_cast<double>(n), mean});
    }
    auto const fit = fit_geometric_decay(points);
    if (alpha == 1.0)
    {
        // E Z_n = (E m)^n exactly.
        report.metrics.push_back(make_metric(
            "rho_hat", fit.rho_hat, mean_m, cfg.tolerance, Check::absolute));
    }
    else
    {
        double const bound = std::max(alpha_m, mean_m);
        report.metrics.push_back(make_metric("rho_hat",
                                             fit.rho_hat,
                                             bound + cfg.tolerance,
                                             cfg.tolerance,
                                             Check::below));
    }
    report.tables.push_back(std::move(table));
    report.summary = {{"rho_hat", fit.rho_hat},
                      {"r2", fit.r2},
                      {"mean_offspring", mean_m},
                      {"alpha_moment", alpha_m}};
}

inline void run_sre(ExperimentConfig const& cfg, RunReport& report, double q)
{
    auto const& model = cfg.model;
    auto const truncation = choose_truncation(model, cfg.epsilon_trunc);
    auto const setup = tail_setup(cfg, marginal_reference(model.env));
    auto samples = collect_samples(cfg.replicas,
                                   cfg.workers,
                                   Rng(cfg.seed),
                                   PerpetuitySampler{&model, truncation, {}});
    std::span<double const> view(samples);
    auto const grid = tail_ratio(view, setup.reference, setup.x);
    auto const checked = tail_ratio(view, setup.reference, setup.check_x);
    double const theory = 1.0 / (1.0 - q);
    add_ratio_metrics(report, cfg, checked, theory);
    report.tables.push_back(ratio_table(grid));

    // Coupled gaps Theta o B - Pi B: mean zero for every i.
    CsvTable gaps{"gap.csv", {"i", "mean", "se"}, {}};
    Rng const gap_master = Rng(cfg.seed).substream(0);
    for (std::uint64_t i = 1; i <= cfg.gap_max_i; ++i)
    {
        auto chunks = map_chunks(
            cfg.gap_replicas, cfg.workers,
            [&](std::uint64_t first, std::uint64_t last) {
                std::vector<EnvDraw> scratch;
                std::pair<double, double> acc{0.0, 0.0};
                for (std::uint64_t r = first; r < last; ++r)
                {
                    double const g = coupled_gap_sample(
                        model, i, gap_master.split(r), scratch);
                    acc.first += g;
                    acc.second += g * g;
                }
                return acc;
            });
        double s = 0.0, s2 = 0.0;
        for (auto const& [a, b] : chunks)
        {
            s += a;
            s2 += b;
        }
        double const n = static_cast<double>(cfg.gap_replicas);
        double const mean = s / n;
        double const se
            = std::sqrt(std::max(0.0, (s2 / n - mean * mean) / (n - 1)));
        gaps.rows.push_back({static_cast<double>(i), mean, se});
        report.metrics.push_back(make_metric("gap_mean_i" + std::to_string(i),
                                             mean, 0.0, 4.0 * se,
                                             Check::absolute));
    }
    report.tables.push_back(std::move(gaps));
    report.summary = {{"constant_hat", checked.ratio.front()},
                      {"constant_theory", theory},
                      {"truncation", truncation}};
    report.real_samples = std::move(samples);
}

inline void run_oracle(ExperimentConfig const& cfg, RunReport& report)
{
    auto const& model = cfg.model;
    auto const kernel = build_kernel(model.env, cfg.oracle_n_max);
    auto const exact = stationary_power_iteration(
        kernel, cfg.oracle_tol, cfg.oracle_max_iter);
    auto const truncation = choose_truncation(model, cfg.epsilon_trunc);
    auto samples = collect_samples(cfg.replicas,
                                   cfg.workers,
                                   Rng(cfg.seed),
                                   BackwardSampler{&model, truncation, {}});

    // Lump the sampler's mass at or above n_max like the kernel does.
    std::size_t const states = kernel.states();
    std::vector<double> empirical(states, 0.0);
    for (auto s : samples)
        empirical[std::min<std::size_t>(s, states - 1)] += 1.0;
    for (auto& p : empirical)
        p /= static_cast<double>(samples.size());

    double const tv = total_variation(exact.pmf, empirical);
    double const defect = stationarity_defect(kernel, exact.pmf);
    report.metrics.push_back(
        make_metric("tv", tv, 0.0, cfg.tolerance, Check::absolute));
    report.metrics.push_back(make_metric(
        "stationarity_defect", defect, 2.0 * cfg.oracle_tol, 0.0, Check::below));
    report.metrics.push_back(make_metric(
        "clipped_mass", exact.residual, 1e-8, 0.0, Check::below));

    CsvTable exact_table{"stationary.csv", {"state", "probability"}, {}};
    CsvTable mc_table{"empirical.csv", {"state", "probability"}, {}};
    for (std::size_t x = 0; x < states; ++x)
    {
        exact_table.rows.push_back({static_cast<double>(x), exact.pmf[x]});
        mc_table.rows.push_back({static_cast<double>(x), empirical[x]});
    }
    report.tables.push_back(std::move(exact_table));
    report.tables.push_back(std::move(mc_table));
    report.summary = {{"tv", tv},
                      {"pi0", exact.pmf[0]},
                      {"sweeps", exact.sweeps},
                      {"clipped_mass", exact.residual},
                      {"truncation", truncation}};
    report.count_samples = std::move(samples);
}

inline void run_hill(ExperimentConfig const& cfg, RunReport& report)
{
    auto const& model = cfg.model;
    auto const truncation = choose_truncation(model, cfg.epsilon_trunc);
    auto samples = collect_samples(cfg.replicas,
                                   cfg.workers,
                                   Rng(cfg.seed),
                                   BackwardSampler{&model, truncation, {}});
    std::span<Count const> view(samples);
    std::size_t const k = cfg.hill_k ? cfg.hill_k : default_hill_k(view.size());
    auto const est = hill_estimate(view, k);
    report.metrics.push_back(make_metric(
        "kappa_hat", est.kappa_hat, model.kappa, cfg.tolerance, Check::relative));
    report.tables.push_back(hill_table(hill_plot(view, k)));
    report.summary = {{"kappa_hat", est.kappa_hat},
                      {"ci95", est.ci95},
                      {"k", k},
                      {"truncation", truncation}};
    report.count_samples = std::move(samples);
}
}  // namespace detail

/*!
 * Run one experiment.
 *
 * Every experiment except `check` first verifies E m(xi)^kappa < 1 and a
 * finite offspring moment; when that fails the report carries the condition
 * values and hypothesis_ok = false, and no sampling happens.
 */
inline RunReport run_experiment(ExperimentConfig const& cfg)
{
    auto const start = std::chrono::steady_clock::now();
    RunReport report{cfg.experiment, cfg.seed, to_json(cfg)};

    auto const cond = check_conditions(cfg.model);
    report.summary["conditions"] = to_json(cond);
    report.hypothesis_ok = cond.pass;

    if (cfg.experiment == Experiment::check)
    {
        detail::run_check(cfg, report, cond);
    }
    else if (cond.pass)
    {
        nlohmann::json const conditions = report.summary["conditions"];
        double const q = cond.kappa_moment;
        switch (cfg.experiment)
        {
            case Experiment::theorem:
                detail::run_theorem(cfg, report, q);
                break;
            case Experiment::lemma1:
                detail::run_lemma1(cfg, report, q);
                break;
            case Experiment::corollary:
                detail::run_corollary(cfg, report, q);
                break;
            case Experiment::grey:
                detail::run_grey(cfg, report, q);
                break;
            case Experiment::decay:
                detail::run_decay(cfg, report);
                break;
            case Experiment::sre:
                detail::run_sre(cfg, report, q);
                break;
            case Experiment::oracle:
                detail::run_oracle(cfg, report);
                break;
            case Experiment::hill:
                detail::run_hill(cfg, report);
                break;
            case Experiment::check:
                break;
        }
        report.summary["conditions"] = conditions;
    }

    report.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return report;
}

//---------------------------------------------------------------------------//
// Output
//---------------------------------------------------------------------------//

inline std::string format_csv(CsvTable const& table)
{
    std::string out;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        out += (c ? "," : "") + table.header[c];
    out += '\n';
    char buf[32];
    for (auto const& row : table.rows)
    {
        for (std::size_t c = 0; c < row.size(); ++c)
        {
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            out += (c ? "," : "");
            out += buf;
        }
        out += '\n';
    }
    return out;
}

/// Write report.json, the CSV tables, conditions.json for `check`, and the
/// optional raw dump. Returns the paths written.
inline std::vector<std::filesystem::path> emit_report(RunReport const& report,
                                                      std::filesystem::path const& out_dir,
                                                      DumpFormat dump = DumpFormat::none)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw IoError("cannot create output directory " + out_dir.string());

    std::vector<fs::path> written;
    auto write = [&](fs::path const& name, std::string const& content) {
        auto path = out_dir / name;
        auto out = bpire::detail::open_for_write(path);
        out << content;
        bpire::detail::finish_write(out, path);
        written.push_back(path);
    };

    write("report.json", to_json(report).dump(2) + "\n");
    if (report.experiment == Experiment::check)
        write("conditions.json", report.summary["conditions"].dump(2) + "\n");
    for (auto const& table : report.tables)
        write(table.file, format_csv(table));

    if (dump == DumpFormat::text && !report.count_samples.empty())
    {
        write_text_dump(out_dir / "samples.txt", report.count_samples);
        written.push_back(out_dir / "samples.txt");
    }
    else if (dump == DumpFormat::text && !report.real_samples.empty())
    {
        write_text_dump(out_dir / "samples.txt", report.real_samples);
        written.push_back(out_dir / "samples.txt");
    }
    else if (dump == DumpFormat::binary && !report.count_samples.empty())
    {
        write_binary_dump(out_dir / "samples.bin", report.count_samples);
        written.push_back(out_dir / "samples.bin");
    }
    return written;
}

/// 0 when every metric passes, 2 when the hypothesis fails, 1 otherwise.
inline int exit_code(RunReport const& report)
{
    if (!report.hypothesis_ok)
        return 2;
    return report.pass() ? 0 : 1;
}

}  // namespace bpire::cli
