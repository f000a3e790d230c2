// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file tools/bpire.cpp
//! Command-line experiment runner.
//---------------------------------------------------------------------------//
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bpire/cli/config.hpp"
#include "bpire/cli/experiments.hpp"
#include "bpire/dump.hpp"
#include "bpire/tailstats.hpp"

namespace
{
std::optional<unsigned> workers_from_env()
{
    char const* value = std::getenv("BPIRE_WORKERS");
    if (!value || !*value)
        return std::nullopt;
    char* end = nullptr;
    long const n = std::strtol(value, &end, 10);
    if (*end != '\0' || n < 1)
    {
        std::cerr << "bpire: ignoring invalid BPIRE_WORKERS=" << value << "\n";
        return std::nullopt;
    }
    return static_cast<unsigned>(n);
}

void print_report(bpire::cli::RunReport const& report)
{
    using bpire::cli::to_string;
    std::printf("experiment %s  seed %llu  %.0f ms\n",
                std::string(to_string(report.experiment)).c_str(),
                static_cast<unsigned long long>(report.seed),
                report.wall_ms);
    if (!report.hypothesis_ok)
    {
        auto const& c = report.summary["conditions"];
        std::printf("hypothesis fails: E m^kappa = %s (need < 1), moment_A = %s\n",
                    c["kappa_moment"].dump().c_str(),
                    c["moment_A"].dump().c_str());
    }
    for (auto const& m : report.metrics)
    {
        std::printf("  %-24s estimate %-12.6g theory %-12.6g tol %-10.4g %s\n",
                    m.name.c_str(),
                    m.estimate,
                    m.theory,
                    m.tolerance,
                    m.pass ? "PASS" : "FAIL");
    }
}

int run(std::string const& name,
        std::string const& config_path,
        std::optional<std::uint64_t> seed,
        std::optional<unsigned> workers,
        std::optional<std::string> out)
{
    using namespace bpire::cli;
    Overrides overrides;
    overrides.experiment = parse_experiment(name);
    overrides.seed = seed;
    overrides.workers = workers;
    if (out)
        overrides.out_dir = *out;
    overrides.workers_fallback = workers_from_env();

    auto const cfg = load_config(config_path, overrides);
    auto const report = run_experiment(cfg);
    auto const files = emit_report(report, cfg.out_dir, cfg.dump);
    print_report(report);
    for (auto const& f : files)
        std::printf("  wrote %s\n", f.string().c_str());
    return exit_code(report);
}

int analyze(std::string const& path, std::size_t hill_k)
{
    std::vector<std::uint64_t> samples = bpire::read_count_dump(path);
    std::sort(samples.begin(), samples.end());
    std::span<std::uint64_t const> view(samples);
    std::size_t const k = hill_k ? hill_k : bpire::default_hill_k(view.size());
    auto const est = bpire::hill_estimate(view, k);
    double sum = 0.0;
    for (auto s : samples)
        sum += static_cast<double>(s);
    std::printf("n %zu  mean %.6g  max %llu\n",
                samples.size(),
                sum / static_cast<double>(samples.size()),
                static_cast<unsigned long long>(samples.back()));
    std::printf("hill k %zu  kappa_hat %.6g  ci95 %.4g\n", k, est.kappa_hat, est.ci95);
    return 0;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo experiments for branching processes in random "
                 "environments with heavy-tailed immigration"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
    std::string selected;

    for (auto name : bpire::cli::kExperimentNames)
    {
        auto* sub = app.add_subcommand(std::string(name),
                                       "run the " + std::string(name)
                                           + " experiment");
        sub->add_option("--config,-c", config_path, "config file")->required();
        sub->add_option("--seed", seed, "master seed (overrides config)");
        sub->add_option("--workers", workers, "worker threads")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "output directory");
        sub->callback([&selected, name] { selected = std::string(name); });
    }

    std::string dump_path;
    std::size_t hill_k = 0;
    auto* an = app.add_subcommand("analyze", "summarize a sample dump");
    an->add_option("dump", dump_path, "dump file (text or binary)")->required();
    an->add_option("--hill-k", hill_k, "Hill order statistics (0: n^(2/3))");
    an->callback([&selected] { selected = "analyze"; });

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (selected == "analyze")
            return analyze(dump_path, hill_k);
        return run(selected, config_path, seed, workers, out);
    }
    catch (bpire::ParseError const& e)
    {
        std::cerr << "bpire: " << config_path << ": " << e.what() << "\n";
    }
    catch (bpire::Error const& e)
    {
        std::cerr << "bpire: " << e.what() << "\n";
    }
    return 3;
}
