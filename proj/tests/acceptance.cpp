// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file tests/acceptance.cpp
//! Full-size acceptance runs; prints one PASS/FAIL line per criterion.
//---------------------------------------------------------------------------//
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bpire/cli/experiments.hpp"

namespace
{
using namespace bpire;
using namespace bpire::cli;
namespace fs = std::filesystem;

std::string const kConfigA = R"(
[model]
kappa = 2
[atom]
weight = 0.5
offspring = poisson(0.3)
immigration = discrete_pareto(kappa=2, c=1, beta=0)
[atom]
weight = 0.5
offspring = poisson(0.9)
immigration = discrete_pareto(kappa=2, c=1, beta=0)
)";

ExperimentConfig config(Experiment e, std::string const& experiment_keys,
                        std::string const& rest = kConfigA)
{
    Overrides o;
    o.experiment = e;
    return parse_config("[experiment]\n" + experiment_keys + "\n" + rest, o);
}

Metric const& metric(RunReport const& r, std::string const& name)
{
    for (auto const& m : r.metrics)
    {
        if (m.name == name)
            return m;
    }
    throw std::runtime_error("missing metric " + name);
}

struct Tally
{
    int failed = 0;

    void line(int id, char const* what, bool pass, std::string const& detail)
    {
        std::printf("criterion %d %-28s %s  %s\n", id, what, pass ? "PASS" : "FAIL",
                    detail.c_str());
        std::fflush(stdout);
        failed += !pass;
    }
};

std::string fmt(char const* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// Returns the backward-sampler tail ratio at 1e-4, reused by criterion 7.
double theorem(Tally& tally)
{
    auto const cfg = config(Experiment::theorem,
                            "replicas = 10000000\nseed = 101\nepsilon_trunc = 1e-6\n"
                            "check_levels = 1e-3, 1e-4");
    auto const report = run_experiment(cfg);
    auto const& m3 = metric(report, "ratio@0.001");
    auto const& m4 = metric(report, "ratio@0.0001");
    tally.line(1, "theorem constant", report.pass(),
               fmt("ratio@1e-3 %.4f, ratio@1e-4 %.4f, theory %.4f +-15%%",
                   m3.estimate, m4.estimate, m3.theory));
    return m4.estimate;
}

// Forward chain vs backward sampler in law, then the perpetuity constant.
void triangle(Tally& tally, double backward_ratio)
{
    auto const model = config(Experiment::theorem, "").model;
    auto const k = choose_truncation(model, 1e-6);
    std::size_t const n = 100000;
    auto const backward = collect_samples(n, 1, Rng(701), [&](Rng& rng) {
        return sample_stationary_backward(model, k, rng).value;
    });
    auto const forward = collect_samples(n, 1, Rng(702), [&](Rng& rng) {
        return forward_terminal(0, k, model.env, rng);
    });
    double const ks = ks_statistic(std::span<Count const>(backward),
                                   std::span<Count const>(forward));
    double const ks_crit = ks_critical_value(n, n, 0.01);

    auto const sre = run_experiment(config(
        Experiment::sre,
        "replicas = 10000000\nseed = 703\ncheck_levels = 1e-4",
        kConfigA + "[sre]\ngap_max_i = 6\ngap_replicas = 1000000\n"));
    double const perp = metric(sre, "ratio@0.0001").estimate;
    double const theory = 1.0 / 0.55;
    bool const perp_ok = std::abs(perp / theory - 1) <= 0.15
                         && std::abs(perp / backward_ratio - 1) <= 0.15;
    tally.line(7, "self-consistency triangle", ks < ks_crit && perp_ok,
               fmt("KS %.5f < %.5f; perpetuity@1e-4 %.4f vs theory %.4f, "
                   "vs backward %.4f (+-15%%)",
                   ks, ks_crit, perp, theory, backward_ratio));
}

void lemma1(Tally& tally)
{
    auto const report = run_experiment(config(
        Experiment::lemma1, "replicas = 100000000\nseed = 201\ncheck_levels = 1e-4"));
    auto const& m = metric(report, "ratio@0.0001");
    tally.line(2, "random-sum tail", report.pass(),
               fmt("ratio@1e-4 %.4f (se %.4f), theory %.2f +-10%%", m.estimate,
                   report.tables[0].rows[2][4], m.theory));
}

void corollary(Tally& tally)
{
    auto const report = run_experiment(config(
        Experiment::corollary, "replicas = 20000000\nseed = 301",
        kConfigA + "[corollary]\nmax_i = 4\nlevel = 1e-4\n"));
    auto const& rho = metric(report, "rho_hat");
    auto const& r2 = metric(report, "r2");
    std::string ratios;
    for (std::uint64_t i = 0; i <= 4; ++i)
        ratios += fmt(" %.4g", metric(report, "ratio_i" + std::to_string(i)).estimate);
    tally.line(3, "composed thinning decay", rho.pass && r2.pass,
               fmt("rho_hat %.4f (0.45 +-15%%), r2 %.4f >= 0.98; ratios i=0..4:%s",
                   rho.estimate, r2.estimate, ratios.c_str()));
}

void grey(Tally& tally)
{
    auto const report = run_experiment(config(
        Experiment::grey, "replicas = 100000000\nseed = 401\ncheck_levels = 1e-4",
        kConfigA + "[grey]\nn_law = discrete_pareto(kappa=2, c=2)\n"));
    auto const& m = metric(report, "ratio@0.0001");
    tally.line(4, "input-dominated sum", report.pass(),
               fmt("ratio@1e-4 %.4f, theory %.2f +-10%%", m.estimate, m.theory));
}

void decay(Tally& tally)
{
    auto const report = run_experiment(config(Experiment::decay,
                                              "replicas = 10000000\nseed = 501",
                                              R"(
[model]
kappa = 1
[atom]
offspring = poisson(0.5)
immigration = constant(0)
[decay]
alpha = 1
max_n = 10
)"));
    auto const& m = metric(report, "rho_hat");
    tally.line(5, "thinning moment decay", report.pass(),
               fmt("rho_hat %.5f, exact %.2f +-0.02", m.estimate, m.theory));
}

void oracle(Tally& tally)
{
    auto const report = run_experiment(config(Experiment::oracle,
                                              "replicas = 1000000\nseed = 601",
                                              R"(
[model]
kappa = 1
[atom]
offspring = bernoulli(0.5)
immigration = bernoulli(0.5)
[oracle]
n_max = 64
)"));
    double product = 1.0;
    for (int k = 1; k < 80; ++k)
        product *= 1.0 - std::ldexp(1.0, -k);
    double const pi0 = report.summary["pi0"].get<double>();
    auto const& tv = metric(report, "tv");
    bool const pass = std::abs(pi0 - product) <= 1e-6 && tv.pass;
    tally.line(6, "oracle equivalence", pass,
               fmt("pi(0) %.10f vs product %.10f (1e-6); TV %.5f <= 0.005", pi0,
                   product, tv.estimate));
}

void hill(Tally& tally)
{
    auto const report = run_experiment(
        config(Experiment::hill, "replicas = 1000000\nseed = 801"));
    double const k = report.summary["kappa_hat"].get<double>();
    bool const pass = k >= 1.8 && k <= 2.2;
    tally.line(8, "Hill tail index", pass,
               fmt("kappa_hat %.4f with k=%zu, need [1.8, 2.2]", k,
                   report.summary["k"].get<std::size_t>()));
}

void determinism(Tally& tally)
{
    auto const base = fs::temp_directory_path() / "bpire-acceptance-determinism";
    fs::remove_all(base);
    std::vector<RunReport> reports;
    std::vector<std::string> csv, json;
    for (unsigned workers : {1u, 4u, 16u})
    {
        auto cfg = config(Experiment::theorem,
                          "replicas = 300000\nseed = 901\ngrid = 1e-2, 1e-3\n"
                          "check_levels = 1e-2");
        cfg.workers = workers;
        reports.push_back(run_experiment(cfg));
        auto const dir = base / std::to_string(workers);
        emit_report(reports.back(), dir);
        csv.push_back(slurp(dir / "ratio.csv") + slurp(dir / "hill.csv"));
        auto j = nlohmann::json::parse(slurp(dir / "report.json"));
        j.erase("wall_ms");
        json.push_back(j.dump());
    }
    bool pass = true;
    for (std::size_t i = 1; i < reports.size(); ++i)
    {
        pass = pass && reports[i].count_samples == reports[0].count_samples
               && csv[i] == csv[0] && json[i] == json[0];
    }
    tally.line(9, "determinism", pass,
               fmt("workers 1/4/16: %zu samples, multisets and CSVs %s",
                   reports[0].count_samples.size(), pass ? "identical" : "differ"));
    fs::remove_all(base);
}

}  // namespace

int main()
{
    auto const start = std::chrono::steady_clock::now();
    Tally tally;
    try
    {
        double const backward_ratio = theorem(tally);
        lemma1(tally);
        corollary(tally);
        grey(tally);
        decay(tally);
        oracle(tally);
        triangle(tally, backward_ratio);
        hill(tally);
        determinism(tally);
    }
    catch (std::exception const& e)
    {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    double const secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    std::printf("%d of 9 criteria failed (%.0f s)\n", tally.failed, secs);
    return tally.failed == 0 ? 0 : 1;
}
