// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file tests/test_experiments.cpp
//! Small end-to-end runs through the experiment runner.
//---------------------------------------------------------------------------//
#include "bpire/cli/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace bpire::cli
{
namespace
{
namespace fs = std::filesystem;

std::string const kConfigA = R"(
[model]
kappa = 2
[atom]
weight = 0.5
offspring = poisson(0.3)
immigration = discrete_pareto(2)
[atom]
weight = 0.5
offspring = poisson(0.9)
immigration = discrete_pareto(2)
)";

ExperimentConfig config(Experiment e, std::string const& extra = "",
                        std::string const& model = kConfigA)
{
    Overrides o;
    o.experiment = e;
    return parse_config("[experiment]\n" + extra + "\n" + model, o);
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(std::string const& name)
{
    auto dir = fs::temp_directory_path() / ("bpire-test-" + name);
    fs::remove_all(dir);
    return dir;
}

TEST(Experiments, CheckOnConfigA)
{
    auto const report = run_experiment(config(Experiment::check));
    EXPECT_TRUE(report.pass());
    EXPECT_EQ(report.summary["conditions"]["kappa_moment"].get<double>(), 0.45);
    EXPECT_EQ(exit_code(report), 0);

    auto const dir = scratch_dir("check");
    auto const files = emit_report(report, dir);
    auto const cond = nlohmann::json::parse(slurp(dir / "conditions.json"));
    for (auto key : {"kappa_moment", "log_mean", "moment_A", "pass"})
        EXPECT_TRUE(cond.contains(key)) << key;
}

TEST(Experiments, HypothesisFailureSkipsSampling)
{
    auto const model = R"(
[model]
kappa = 1
[atom]
offspring = poisson(1.2)
immigration = discrete_pareto(1)
)";
    auto const report = run_experiment(config(Experiment::theorem, "", model));
    EXPECT_FALSE(report.hypothesis_ok);
    EXPECT_TRUE(report.metrics.empty());
    EXPECT_EQ(exit_code(report), 2);
}

TEST(Experiments, TheoremWritesExpectedFiles)
{
    auto const cfg = config(Experiment::theorem,
                            "replicas = 20000\ngrid = 1e-1, 1e-2\ncheck_levels = 1e-1");
    auto const report = run_experiment(cfg);
    auto const dir = scratch_dir("theorem");
    emit_report(report, dir);
    std::set<std::string> names;
    for (auto const& entry : fs::directory_iterator(dir))
        names.insert(entry.path().filename().string());
    EXPECT_EQ(names, (std::set<std::string>{"report.json", "ratio.csv", "hill.csv"}));

    auto const json = nlohmann::json::parse(slurp(dir / "report.json"));
    for (auto key : {"experiment", "seed", "pass", "metrics", "wall_ms"})
        EXPECT_TRUE(json.contains(key)) << key;
    EXPECT_NEAR(json["summary"]["constant_theory"].get<double>(), 1 / 0.55, 1e-12);
    EXPECT_EQ(slurp(dir / "ratio.csv").substr(0, 26), "x,survival,se,ratio,ratio_");
}

TEST(Experiments, RerunIsByteIdenticalAcrossWorkers)
{
    auto cfg = config(Experiment::theorem, "replicas = 50000\nseed = 5");
    auto const a = run_experiment(cfg);
    cfg.workers = 4;
    auto const b = run_experiment(cfg);
    auto const da = scratch_dir("rerun-a");
    auto const db = scratch_dir("rerun-b");
    emit_report(a, da);
    emit_report(b, db);
    EXPECT_EQ(slurp(da / "ratio.csv"), slurp(db / "ratio.csv"));
    EXPECT_EQ(slurp(da / "hill.csv"), slurp(db / "hill.csv"));

    auto ja = nlohmann::json::parse(slurp(da / "report.json"));
    auto jb = nlohmann::json::parse(slurp(db / "report.json"));
    ja.erase("wall_ms");
    jb.erase("wall_ms");
    EXPECT_EQ(ja, jb);
}

TEST(Experiments, EveryExperimentRunsSmall)
{
    struct Case
    {
        Experiment e;
        std::string extra;
        std::string model;
        std::set<std::string> tables;
    };
    std::string const bernoulli = R"(
[model]
kappa = 1
[atom]
offspring = bernoulli(0.5)
immigration = bernoulli(0.5)
)";
    std::string const decay = R"(
[model]
kappa = 1
[atom]
offspring = poisson(0.5)
immigration = constant(0)
)";
    std::vector<Case> const cases{
        {Experiment::lemma1, "replicas = 20000\ncheck_levels = 1e-2", kConfigA, {"ratio.csv"}},
        {Experiment::grey, "replicas = 20000\ncheck_levels = 1e-2",
         kConfigA + "[grey]\nn_law = discrete_pareto(2, 2)\n", {"ratio.csv"}},
        {Experiment::corollary, "replicas = 20000", kConfigA + "[corollary]\nlevel = 1e-2\n",
         {"corollary.csv"}},
        {Experiment::decay, "replicas = 20000", decay, {"decay.csv"}},
        {Experiment::sre, "replicas = 20000\ncheck_levels = 1e-2",
         kConfigA + "[sre]\ngap_max_i = 2\n", {"ratio.csv", "gap.csv"}},
        {Experiment::oracle, "replicas = 20000\ntolerance = 0.05", bernoulli,
         {"stationary.csv", "empirical.csv"}},
        {Experiment::hill, "replicas = 20000", kConfigA, {"hill.csv"}},
    };
    for (auto const& c : cases)
    {
        auto const report = run_experiment(config(c.e, c.extra, c.model));
        EXPECT_TRUE(report.hypothesis_ok) << to_string(c.e);
        EXPECT_FALSE(report.metrics.empty()) << to_string(c.e);
        std::set<std::string> tables;
        for (auto const& t : report.tables)
            tables.insert(t.file);
        EXPECT_EQ(tables, c.tables) << to_string(c.e);
    }
}

TEST(Experiments, GreyRequiresMatchingPareto)
{
    auto const bad = kConfigA + "[grey]\nn_law = discrete_pareto(3, 2)\n";
    EXPECT_THROW(run_experiment(config(Experiment::grey, "replicas = 100", bad)),
                 ValidationError);
    EXPECT_THROW(run_experiment(config(Experiment::grey, "replicas = 100")),
                 ValidationError);
}

TEST(Experiments, OracleRejectsContinuousEnvironment)
{
    auto const model = R"(
[model]
kappa = 2
[continuous]
lo = 0
hi = 1
immigration = geometric0(0.5)
)";
    EXPECT_THROW(run_experiment(config(Experiment::oracle, "replicas = 100", model)),
                 PmfUnavailable);
}

TEST(Experiments, DumpsRoundTrip)
{
    auto const cfg = config(Experiment::hill, "replicas = 5000");
    auto const report = run_experiment(cfg);
    auto const dir = scratch_dir("dump");
    emit_report(report, dir, DumpFormat::binary);
    EXPECT_EQ(read_count_dump(dir / "samples.bin"), report.count_samples);
    auto const dir2 = scratch_dir("dump-text");
    emit_report(report, dir2, DumpFormat::text);
    EXPECT_EQ(read_count_dump(dir2 / "samples.txt"), report.count_samples);
}

TEST(Experiments, UnwritableOutputDirectory)
{
    auto const report = run_experiment(config(Experiment::check));
    auto const dir = scratch_dir("readonly");
    fs::create_directories(dir);
    fs::permissions(dir, fs::perms::owner_read | fs::perms::owner_exec);
    bool const root_bypasses = [&] {
        std::ofstream probe(dir / "probe");
        return static_cast<bool>(probe);
    }();
    if (!root_bypasses)
    {
        EXPECT_THROW(emit_report(report, dir), IoError);
    }
    // A regular file where the directory should be fails for every user.
    auto const file = scratch_dir("not-a-dir");
    std::ofstream(file) << "x";
    EXPECT_THROW(emit_report(report, file), IoError);
    EXPECT_THROW(emit_report(report, file / "sub"), IoError);
    fs::permissions(dir, fs::perms::owner_all);
}

}  // namespace
}  // namespace bpire::cli
