// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/cli/config.hpp
//! Sectioned key=value experiment configuration.
//!
//! \code
//! [experiment]
//! replicas = 10000000
//! seed = 7
//!
//! [model]
//! kappa = 2
//! delta = 0.5
//!
//! [atom]
//! weight = 0.5
//! offspring = poisson(0.3)
//! immigration = discrete_pareto(2, 1, 0)
//! \endcode
//---------------------------------------------------------------------------//
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../env_model.hpp"
#include "../errors.hpp"
#include "../laws.hpp"

namespace bpire::cli
{
enum class Experiment
{
    check,
    theorem,
    lemma1,
    corollary,
    grey,
    decay,
    sre,
    oracle,
    hill
};

inline constexpr std::string_view kExperimentNames[] = {"check",
                                                        "theorem",
                                                        "lemma1",
                                                        "corollary",
                                                        "grey",
                                                        "decay",
                                                        "sre",
                                                        "oracle",
                                                        "hill"};

inline std::string_view to_string(Experiment e)
{
    return kExperimentNames[static_cast<int>(e)];
}

inline std::optional<Experiment> parse_experiment(std::string_view name)
{
    for (int i = 0; i < static_cast<int>(std::size(kExperimentNames)); ++i)
    {
        if (kExperimentNames[i] == name)
            return static_cast<Experiment>(i);
    }
    return std::nullopt;
}

enum class DumpFormat
{
    none,
    text,
    binary
};

struct ExperimentConfig
{
    Experiment experiment{};
    ModelSpec model;
    std::uint64_t replicas{};
    std::uint64_t seed{};
    double epsilon_trunc{};
    std::vector<double> grid{};          //!< survival levels written to CSV
    std::vector<double> check_levels{};  //!< levels carrying pass/fail metrics
    unsigned workers{};
    std::filesystem::path out_dir{};
    double tolerance{};
    DumpFormat dump{};

    std::optional<ImmigrationFamily> b_law{};  //!< lemma1: B independent of xi
    std::optional<ImmigrationFamily> n_law{};  //!< grey: N independent of xi

    std::uint64_t corollary_max_i{};
    double corollary_level{};
    double r2_min{};

    double decay_alpha{};
    std::uint64_t decay_max_n{};

    std::uint64_t gap_max_i{};
    std::uint64_t gap_replicas{};

    std::size_t oracle_n_max{};
    double oracle_tol{};
    std::uint64_t oracle_max_iter{};

    std::size_t hill_k{};  //!< 0 selects floor(n^{2/3})
};

/// Values given on the command line; they win over the file.
struct Overrides
{
    std::optional<Experiment> experiment;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::filesystem::path> out_dir;
    //! Used only when neither the flag nor the file sets workers.
    std::optional<unsigned> workers_fallback;
};

inline double default_tolerance(Experiment e)
{
    switch (e)
    {
        case Experiment::theorem:
        case Experiment::corollary:
        case Experiment::sre:
            return 0.15;
        case Experiment::lemma1:
        case Experiment::grey:
        case Experiment::hill:
            return 0.10;
        case Experiment::decay:
            return 0.02;
        case Experiment::oracle:
            return 0.005;
        case Experiment::check:
            return 0.0;
    }
    return 0.0;
}

inline std::uint64_t default_replicas(Experiment e)
{
    switch (e)
    {
        case Experiment::theorem:
        case Experiment::lemma1:
        case Experiment::corollary:
        case Experiment::grey:
        case Experiment::sre:
            return 10'000'000;
        default:
            return 1'000'000;
    }
}

namespace detail
{
inline std::string trim(std::string_view s)
{
    auto const first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    auto const last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline std::size_t edit_distance(std::string_view a, std::string_view b)
{
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
    {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
        {
            cur[j] = std::min({prev[j] + 1,
                               cur[j - 1] + 1,
                               prev[j - 1] + (a[i - 1] != b[j - 1])});
        }
        prev.swap(cur);
    }
    return prev[b.size()];
}

inline std::string suggestion(std::string_view word,
                              std::vector<std::string_view> const& choices)
{
    std::string_view best;
    std::size_t best_distance = 3;
    for (auto choice : choices)
    {
        auto const d = edit_distance(word, choice);
        if (d < best_distance)
        {
            best_distance = d;
            best = choice;
        }
    }
    if (best.empty())
        return {};
    return "; did you mean \"" + std::string(best) + "\"?";
}

struct Entry
{
    std::string value;
    int line;
};
using Section = std::map<std::string, Entry>;

struct Document
{
    std::map<std::string, std::pair<Section, int>> singles;
    std::vector<std::pair<Section, int>> atoms;
};

inline std::map<std::string, std::vector<std::string_view>> const& schema()
{
    static std::map<std::string, std::vector<std::string_view>> const keys{
        {"experiment",
         {"name",
          "replicas",
          "seed",
          "epsilon_trunc",
          "grid",
          "check_levels",
          "workers",
          "out",
          "tolerance",
          "dump"}},
        {"model", {"kappa", "delta"}},
        {"atom", {"weight", "offspring", "immigration"}},
        {"continuous", {"kind", "lo", "hi", "immigration"}},
        {"lemma1", {"b_law"}},
        {"grey", {"n_law"}},
        {"corollary", {"max_i", "level", "r2_min"}},
        {"decay", {"alpha", "max_n"}},
        {"sre", {"gap_max_i", "gap_replicas"}},
        {"oracle", {"n_max", "tol", "max_iter"}},
        {"hill", {"k"}},
    };
    return keys;
}

inline Document tokenize(std::string_view text)
{
    Document doc;
    Section* current = nullptr;
    std::string current_name;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw))
    {
        ++line;
        auto const hash = raw.find_first_of("#;");
        std::string const content
            = trim(std::string_view(raw).substr(0, hash));
        if (content.empty())
            continue;

        if (content.front() == '[')
        {
            if (content.back() != ']')
                throw ParseError(line, "unterminated section header");
            current_name = trim(content.substr(1, content.size() - 2));
            auto const& keys = schema();
            if (!keys.count(current_name))
            {
                std::vector<std::string_view> names;
                for (auto const& [name, unused] : keys)
                    names.push_back(name);
                throw ParseError(line,
                                 "unknown section [" + current_name + "]"
                                     + suggestion(current_name, names));
            }
            if (current_name == "atom")
            {
                doc.atoms.push_back({Section{}, line});
                current = &doc.atoms.back().first;
            }
            else
            {
                if (doc.singles.count(current_name))
                    throw ParseError(line,
                                     "duplicate section [" + current_name
                                         + "]");
                doc.singles[current_name] = {Section{}, line};
                current = &doc.singles[current_name].first;
            }
            continue;
        }

        auto const eq = content.find('=');
        if (eq == std::string::npos)
            throw ParseError(line, "expected key = value");
        if (!current)
            throw ParseError(line, "key outside of any section");
        std::string const key = trim(content.substr(0, eq));
        std::string const value = trim(content.substr(eq + 1));
        auto const& allowed = schema().at(current_name);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        {
            throw ParseError(line,
                             "unknown key \"" + key + "\" in [" + current_name
                                 + "]" + suggestion(key, allowed));
        }
        if (value.empty())
            throw ParseError(line, "empty value for \"" + key + "\"");
        if (current->count(key))
            throw ParseError(line, "duplicate key \"" + key + "\"");
        (*current)[key] = {value, line};
    }
    return doc;
}

inline double parse_real(Entry const& e)
{
    char* end = nullptr;
    double const v = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0')
        throw ParseError(e.line, "expected a number, got \"" + e.value + "\"");
    return v;
}

inline std::uint64_t
parse_unsigned(Entry const& e, std::string const& field, std::uint64_t min = 0)
{
    if (!e.value.empty() && e.value.front() == '-')
        throw ValidationError(field, "must be >= " + std::to_string(min));
    // Accept 1e7-style literals when they denote an exact integer.
    double const v = parse_real(e);
    if (v != std::floor(v) || v >= 0x1.0p64)
        throw ParseError(e.line, "expected an integer for \"" + field + "\"");
    auto const result = static_cast<std::uint64_t>(v);
    if (result < min)
        throw ValidationError(field, "must be >= " + std::to_string(min));
    return result;
}

inline std::vector<double> parse_list(Entry const& e)
{
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_real({trim(item), e.line}));
    return out;
}

struct LawCall
{
    std::string name;
    std::vector<std::pair<std::string, double>> args;  // name may be empty
};

inline LawCall parse_call(Entry const& e)
{
    auto const open = e.value.find('(');
    if (open == std::string::npos || e.value.back() != ')')
        throw ParseError(e.line, "expected law(args...), got \"" + e.value + "\"");
    LawCall call;
    call.name = trim(std::string_view(e.value).substr(0, open));
    std::string const inner
        = e.value.substr(open + 1, e.value.size() - open - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        item = trim(item);
        auto const eq = item.find('=');
        if (eq == std::string::npos)
            call.args.push_back({"", parse_real({item, e.line})});
        else
            call.args.push_back({trim(item.substr(0, eq)),
                                 parse_real({trim(item.substr(eq + 1)), e.line})});
    }
    return call;
}

// Bind positional and named arguments to a parameter list with defaults.
inline std::vector<double> bind(LawCall const& call,
                                std::vector<std::string_view> const& params,
                                std::vector<std::optional<double>> defaults,
                                int line)
{
    std::vector<std::optional<double>> values = std::move(defaults);
    std::size_t position = 0;
    for (auto const& [name, value] : call.args)
    {
        std::size_t slot = position;
        if (!name.empty())
        {
            auto it = std::find(params.begin(), params.end(), name);
            if (it == params.end())
                throw ParseError(line,
                                 "unknown argument \"" + name + "\" for "
                                     + call.name + suggestion(name, params));
            slot = static_cast<std::size_t>(it - params.begin());
        }
        else
        {
            ++position;
        }
        if (slot >= params.size())
            throw ParseError(line, "too many arguments for " + call.name);
        values[slot] = value;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < params.size(); ++i)
    {
        if (!values[i])
            throw ParseError(line,
                             "missing argument \"" + std::string(params[i])
                                 + "\" for " + call.name);
        out.push_back(*values[i]);
    }
    return out;
}

inline std::uint64_t as_count(double v, int line)
{
    if (v < 0 || v != std::floor(v))
        throw ParseError(line, "expected a non-negative integer argument");
    return static_cast<std::uint64_t>(v);
}

inline OffspringFamily parse_offspring(Entry const& e)
{
    auto const call = parse_call(e);
    if (call.name == "poisson")
        return offspring::Poisson{bind(call, {"rate"}, {{}}, e.line)[0]};
    if (call.name == "bernoulli")
        return offspring::Bernoulli{bind(call, {"p"}, {{}}, e.line)[0]};
    if (call.name == "geometric0")
        return offspring::Geometric0{bind(call, {"p"}, {{}}, e.line)[0]};
    if (call.name == "binomial")
    {
        auto const v = bind(call, {"trials", "p"}, {{}, {}}, e.line);
        return offspring::Binomial{as_count(v[0], e.line), v[1]};
    }
    throw ParseError(e.line,
                     "unknown offspring law \"" + call.name + "\""
                         + suggestion(call.name,
                                      {"poisson",
                                       "bernoulli",
                                       "geometric0",
                                       "binomial"}));
}

inline ImmigrationFamily parse_immigration(Entry const& e)
{
    auto const call = parse_call(e);
    if (call.name == "discrete_pareto" || call.name == "pareto")
    {
        auto const v
            = bind(call, {"kappa", "c", "beta"}, {{}, 1.0, 0.0}, e.line);
        return immigration::DiscretePareto{v[0], v[1], v[2]};
    }
    if (call.name == "bernoulli")
        return immigration::Bernoulli{bind(call, {"q"}, {{}}, e.line)[0]};
    if (call.name == "constant")
        return immigration::Constant{
            as_count(bind(call, {"b"}, {{}}, e.line)[0], e.line)};
    if (call.name == "geometric0")
        return immigration::Geometric0{bind(call, {"p"}, {{}}, e.line)[0]};
    throw ParseError(e.line,
                     "unknown immigration law \"" + call.name + "\""
                         + suggestion(call.name,
                                      {"discrete_pareto",
                                       "bernoulli",
                                       "constant",
                                       "geometric0"}));
}

inline Entry const* find(Section const& s, std::string const& key)
{
    auto it = s.find(key);
    return it == s.end() ? nullptr : &it->second;
}

template<class F>
auto validated(std::string const& field, F&& f)
{
    try
    {
        return f();
    }
    catch (InvalidParameter const& e)
    {
        throw ValidationError(field, e.what());
    }
}
}  // namespace detail

/// Parse and validate a config; unknown sections and keys are rejected.
inline ExperimentConfig
parse_config(std::string_view text, Overrides const& overrides = {})
{
    using namespace detail;
    Document const doc = tokenize(text);
    static Section const empty;
    auto section = [&](std::string const& name) -> Section const& {
        auto it = doc.singles.find(name);
        return it == doc.singles.end() ? empty : it->second.first;
    };

    Section const& exp = section("experiment");

    // Experiment identity
    std::optional<Experiment> experiment = overrides.experiment;
    if (auto const* e = find(exp, "name"))
    {
        auto const named = parse_experiment(e->value);
        if (!named)
        {
            std::vector<std::string_view> names(std::begin(kExperimentNames),
                                                std::end(kExperimentNames));
            throw ParseError(e->line,
                             "unknown experiment \"" + e->value + "\""
                                 + suggestion(e->value, names));
        }
        if (experiment && *experiment != *named)
            throw ValidationError("name",
                                  "config names experiment \"" + e->value
                                      + "\" but \""
                                      + std::string(to_string(*experiment))
                                      + "\" was requested");
        experiment = named;
    }
    if (!experiment)
        throw ValidationError("name", "no experiment selected");

    // Model
    Section const& model_section = section("model");
    auto const* kappa_entry = find(model_section, "kappa");
    if (!kappa_entry)
        throw ValidationError("kappa", "[model] kappa is required");
    double const kappa = parse_real(*kappa_entry);
    if (!(kappa > 0.0))
        throw ValidationError("kappa", "must be > 0");
    double delta = 0.5;
    if (auto const* e = find(model_section, "delta"))
        delta = parse_real(*e);
    if (!(delta > 0.0))
        throw ValidationError("delta", "must be > 0");

    bool const has_continuous = doc.singles.count("continuous") > 0;
    if (has_continuous == !doc.atoms.empty())
        throw ValidationError("atom",
                              "give either [atom] sections or one "
                              "[continuous] section");
    std::optional<EnvSpec> env;
    if (has_continuous)
    {
        Section const& c = section("continuous");
        if (auto const* k = find(c, "kind"); k && k->value != "uniform_poisson_rate")
            throw ParseError(k->line,
                             "unknown continuous kind \"" + k->value + "\"");
        auto require = [&](std::string const& key) -> Entry const& {
            auto const* e = find(c, key);
            if (!e)
                throw ValidationError(key, "[continuous] " + key + " is required");
            return *e;
        };
        double const lo = parse_real(require("lo"));
        double const hi = parse_real(require("hi"));
        auto imm = parse_immigration(require("immigration"));
        env = validated("continuous", [&] {
            return EnvSpec::uniform_poisson_rate(lo, hi, imm);
        });
    }
    else
    {
        std::vector<Atom> atoms;
        for (auto const& [atom, line] : doc.atoms)
        {
            auto require = [&](std::string const& key) -> Entry const& {
                auto const* e = find(atom, key);
                if (!e)
                    throw ValidationError(key,
                                          "[atom] at line " + std::to_string(line)
                                              + " needs " + key);
                return *e;
            };
            double weight = doc.atoms.size() == 1 ? 1.0 : 0.0;
            if (auto const* w = find(atom, "weight"))
                weight = parse_real(*w);
            else if (doc.atoms.size() > 1)
                require("weight");
            atoms.push_back({weight,
                             parse_offspring(require("offspring")),
                             parse_immigration(require("immigration"))});
        }
        env = validated("atom", [&] { return EnvSpec::atomic(atoms); });
    }

    ExperimentConfig cfg{.experiment = *experiment,
                         .model = ModelSpec{*env, kappa, delta}};

    // Run parameters
    cfg.replicas = default_replicas(*experiment);
    if (auto const* e = find(exp, "replicas"))
        cfg.replicas = parse_unsigned(*e, "replicas", 1);
    cfg.seed = 1;
    if (auto const* e = find(exp, "seed"))
        cfg.seed = parse_unsigned(*e, "seed");
    if (overrides.seed)
        cfg.seed = *overrides.seed;

    cfg.epsilon_trunc = 1e-6;
    if (auto const* e = find(exp, "epsilon_trunc"))
        cfg.epsilon_trunc = parse_real(*e);
    if (!(cfg.epsilon_trunc > 0.0 && cfg.epsilon_trunc < 1.0))
        throw ValidationError("epsilon_trunc", "must lie in (0, 1)");

    auto levels = [&](std::string const& key, std::vector<double> fallback) {
        auto const* e = find(exp, key);
        std::vector<double> v = e ? parse_list(*e) : std::move(fallback);
        if (v.empty())
            throw ValidationError(key, "needs at least one level");
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            if (!(v[i] > 0.0 && v[i] < 1.0))
                throw ValidationError(key, "levels must lie in (0, 1)");
            if (i > 0 && !(v[i] < v[i - 1]))
                throw ValidationError(key, "levels must be strictly decreasing");
        }
        return v;
    };
    cfg.grid = levels("grid", {1e-2, 1e-3, 1e-4, 1e-5});
    cfg.check_levels = levels("check_levels", {1e-3, 1e-4});

    cfg.workers = 1;
    if (overrides.workers)
        cfg.workers = *overrides.workers;
    else if (auto const* e = find(exp, "workers"))
        cfg.workers = static_cast<unsigned>(parse_unsigned(*e, "workers", 1));
    else if (overrides.workers_fallback)
        cfg.workers = *overrides.workers_fallback;
    if (cfg.workers < 1)
        throw ValidationError("workers", "must be >= 1");

    cfg.out_dir = "bpire-out/" + std::string(to_string(*experiment)) + "-s"
                  + std::to_string(cfg.seed);
    if (auto const* e = find(exp, "out"))
        cfg.out_dir = e->value;
    if (overrides.out_dir)
        cfg.out_dir = *overrides.out_dir;

    cfg.tolerance = default_tolerance(*experiment);
    if (auto const* e = find(exp, "tolerance"))
        cfg.tolerance = parse_real(*e);
    if (!(cfg.tolerance >= 0.0))
        throw ValidationError("tolerance", "must be >= 0");

    cfg.dump = DumpFormat::none;
    if (auto const* e = find(exp, "dump"))
    {
        if (e->value == "text")
            cfg.dump = DumpFormat::text;
        else if (e->value == "binary")
            cfg.dump = DumpFormat::binary;
        else if (e->value != "none")
            throw ParseError(e->line, "dump must be none, text, or binary");
    }

    // Experiment-specific sections
    if (auto const* e = find(section("lemma1"), "b_law"))
        cfg.b_law = validated("b_law", [&] {
            auto law = parse_immigration(*e);
            validate(law);
            return law;
        });
    if (auto const* e = find(section("grey"), "n_law"))
        cfg.n_law = validated("n_law", [&] {
            auto law = parse_immigration(*e);
            validate(law);
            return law;
        });

    Section const& cor = section("corollary");
    cfg.corollary_max_i = 4;
    if (auto const* e = find(cor, "max_i"))
        cfg.corollary_max_i = parse_unsigned(*e, "max_i", 2);
    cfg.corollary_level = 1e-4;
    if (auto const* e = find(cor, "level"))
        cfg.corollary_level = parse_real(*e);
    if (!(cfg.corollary_level > 0.0 && cfg.corollary_level < 1.0))
        throw ValidationError("level", "must lie in (0, 1)");
    cfg.r2_min = 0.98;
    if (auto const* e = find(cor, "r2_min"))
        cfg.r2_min = parse_real(*e);

    Section const& dec = section("decay");
    cfg.decay_alpha = 1.0;
    if (auto const* e = find(dec, "alpha"))
        cfg.decay_alpha = parse_real(*e);
    if (!(cfg.decay_alpha > 0.0))
        throw ValidationError("alpha", "must be > 0");
    cfg.decay_max_n = 10;
    if (auto const* e = find(dec, "max_n"))
        cfg.decay_max_n = parse_unsigned(*e, "max_n", 3);

    Section const& sre = section("sre");
    cfg.gap_max_i = 6;
    if (auto const* e = find(sre, "gap_max_i"))
        cfg.gap_max_i = parse_unsigned(*e, "gap_max_i");
    cfg.gap_replicas
        = std::clamp<std::uint64_t>(cfg.replicas, 2, 1'000'000);
    if (auto const* e = find(sre, "gap_replicas"))
        cfg.gap_replicas = parse_unsigned(*e, "gap_replicas", 2);

    Section const& orc = section("oracle");
    cfg.oracle_n_max = 64;
    if (auto const* e = find(orc, "n_max"))
        cfg.oracle_n_max = parse_unsigned(*e, "n_max", 1);
    if (cfg.oracle_n_max + 1 > 4096)
        throw ValidationError("n_max", "oracle refuses more than 4096 states");
    cfg.oracle_tol = 1e-12;
    if (auto const* e = find(orc, "tol"))
        cfg.oracle_tol = parse_real(*e);
    if (!(cfg.oracle_tol > 0.0))
        throw ValidationError("tol", "must be > 0");
    cfg.oracle_max_iter = 1'000'000;
    if (auto const* e = find(orc, "max_iter"))
        cfg.oracle_max_iter = parse_unsigned(*e, "max_iter", 1);

    cfg.hill_k = 0;
    if (auto const* e = find(section("hill"), "k"))
        cfg.hill_k = parse_unsigned(*e, "k");

    return cfg;
}

inline ExperimentConfig load_config(std::filesystem::path const& path,
                                    Overrides const& overrides = {})
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), overrides);
}

}  // namespace bpire::cli
