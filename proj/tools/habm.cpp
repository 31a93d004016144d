// Command-line front end: simulate | sweep | ti | classify.

#include "habm/config.h"
#include "habm/harness.h"
#include "habm/trophic.h"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#ifndef HABM_VERSION
#define HABM_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace
{

constexpr int exit_config = 2;
constexpr int exit_runtime = 1;

struct CommonFlags {
    std::string config;
    std::optional<double> c;
    std::optional<double> u;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> steps;
    std::optional<std::int64_t> sample_every;
    std::string out;
};

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// defaults < config file < HIERARCHY_ABM_SEED < flags
habm::RunConfig resolve(const CommonFlags& flags)
{
    habm::RunConfig cfg;
    if (!flags.config.empty()) {
        cfg.apply(habm::read_config_file(flags.config));
    }
    if (const char* env = std::getenv("HIERARCHY_ABM_SEED")) {
        try {
            std::size_t used = 0;
            cfg.sweep.base_seed = std::stoull(env, &used);
            if (used != std::string(env).size()) {
                throw std::invalid_argument(env);
            }
        }
        catch (const std::logic_error&) {
            throw habm::ConfigError("HIERARCHY_ABM_SEED", "expected a non-negative integer");
        }
    }
    if (flags.c) {
        cfg.model.capability.spread = *flags.c;
    }
    if (flags.u) {
        cfg.model.capability.mutation_sd = *flags.u;
    }
    if (flags.steps) {
        cfg.sweep.steps = *flags.steps;
    }
    if (flags.sample_every) {
        cfg.sweep.sample_every = *flags.sample_every;
    }
    return cfg;
}

std::ofstream open_out(const fs::path& p)
{
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + p.string());
    }
    return out;
}

void write_meta(const fs::path& dir, const std::string& command, const habm::RunConfig& cfg,
                const ordered_json& seeds)
{
    ordered_json meta;
    meta["command"] = command;
    meta["code_version"] = HABM_VERSION;
    meta["config"] = cfg.to_json();
    // results do not depend on the thread count; keep meta.json comparable across it
    meta["config"].erase("workers");
    meta["seeds"] = seeds;
    meta["thresholds"] = {{"median_TI", habm::ordered_median_threshold},
                          {"iqr_TI", habm::ordered_iqr_threshold}};
    meta["generated_at"] = utc_timestamp();
    auto out = open_out(dir / "meta.json");
    out << meta.dump(1) << '\n';
}

int cmd_simulate(const CommonFlags& flags)
{
    auto cfg = resolve(flags);
    cfg.validate();
    const std::uint64_t seed = flags.seed.value_or(cfg.sweep.base_seed);
    if (flags.seed) {
        cfg.sweep.base_seed = seed;
    }
    const fs::path dir = flags.out;
    fs::create_directories(dir);

    auto res = habm::run_replicate(cfg.model, cfg.sweep.steps, cfg.sweep.sample_every, seed,
                                   cfg.sweep.survivors_only);
    res.c = cfg.model.capability.spread;
    res.u = cfg.model.capability.mutation_sd;
    {
        auto out = open_out(dir / "trajectory.csv");
        habm::write_trajectories_csv(out, std::span(&res, 1));
    }
    {
        auto out = open_out(dir / "network.json");
        habm::write_network_json(out, res.network);
    }
    write_meta(dir, "simulate", cfg,
               ordered_json::array({{{"c", res.c}, {"u", res.u}, {"replicate", 0}, {"seed", seed}}}));

    const auto final_ti = res.trajectory.final_ti();
    std::printf("steps=%lld population=%zu births=%lld deaths=%lld final_TI=%s\n",
                static_cast<long long>(cfg.sweep.steps),
                res.trajectory.population.empty()
                    ? static_cast<std::size_t>(cfg.model.initial_population)
                    : static_cast<std::size_t>(res.trajectory.population.back()),
                static_cast<long long>(res.total_births), static_cast<long long>(res.total_deaths),
                final_ti ? habm::format_number(*final_ti).c_str() : "NA");
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& grid_c, const std::string& grid_u,
              std::optional<int> reps, std::optional<int> workers)
{
    auto cfg = resolve(flags);
    if (!grid_c.empty()) {
        cfg.sweep.c_values = habm::parse_number_list(grid_c, "grid-c");
    }
    if (!grid_u.empty()) {
        cfg.sweep.u_values = habm::parse_number_list(grid_u, "grid-u");
    }
    if (reps) {
        cfg.sweep.replicates = *reps;
    }
    if (workers) {
        cfg.workers = *workers;
    }
    if (flags.seed) {
        cfg.sweep.base_seed = *flags.seed;
    }
    cfg.validate();

    const fs::path dir = flags.out;
    fs::create_directories(dir);
    const fs::path summary = dir / "summary.csv";
    const fs::path summary_tmp = dir / "summary.csv.partial";
    fs::remove(summary);

    const auto result = habm::run_sweep(cfg.sweep, cfg.model, cfg.workers);
    try {
        {
            auto out = open_out(dir / "trajectories.csv");
            habm::write_trajectories_csv(out, result.replicates);
        }
        ordered_json seeds = ordered_json::array();
        for (const auto& r : result.replicates) {
            auto out = open_out(dir / habm::network_filename(r.c, r.u, r.replicate));
            habm::write_network_json(out, r.network);
            seeds.push_back({{"c", r.c}, {"u", r.u}, {"replicate", r.replicate}, {"seed", r.seed}});
        }
        write_meta(dir, "sweep", cfg, seeds);
        {
            auto out = open_out(summary_tmp);
            habm::write_summary_csv(out, result.cells);
            out.close();
            if (!out) {
                throw std::runtime_error("failed writing " + summary_tmp.string());
            }
        }
        fs::rename(summary_tmp, summary);
    }
    catch (...) {
        std::error_code ec;
        fs::remove(summary_tmp, ec);
        throw;
    }

    for (const auto& c : result.cells) {
        std::printf("c=%g u=%g mean=%s median=%s iqr=%s regime=%s\n", c.c, c.u,
                    habm::format_number(c.stats ? c.stats->mean : NAN).c_str(),
                    habm::format_number(c.stats ? c.stats->median : NAN).c_str(),
                    habm::format_number(c.stats ? c.stats->iqr : NAN).c_str(),
                    std::string(habm::to_string(c.regime)).c_str());
    }
    return 0;
}

int cmd_ti(const std::string& file, std::string levels_path)
{
    std::ifstream in(file);
    if (!in) {
        throw habm::ConfigError("file", "cannot open '" + file + "'");
    }
    const auto parsed = habm::trophic::parse_edge_list(in);
    if (parsed.self_loops > 0) {
        std::fprintf(stderr, "warning: %zu self-loop(s) stripped\n", parsed.self_loops);
    }
    const auto res = habm::trophic::analyze(parsed.graph);
    if (!res.omitted.empty()) {
        std::fprintf(stderr, "warning: %zu node(s) outside the largest weak component omitted\n",
                     res.omitted.size());
    }
    if (levels_path.empty()) {
        levels_path = file + ".levels.csv";
    }
    auto out = open_out(levels_path);
    out << "node,level,in_component\n";
    for (std::size_t i = 0; i < parsed.graph.node_count(); ++i) {
        const bool in_comp = !std::isnan(res.levels[i]);
        out << parsed.graph.label(i) << ',' << habm::format_number(res.levels[i]) << ','
            << (in_comp ? 1 : 0) << '\n';
    }
    std::printf("F = %.6f\n", res.incoherence);
    return 0;
}

int cmd_classify(const std::string& run_dir, const std::string& out_path)
{
    const fs::path dir = run_dir;
    std::ifstream in(dir / "trajectories.csv");
    if (!in) {
        throw habm::ConfigError("run-dir", "no trajectories.csv in '" + run_dir + "'");
    }
    habm::RunConfig cfg;
    if (fs::exists(dir / "meta.json")) {
        const auto meta = habm::read_config_file(dir / "meta.json");
        if (meta.contains("config")) {
            cfg.apply(meta["config"]);
        }
    }
    const auto stored = habm::read_trajectories_csv(in);
    const auto cells = habm::summarize_stored(stored, cfg.sweep);
    if (out_path.empty()) {
        habm::write_summary_csv(std::cout, cells);
    }
    else {
        auto out = open_out(out_path);
        habm::write_summary_csv(out, cells);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hierarchy-emergence agent-based model and trophic incoherence tools"};
    app.require_subcommand(1);

    CommonFlags sim;
    auto* simulate = app.add_subcommand("simulate", "run one replicate");
    simulate->add_option("--config", sim.config, "JSON config file");
    simulate->add_option("--c", sim.c, "initial capability spread");
    simulate->add_option("--u", sim.u, "mutation amplitude");
    simulate->add_option("--seed", sim.seed, "random seed");
    simulate->add_option("--steps", sim.steps, "number of steps");
    simulate->add_option("--sample-every", sim.sample_every, "TI sampling interval");
    simulate->add_option("--out", sim.out, "output directory")->required();

    CommonFlags swp;
    std::string grid_c;
    std::string grid_u;
    std::optional<int> reps;
    std::optional<int> workers;
    auto* sweep = app.add_subcommand("sweep", "run a (c, u) parameter sweep");
    sweep->add_option("--config", swp.config, "JSON config file");
    sweep->add_option("--grid-c", grid_c, "comma-separated c values");
    sweep->add_option("--grid-u", grid_u, "comma-separated u values");
    sweep->add_option("--reps", reps, "replicates per cell");
    sweep->add_option("--steps", swp.steps, "steps per replicate");
    sweep->add_option("--sample-every", swp.sample_every, "TI sampling interval");
    sweep->add_option("--seed", swp.seed, "base seed");
    sweep->add_option("--workers", workers, "worker threads");
    sweep->add_option("--out", swp.out, "output directory")->required();

    std::string ti_file;
    std::string levels_path;
    auto* ti = app.add_subcommand("ti", "trophic incoherence of an edge-list file");
    ti->add_option("file", ti_file, "edge list: 'source target weight' per line")->required();
    ti->add_option("--levels", levels_path, "levels output (default <file>.levels.csv)");

    std::string run_dir;
    std::string classify_out;
    auto* classify = app.add_subcommand("classify", "re-label stored trajectories");
    classify->add_option("run_dir", run_dir, "sweep output directory")->required();
    classify->add_option("--out", classify_out, "write the summary here instead of stdout");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*simulate) {
            return cmd_simulate(sim);
        }
        if (*sweep) {
            return cmd_sweep(swp, grid_c, grid_u, reps, workers);
        }
        if (*ti) {
            return cmd_ti(ti_file, levels_path);
        }
        if (*classify) {
            return cmd_classify(run_dir, classify_out);
        }
    }
    catch (const habm::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_config;
    }
    catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_runtime;
    }
    return exit_runtime;
}
