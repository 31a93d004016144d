#include "habm/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace habm
{

namespace
{

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

bool same_double(double a, double b)
{
    return double_bits(a) == double_bits(b) || (std::isnan(a) && std::isnan(b));
}

} // namespace

void SweepSpec::validate() const
{
    if (c_values.empty() || u_values.empty()) {
        throw std::invalid_argument("sweep grid must contain at least one c and one u value");
    }
    if (replicates < 1) {
        throw std::invalid_argument("replicates must be >= 1");
    }
    if (sample_every < 1) {
        throw std::invalid_argument("sample_every must be >= 1");
    }
    if (steps < 0) {
        throw std::invalid_argument("steps must be >= 0");
    }
    if (stability_window < 1) {
        throw std::invalid_argument("stability_window must be >= 1");
    }
}

std::uint64_t replicate_seed(std::uint64_t base_seed, double c, double u, int replicate)
{
    return hash_values(base_seed, double_bits(c), double_bits(u),
                       static_cast<std::uint64_t>(replicate));
}

std::optional<double> Trajectory::final_ti() const
{
    for (auto it = ti.rbegin(); it != ti.rend(); ++it) {
        if (!std::isnan(*it)) {
            return *it;
        }
    }
    return std::nullopt;
}

bool Trajectory::operator==(const Trajectory& o) const
{
    return steps == o.steps && population == o.population && extinct == o.extinct &&
           ti.size() == o.ti.size() &&
           std::equal(ti.begin(), ti.end(), o.ti.begin(), same_double);
}

trophic::DirectedGraph ledger_graph(const World& world, bool survivors_only)
{
    std::vector<AgentId> ids;
    std::vector<std::pair<InteractionLedger::Edge, std::uint64_t>> kept;
    for (const auto& [edge, w] : world.ledger.edges()) {
        if (survivors_only && (!world.find(edge.first) || !world.find(edge.second))) {
            continue;
        }
        kept.emplace_back(edge, w);
        ids.push_back(edge.first);
        ids.push_back(edge.second);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    trophic::DirectedGraph g;
    for (const auto id : ids) {
        g.add_node(std::to_string(id));
    }
    auto index = [&](AgentId id) {
        return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    for (const auto& [edge, w] : kept) {
        g.add_edge(index(edge.first), index(edge.second), static_cast<double>(w));
    }
    return g;
}

std::optional<double> ledger_incoherence(const World& world, bool survivors_only)
{
    const auto g = ledger_graph(world, survivors_only);
    if (g.total_weight() <= 0.0) {
        return std::nullopt;
    }
    return trophic::trophic_incoherence(g);
}

NetworkSnapshot network_snapshot(const World& world, bool survivors_only)
{
    NetworkSnapshot net;
    net.step = world.t;
    const auto g = ledger_graph(world, survivors_only);
    const std::size_t n = g.node_count();
    std::vector<AgentId> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids[i] = std::stoll(g.label(i));
    }

    for (const auto& e : g.edges()) {
        net.edges.push_back(
            {ids[e.source], ids[e.target], static_cast<std::uint64_t>(std::llround(e.weight))});
    }
    net.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        net.nodes[i].id = ids[i];
        net.nodes[i].level = nan;
        if (const Agent* a = world.find(ids[i])) {
            net.nodes[i].alpha = a->alpha;
        }
        else {
            net.nodes[i].alpha = nan;
        }
    }
    if (g.total_weight() <= 0.0) {
        return net;
    }

    const auto res = trophic::analyze(g);
    net.ti = res.incoherence;
    const auto split = trophic::largest_weak_component(g);
    std::vector<double> h(split.kept.size());
    for (std::size_t k = 0; k < split.kept.size(); ++k) {
        h[k] = res.levels[split.kept[k]];
    }
    const auto layout = trophic::layered_layout(split.graph, h);
    for (std::size_t k = 0; k < split.kept.size(); ++k) {
        auto& node = net.nodes[split.kept[k]];
        node.in_component = true;
        node.level = h[k];
        node.x = layout[k].x;
        node.layer = layout[k].layer;
    }
    // speaking frequency over the whole exported graph, not only the component
    for (const auto& e : net.edges) {
        const auto it = std::lower_bound(ids.begin(), ids.end(), e.speaker);
        net.nodes[static_cast<std::size_t>(it - ids.begin())].speaking_frequency +=
            static_cast<double>(e.weight);
    }
    return net;
}

ReplicateResult run_replicate(const ModelParams& params, std::int64_t steps,
                              std::int64_t sample_every, std::uint64_t seed, bool survivors_only)
{
    if (sample_every < 1) {
        throw std::invalid_argument("sample_every must be >= 1");
    }
    ReplicateResult out;
    out.seed = seed;
    World world = make_world(params, seed);
    std::int64_t coop = 0;
    for (std::int64_t s = 1; s <= steps; ++s) {
        step(world);
        coop += world.last_step.cooperation_events;
        if (s % sample_every == 0) {
            auto& tr = out.trajectory;
            tr.steps.push_back(world.t);
            tr.population.push_back(static_cast<std::int64_t>(world.population()));
            tr.ti.push_back(world.population() == 0
                                ? nan
                                : ledger_incoherence(world, survivors_only).value_or(nan));
        }
    }
    const auto& pop = out.trajectory.population;
    out.trajectory.extinct = pop.empty() ? world.population() == 0 : pop.back() == 0;
    out.network = network_snapshot(world, survivors_only);
    out.total_births = world.total_births;
    out.total_deaths = world.total_deaths;
    out.cooperation_events = coop;
    out.degenerate_allocations = world.degenerate_allocations;
    return out;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty()) {
        throw std::invalid_argument("quantile of an empty set");
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

CellStats summarize_cell(std::span<const double> final_tis)
{
    if (final_tis.empty()) {
        throw std::invalid_argument("summarize_cell needs at least one value");
    }
    const std::vector<double> v(final_tis.begin(), final_tis.end());
    CellStats s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    s.median = quantile(v, 0.5);
    s.iqr = quantile(v, 0.75) - quantile(v, 0.25);
    return s;
}

std::string_view to_string(Regime r)
{
    switch (r) {
    case Regime::ConsistentDecrease:
        return "ConsistentDecrease";
    case Regime::Rebound:
        return "Rebound";
    case Regime::NoChange:
        return "NoChange";
    }
    return "?";
}

std::optional<Regime> parse_regime(std::string_view s)
{
    for (const auto r : {Regime::ConsistentDecrease, Regime::Rebound, Regime::NoChange}) {
        if (to_string(r) == s) {
            return r;
        }
    }
    return std::nullopt;
}

EnsembleSeries ensemble_series(std::span<const Trajectory> runs)
{
    EnsembleSeries es;
    std::map<std::int64_t, std::vector<double>> by_step;
    for (const auto& r : runs) {
        for (std::size_t k = 0; k < r.steps.size(); ++k) {
            auto& bucket = by_step[r.steps[k]];
            if (!std::isnan(r.ti[k])) {
                bucket.push_back(r.ti[k]);
            }
        }
    }
    for (auto& [t, vals] : by_step) {
        es.steps.push_back(t);
        if (vals.empty()) {
            es.median.push_back(nan);
            es.iqr.push_back(nan);
            continue;
        }
        es.median.push_back(quantile(vals, 0.5));
        es.iqr.push_back(quantile(vals, 0.75) - quantile(vals, 0.25));
    }
    return es;
}

Classification classify_regime(std::span<const Trajectory> runs, const RegimeRule& rule)
{
    std::vector<double> finals;
    for (const auto& r : runs) {
        if (r.extinct) {
            continue;
        }
        if (const auto f = r.final_ti()) {
            finals.push_back(*f);
        }
    }
    if (finals.empty()) {
        return {Regime::NoChange, true};
    }
    const auto s = summarize_cell(finals);
    if (s.median < rule.median_threshold && s.iqr < rule.iqr_threshold) {
        return {Regime::ConsistentDecrease, false};
    }
    std::vector<Trajectory> alive;
    for (const auto& r : runs) {
        if (!r.extinct) {
            alive.push_back(r);
        }
    }
    const auto es = ensemble_series(alive);
    bool entered = false;
    double last = nan;
    for (const double m : es.median) {
        if (std::isnan(m)) {
            continue;
        }
        entered = entered || m < rule.median_threshold;
        last = m;
    }
    if (entered && last > rule.median_threshold + rule.rebound_margin) {
        return {Regime::Rebound, false};
    }
    return {Regime::NoChange, false};
}

std::optional<std::int64_t> stability_onset(std::span<const Trajectory> runs, int window,
                                            const RegimeRule& rule)
{
    const auto es = ensemble_series(runs);
    int streak = 0;
    for (std::size_t k = 0; k < es.steps.size(); ++k) {
        const bool ok = !std::isnan(es.median[k]) && es.median[k] < rule.median_threshold &&
                        es.iqr[k] < rule.iqr_threshold;
        streak = ok ? streak + 1 : 0;
        if (streak >= window) {
            return es.steps[k + 1 - static_cast<std::size_t>(window)];
        }
    }
    return std::nullopt;
}

CellSummary summarize(double c, double u, std::span<const Trajectory> runs, const SweepSpec& spec)
{
    CellSummary cell;
    cell.c = c;
    cell.u = u;
    cell.replicate_count = static_cast<int>(runs.size());
    for (const auto& r : runs) {
        if (r.extinct) {
            ++cell.extinct_count;
        }
        if (const auto f = r.final_ti()) {
            cell.final_tis.push_back(*f);
        }
    }
    if (!cell.final_tis.empty()) {
        cell.stats = summarize_cell(cell.final_tis);
    }
    const RegimeRule rule{ordered_median_threshold, ordered_iqr_threshold, spec.rebound_margin};
    cell.regime = classify_regime(runs, rule).regime;
    cell.onset = stability_onset(runs, spec.stability_window, rule);
    return cell;
}

SweepResult run_sweep(const SweepSpec& spec, const ModelParams& params, int workers)
{
    spec.validate();
    params.validate();
    struct Job {
        double c;
        double u;
        int rep;
    };
    std::vector<Job> jobs;
    for (const double c : spec.c_values) {
        for (const double u : spec.u_values) {
            for (int r = 0; r < spec.replicates; ++r) {
                jobs.push_back({c, u, r});
            }
        }
    }

    SweepResult out;
    out.replicates.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs.size());
    auto work = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            try {
                const auto& job = jobs[k];
                ModelParams p = params;
                p.capability.spread = job.c;
                p.capability.mutation_sd = job.u;
                const auto seed = replicate_seed(spec.base_seed, job.c, job.u, job.rep);
                auto res = run_replicate(p, spec.steps, spec.sample_every, seed, spec.survivors_only);
                res.c = job.c;
                res.u = job.u;
                res.replicate = job.rep;
                out.replicates[k] = std::move(res);
            }
            catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
    if (n_workers == 1) {
        work();
    }
    else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back(work);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    std::size_t k = 0;
    for (const double c : spec.c_values) {
        for (const double u : spec.u_values) {
            std::vector<Trajectory> runs;
            for (int r = 0; r < spec.replicates; ++r) {
                runs.push_back(out.replicates[k++].trajectory);
            }
            out.cells.push_back(summarize(c, u, runs, spec));
        }
    }
    return out;
}

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "NA";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectories_csv(std::ostream& out, std::span<const ReplicateResult> reps, bool header)
{
    if (header) {
        out << "c,u,replicate,step,TI,population\n";
    }
    for (const auto& r : reps) {
        const auto& tr = r.trajectory;
        for (std::size_t k = 0; k < tr.steps.size(); ++k) {
            out << format_number(r.c) << ',' << format_number(r.u) << ',' << r.replicate << ','
                << tr.steps[k] << ',' << format_number(tr.ti[k]) << ',' << tr.population[k] << '\n';
        }
    }
}

void write_summary_csv(std::ostream& out, std::span<const CellSummary> cells)
{
    out << "c,u,replicate_count,mean_final_TI,median_final_TI,iqr_final_TI,regime,onset_step,"
           "extinct_count\n";
    for (const auto& c : cells) {
        out << format_number(c.c) << ',' << format_number(c.u) << ',' << c.replicate_count << ','
            << format_number(c.stats ? c.stats->mean : nan) << ','
            << format_number(c.stats ? c.stats->median : nan) << ','
            << format_number(c.stats ? c.stats->iqr : nan) << ',' << to_string(c.regime) << ','
            << (c.onset ? std::to_string(*c.onset) : std::string("NA")) << ',' << c.extinct_count
            << '\n';
    }
}

void write_network_json(std::ostream& out, const NetworkSnapshot& net)
{
    using nlohmann::ordered_json;
    auto num = [](double v) -> ordered_json {
        return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v);
    };
    ordered_json j;
    j["step"] = net.step;
    j["TI"] = net.ti ? ordered_json(*net.ti) : ordered_json(nullptr);
    j["nodes"] = ordered_json::array();
    for (const auto& n : net.nodes) {
        j["nodes"].push_back({{"id", n.id},
                              {"alpha", num(n.alpha)},
                              {"in_component", n.in_component},
                              {"level", num(n.level)},
                              {"x", n.x},
                              {"y", num(n.level)},
                              {"layer", n.layer},
                              {"speaking_frequency", n.speaking_frequency}});
    }
    j["edges"] = ordered_json::array();
    for (const auto& e : net.edges) {
        j["edges"].push_back({{"listener", e.listener}, {"speaker", e.speaker}, {"weight", e.weight}});
    }
    out << j.dump(1) << '\n';
}

std::vector<StoredTrajectory> read_trajectories_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "c,u,replicate,step,TI,population") {
        throw std::runtime_error("trajectories.csv: unexpected header");
    }
    std::vector<StoredTrajectory> out;
    std::map<std::tuple<std::uint64_t, std::uint64_t, int>, std::size_t> index;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (f.size() != 6) {
            throw std::runtime_error("trajectories.csv line " + std::to_string(lineno) +
                                     ": expected 6 fields");
        }
        try {
            const double c = std::stod(f[0]);
            const double u = std::stod(f[1]);
            const int rep = std::stoi(f[2]);
            const auto key = std::make_tuple(double_bits(c), double_bits(u), rep);
            auto [it, inserted] = index.emplace(key, out.size());
            if (inserted) {
                out.push_back({c, u, rep, {}});
            }
            auto& tr = out[it->second].trajectory;
            tr.steps.push_back(std::stoll(f[3]));
            tr.ti.push_back(f[4] == "NA" ? nan : std::stod(f[4]));
            tr.population.push_back(std::stoll(f[5]));
        }
        catch (const std::logic_error&) {
            throw std::runtime_error("trajectories.csv line " + std::to_string(lineno) +
                                     ": malformed number");
        }
    }
    for (auto& s : out) {
        auto& tr = s.trajectory;
        tr.extinct = !tr.population.empty() && tr.population.back() == 0;
    }
    return out;
}

std::vector<CellSummary> summarize_stored(std::span<const StoredTrajectory> stored,
                                          const SweepSpec& spec)
{
    std::vector<std::pair<double, double>> order;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<Trajectory>> cells;
    for (const auto& s : stored) {
        const auto key = std::make_pair(double_bits(s.c), double_bits(s.u));
        if (!cells.contains(key)) {
            order.emplace_back(s.c, s.u);
        }
        cells[key].push_back(s.trajectory);
    }
    std::vector<CellSummary> out;
    for (const auto& [c, u] : order) {
        out.push_back(summarize(c, u, cells[{double_bits(c), double_bits(u)}], spec));
    }
    return out;
}

std::string network_filename(double c, double u, int replicate)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "network_%g_%g_%d.json", c, u, replicate);
    return buf;
}

} // namespace habm
