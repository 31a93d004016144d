#pragma once

#include "habm/dynamics.h"
#include "habm/trophic.h"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace habm
{

/// Ordered-regime thresholds on the cross-replicate distribution of TI.
inline constexpr double ordered_median_threshold = 0.45;
inline constexpr double ordered_iqr_threshold = 0.05;

struct SweepSpec {
    std::vector<double> c_values{0.05};
    std::vector<double> u_values{1.0};
    int replicates = 20;
    std::int64_t steps = 30000;
    std::int64_t sample_every = 100;
    std::uint64_t base_seed = 1;
    int stability_window = 5;
    double rebound_margin = 0.05;
    bool survivors_only = true; ///< restrict the ledger to living agents before measuring TI

    void validate() const;
};

/// Stable per-replicate seed; adding cells or replicates never moves existing ones.
std::uint64_t replicate_seed(std::uint64_t base_seed, double c, double u, int replicate);

/// TI samples of one run. Missing samples (no edges, extinct) are NaN.
struct Trajectory {
    std::vector<std::int64_t> steps;
    std::vector<double> ti;
    std::vector<std::int64_t> population;
    bool extinct = false;

    std::optional<double> final_ti() const;
    bool operator==(const Trajectory&) const;
};

/// Ledger as a digraph over agent ids (ascending). With `survivors_only`,
/// edges touching dead agents are dropped.
trophic::DirectedGraph ledger_graph(const World& world, bool survivors_only);

struct NetworkNode {
    AgentId id = 0;
    double alpha = 0.0;
    bool in_component = false;
    double level = 0.0; ///< NaN outside the component
    double x = 0.0;
    int layer = 0;
    double speaking_frequency = 0.0;
};

struct NetworkEdge {
    AgentId listener = 0;
    AgentId speaker = 0;
    std::uint64_t weight = 0;
};

struct NetworkSnapshot {
    std::int64_t step = 0;
    std::optional<double> ti;
    std::vector<NetworkNode> nodes;
    std::vector<NetworkEdge> edges;
};

NetworkSnapshot network_snapshot(const World& world, bool survivors_only);

/// TI of the (optionally survivor-restricted) ledger, nullopt when it has no edges.
std::optional<double> ledger_incoherence(const World& world, bool survivors_only);

struct ReplicateResult {
    double c = 0.0;
    double u = 0.0;
    int replicate = 0;
    std::uint64_t seed = 0;
    Trajectory trajectory;
    NetworkSnapshot network;
    std::int64_t total_births = 0;
    std::int64_t total_deaths = 0;
    std::int64_t cooperation_events = 0;
    std::int64_t degenerate_allocations = 0;
};

/// Simulates `steps` ticks, sampling TI and population every `sample_every` steps.
ReplicateResult run_replicate(const ModelParams& params, std::int64_t steps,
                              std::int64_t sample_every, std::uint64_t seed, bool survivors_only);

struct CellStats {
    double mean = 0.0;
    double median = 0.0;
    double iqr = 0.0;
};

/// Linear-interpolation (type 7) quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Mean, median and Q75 - Q25 of the given values (at least one).
CellStats summarize_cell(std::span<const double> final_tis);

enum class Regime
{
    ConsistentDecrease,
    Rebound,
    NoChange,
};

std::string_view to_string(Regime r);
std::optional<Regime> parse_regime(std::string_view s);

struct RegimeRule {
    double median_threshold = ordered_median_threshold;
    double iqr_threshold = ordered_iqr_threshold;
    double rebound_margin = 0.05;
};

struct Classification {
    Regime regime = Regime::NoChange;
    bool all_extinct = false;
};

/// Cross-replicate median and IQR at each sample time, over defined samples.
struct EnsembleSeries {
    std::vector<std::int64_t> steps;
    std::vector<double> median; ///< NaN when no replicate is defined at that time
    std::vector<double> iqr;
};

EnsembleSeries ensemble_series(std::span<const Trajectory> runs);

Classification classify_regime(std::span<const Trajectory> runs, const RegimeRule& rule = {});

/// First sample time from which median < threshold and IQR < threshold hold
/// for `window` consecutive samples.
std::optional<std::int64_t> stability_onset(std::span<const Trajectory> runs, int window,
                                            const RegimeRule& rule = {});

struct CellSummary {
    double c = 0.0;
    double u = 0.0;
    int replicate_count = 0;
    std::vector<double> final_tis; ///< defined finals only
    std::optional<CellStats> stats;
    Regime regime = Regime::NoChange;
    std::optional<std::int64_t> onset;
    int extinct_count = 0;
};

CellSummary summarize(double c, double u, std::span<const Trajectory> runs, const SweepSpec& spec);

struct SweepResult {
    std::vector<CellSummary> cells;           ///< c-major, then u
    std::vector<ReplicateResult> replicates;  ///< c-major, then u, then replicate
};

/// Runs every (c, u, replicate) on `workers` threads. Output order and content
/// do not depend on the worker count.
SweepResult run_sweep(const SweepSpec& spec, const ModelParams& params, int workers = 1);

// ---- files ----

std::string format_number(double v);

void write_trajectories_csv(std::ostream& out, std::span<const ReplicateResult> reps,
                            bool header = true);
void write_summary_csv(std::ostream& out, std::span<const CellSummary> cells);
void write_network_json(std::ostream& out, const NetworkSnapshot& net);

struct StoredTrajectory {
    double c = 0.0;
    double u = 0.0;
    int replicate = 0;
    Trajectory trajectory;
};

/// Reads trajectories.csv back into per-replicate series (file order preserved).
std::vector<StoredTrajectory> read_trajectories_csv(std::istream& in);

/// Recomputes cell summaries from stored trajectories (offline classification).
std::vector<CellSummary> summarize_stored(std::span<const StoredTrajectory> stored,
                                          const SweepSpec& spec);

std::string network_filename(double c, double u, int replicate);

} // namespace habm
