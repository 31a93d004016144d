#pragma once

#include "habm/agent.h"
#include "habm/cooperation.h"
#include "habm/environment.h"
#include "habm/genetics.h"
#include "habm/rng.h"

#include <cstdint>
#include <span>
#include <vector>

namespace habm
{

/// Everything that parameterises one simulation. Defaults for the energy
/// economy, mortality and demography are modelling choices; only the
/// thresholds of 10 energy units and 10 age ticks and the heritability of 0.9
/// are fixed by the model itself.
struct ModelParams {
    double fertility = 0.8;          ///< f in (0, 1)
    double carrying_capacity = 300;  ///< K
    int initial_population = 100;

    CapabilityParams capability;
    EnvParams env;

    double initial_energy = 20.0;
    double metabolic_cost = 0.05;  ///< per step, every living agent
    double movement_cost = 0.1;    ///< per step spent moving
    double food_energy = 10.0;     ///< energy pool of one cooperation event
    double reproduction_cost = 5.0;
    double energy_threshold = 10.0;

    double hazard_base = 0.00005; ///< per step
    double hazard_age = 0.01;      ///< per step, per age tick past the threshold - 1
    int age_threshold = 10;
    int age_tick_interval = 3000;

    void validate() const;
};

struct StepStats {
    int births = 0;
    int deaths = 0;
    int cooperation_events = 0;
    int aborted_cooperations = 0;
    int degenerate_allocations = 0;
    int food_restored = 0;
};

struct World {
    std::int64_t t = 0;
    std::vector<Agent> agents; ///< living agents, ascending id
    Environment env;
    InteractionLedger ledger;
    std::uint64_t seed = 0;
    ModelParams params;
    AgentId next_id = 0;

    StepStats last_step;
    std::int64_t total_births = 0;
    std::int64_t total_deaths = 0;
    std::int64_t degenerate_allocations = 0;

    std::size_t population() const
    {
        return agents.size();
    }
    const Agent* find(AgentId id) const;
};

World make_world(const ModelParams& params, std::uint64_t seed);

/// f * (1 - N/K), floored at 0.
double birth_rate(double population, double carrying_capacity, double fertility);

/// Per-step hazard: base rate below the age threshold, rising linearly with
/// each age tick at or past it.
double hazard(int age, const ModelParams& p);

/// 1 for an agent without energy, otherwise 1 - exp(-hazard).
double death_probability(const Agent& a, const ModelParams& p);

bool death_check(const Agent& a, Rng& rng, const ModelParams& p);

/// Mating conditions for two agents as recorded in the previous step: both
/// above the energy threshold, inside the same village, both waiting to
/// reproduce, and of opposite sex.
bool reproduction_predicate(const Agent& i, const Agent& j, std::span<const Village> villages,
                            double energy_threshold = 10.0);

/// Hungry, with at least two idle neighbours and some food in reach.
bool cooperation_predicate(const Agent& a, const SensedNeighborhood& sensed,
                           double energy_threshold = 10.0);

/// Inputs to action selection for one agent, all read from the start-of-step snapshot.
struct ActionContext {
    bool dies = false;
    SensedNeighborhood sensed;
    bool has_mate = false; ///< some other agent satisfies reproduction_predicate with this one
};

/// Highest-priority action whose trigger fires: DEAD > COOPERATION >
/// REPRODUCTION > WAIT_REPRO > MOVING_TO_VILLAGE > IDLE. Joint actions are
/// returned without partners; the step fills them in (or demotes the agent)
/// during matching.
Action select_action(const Agent& a, const ActionContext& ctx, const ModelParams& p);

/// One synchronous tick. Decisions read only the start-of-step snapshot; the
/// order of `world.agents` on entry does not affect the result.
void step(World& world);

} // namespace habm
