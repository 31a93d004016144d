#include "habm/dynamics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace habm
{

void ModelParams::validate() const
{
    if (!(fertility > 0.0 && fertility < 1.0)) {
        throw std::invalid_argument("fertility must lie in (0, 1)");
    }
    if (!(carrying_capacity > 0.0)) {
        throw std::invalid_argument("carrying_capacity must be > 0");
    }
    if (initial_population < 0) {
        throw std::invalid_argument("initial_population must be >= 0");
    }
    if (!(env.arena.width > 0.0 && env.arena.height > 0.0)) {
        throw std::invalid_argument("arena dimensions must be > 0");
    }
    if (env.villages.empty()) {
        throw std::invalid_argument("at least one village is required");
    }
    for (const auto& v : env.villages) {
        if (!(v.radius > 0.0)) {
            throw std::invalid_argument("village radius must be > 0");
        }
    }
    if (!(env.speed > 0.0)) {
        throw std::invalid_argument("speed must be > 0");
    }
    if (!(env.regen_rate >= 0.0 && env.regen_rate <= 1.0)) {
        throw std::invalid_argument("regen_rate must lie in [0, 1]");
    }
    if (env.food_count < 0) {
        throw std::invalid_argument("food_count must be >= 0");
    }
    if (age_tick_interval < 1) {
        throw std::invalid_argument("age_tick_interval must be >= 1");
    }
    if (hazard_base < 0.0 || hazard_age < 0.0) {
        throw std::invalid_argument("hazard rates must be >= 0");
    }
    capability.validate();
}

const Agent* World::find(AgentId id) const
{
    const auto it = std::lower_bound(agents.begin(), agents.end(), id,
                                     [](const Agent& a, AgentId v) { return a.id < v; });
    return it != agents.end() && it->id == id ? &*it : nullptr;
}

World make_world(const ModelParams& params, std::uint64_t seed)
{
    params.validate();
    World w;
    w.params = params;
    w.seed = seed;
    w.env = make_environment(params.env, seed);
    w.agents.reserve(static_cast<std::size_t>(params.initial_population));
    for (int i = 0; i < params.initial_population; ++i) {
        auto rng = Rng::substream(seed, Stream::Founder, i);
        Agent a;
        a.id = w.next_id++;
        a.sex = rng.bernoulli(0.5) ? Sex::Female : Sex::Male;
        a.energy = params.initial_energy;
        a.pos = random_position(params.env.arena, rng);
        a.alpha = initial_capability(rng, params.capability);
        a.action = ActionState::single(Action::Idle);
        w.agents.push_back(a);
    }
    return w;
}

double birth_rate(double population, double carrying_capacity, double fertility)
{
    return std::max(0.0, fertility * (1.0 - population / carrying_capacity));
}

double hazard(int age, const ModelParams& p)
{
    if (age < p.age_threshold) {
        return p.hazard_base;
    }
    return p.hazard_base + p.hazard_age * static_cast<double>(age - p.age_threshold + 1);
}

double death_probability(const Agent& a, const ModelParams& p)
{
    if (a.energy <= 0.0) {
        return 1.0;
    }
    return 1.0 - std::exp(-hazard(a.age, p));
}

bool death_check(const Agent& a, Rng& rng, const ModelParams& p)
{
    const double u = rng.uniform();
    return a.energy <= 0.0 || u < death_probability(a, p);
}

bool reproduction_predicate(const Agent& i, const Agent& j, std::span<const Village> villages,
                            double energy_threshold)
{
    if (i.id == j.id || i.sex == j.sex) {
        return false;
    }
    if (i.action.kind != Action::WaitRepro || j.action.kind != Action::WaitRepro) {
        return false;
    }
    if (!(i.energy > energy_threshold && j.energy > energy_threshold)) {
        return false;
    }
    const auto vi = distance_to_village(i.pos, villages);
    const auto vj = distance_to_village(j.pos, villages);
    return vi.inside && vj.inside && vi.village == vj.village;
}

bool cooperation_predicate(const Agent& a, const SensedNeighborhood& sensed, double energy_threshold)
{
    return a.energy < energy_threshold && sensed.idle_neighbors >= 2 && sensed.food_in_reach >= 1;
}

Action select_action(const Agent& a, const ActionContext& ctx, const ModelParams& p)
{
    if (ctx.dies) {
        return Action::Dead;
    }
    if (cooperation_predicate(a, ctx.sensed, p.energy_threshold)) {
        return Action::Cooperation;
    }
    if (ctx.has_mate) {
        return Action::Reproduction;
    }
    if (a.energy > p.energy_threshold) {
        return ctx.sensed.inside_village ? Action::WaitRepro : Action::MovingToVillage;
    }
    return Action::Idle;
}

namespace
{

/// Fallback once a joint action could not be matched.
Action solo_action(const Agent& a, const ActionContext& ctx, const ModelParams& p)
{
    if (a.energy > p.energy_threshold) {
        return ctx.sensed.inside_village ? Action::WaitRepro : Action::MovingToVillage;
    }
    return Action::Idle;
}

/// Mid-rank percentile of `value` among the snapshot population, in (0, 1].
double population_percentile(double value, std::span<const Agent> pop)
{
    if (pop.empty()) {
        return 1.0;
    }
    std::size_t less = 0;
    std::size_t equal = 0;
    for (const auto& a : pop) {
        if (a.alpha < value) {
            ++less;
        }
        else if (a.alpha == value) {
            ++equal;
        }
    }
    const double n = static_cast<double>(pop.size());
    return std::clamp((static_cast<double>(less) + 0.5 * static_cast<double>(equal)) / n, 0.0, 1.0);
}

} // namespace

void step(World& world)
{
    const ModelParams& p = world.params;
    const EnvParams& ep = p.env;
    StepStats stats;

    std::sort(world.agents.begin(), world.agents.end(),
              [](const Agent& a, const Agent& b) { return a.id < b.id; });
    const std::vector<Agent> snapshot = world.agents;
    const std::vector<FoodItem> food_snapshot = world.env.food;
    const std::size_t n = snapshot.size();
    const double population = static_cast<double>(n);

    // Per-agent inputs from the snapshot.
    std::vector<Vec2> positions(n);
    std::vector<Vec2> food_positions;
    for (std::size_t i = 0; i < n; ++i) {
        positions[i] = snapshot[i].pos;
    }
    for (std::size_t f = 0; f < food_snapshot.size(); ++f) {
        if (food_snapshot[f].available) {
            food_positions.push_back(food_snapshot[f].pos);
        }
    }
    const NeighborIndex agent_index(ep.arena, ep.neighbor_radius, positions);
    const NeighborIndex food_index(ep.arena, ep.food_radius, food_positions);

    std::vector<ActionContext> ctx(n);
    std::vector<VillageDistance> village(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Agent& a = snapshot[i];
        auto rng = Rng::substream(world.seed, Stream::Death, world.t, a.id);
        ctx[i].dies = death_check(a, rng, p);
        village[i] = distance_to_village(a.pos, world.env.villages);
        auto& s = ctx[i].sensed;
        s.village_distance = village[i].distance;
        s.nearest_village = village[i].village;
        s.inside_village = village[i].inside;
        // nu and mu only matter to the cooperation trigger, which needs a hungry agent
        if (a.energy < p.energy_threshold) {
            agent_index.for_each_within(a.pos, ep.neighbor_radius, [&](std::size_t j) {
                if (j != i && snapshot[j].action.kind == Action::Idle) {
                    ++s.idle_neighbors;
                }
            });
            food_index.for_each_within(a.pos, ep.food_radius, [&](std::size_t) { ++s.food_in_reach; });
        }
    }

    // Mating eligibility: waiting, fed, inside a village. A mate exists iff an
    // eligible agent of the other sex is in the same village.
    auto eligible = [&](std::size_t i) {
        const Agent& a = snapshot[i];
        return !ctx[i].dies && a.action.kind == Action::WaitRepro && a.energy > p.energy_threshold &&
               village[i].inside;
    };
    std::map<int, std::array<int, 2>> eligible_by_village;
    for (std::size_t i = 0; i < n; ++i) {
        if (eligible(i)) {
            ++eligible_by_village[village[i].village][static_cast<int>(snapshot[i].sex)];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (eligible(i)) {
            const auto& counts = eligible_by_village[village[i].village];
            ctx[i].has_mate = counts[1 - static_cast<int>(snapshot[i].sex)] > 0;
        }
    }

    std::vector<Action> intent(n);
    for (std::size_t i = 0; i < n; ++i) {
        intent[i] = select_action(snapshot[i], ctx[i], p);
    }

    // Joint-action matching, initiators in id order. One joint action per agent.
    std::vector<bool> committed(n, false);
    std::vector<ActionState> chosen(n);
    std::vector<std::array<std::size_t, 3>> teams;
    std::vector<std::array<std::size_t, 2>> pairs;

    // (squared distance, index) ordering: nearest first, lower id on ties
    using Candidate = std::pair<double, std::size_t>;
    constexpr Candidate none{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < n; ++i) {
        if (intent[i] != Action::Cooperation || committed[i]) {
            continue;
        }
        std::array<Candidate, 2> picked{none, none};
        agent_index.for_each_within(snapshot[i].pos, ep.neighbor_radius, [&](std::size_t j) {
            if (j == i || committed[j] || ctx[j].dies || snapshot[j].action.kind != Action::Idle) {
                return;
            }
            const Candidate cand{distance_sq(snapshot[i].pos, snapshot[j].pos), j};
            if (cand < picked[0]) {
                picked[1] = picked[0];
                picked[0] = cand;
            }
            else if (cand < picked[1]) {
                picked[1] = cand;
            }
        });
        if (picked[1] == none) {
            continue;
        }
        const std::size_t a = picked[0].second;
        const std::size_t b = picked[1].second;
        committed[i] = committed[a] = committed[b] = true;
        teams.push_back({i, a, b});
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (intent[i] != Action::Reproduction || committed[i]) {
            continue;
        }
        Candidate best = none;
        for (std::size_t j = 0; j < n; ++j) {
            if (committed[j] || intent[j] != Action::Reproduction ||
                snapshot[j].sex == snapshot[i].sex || village[j].village != village[i].village) {
                continue;
            }
            const Candidate cand{distance_sq(snapshot[i].pos, snapshot[j].pos), j};
            if (cand < best) {
                best = cand;
            }
        }
        if (best == none) {
            continue;
        }
        committed[i] = committed[best.second] = true;
        pairs.push_back({i, best.second});
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (ctx[i].dies) {
            chosen[i] = ActionState::single(Action::Dead);
        }
        else if (!committed[i]) {
            chosen[i] = ActionState::single(solo_action(snapshot[i], ctx[i], p));
        }
    }
    for (const auto& t : teams) {
        const auto& s = snapshot;
        chosen[t[0]] = ActionState::cooperation(s[t[1]].id, s[t[2]].id);
        chosen[t[1]] = ActionState::cooperation(s[t[0]].id, s[t[2]].id);
        chosen[t[2]] = ActionState::cooperation(s[t[0]].id, s[t[1]].id);
    }
    for (const auto& pr : pairs) {
        chosen[pr[0]] = ActionState::reproduction(snapshot[pr[1]].id);
        chosen[pr[1]] = ActionState::reproduction(snapshot[pr[0]].id);
    }

    // Commit. `next` starts as the snapshot; only this section mutates state.
    std::vector<Agent> next = snapshot;
    for (std::size_t i = 0; i < n; ++i) {
        next[i].action = chosen[i];
    }

    int q = 0;
    for (const auto& t : teams) {
        auto rng = Rng::substream(world.seed, Stream::Speaker, world.t, snapshot[t[0]].id);
        const auto ev = execute_cooperation({&next[t[0]], &next[t[1]], &next[t[2]]}, world.env,
                                            world.ledger, ep.food_radius, p.food_energy, rng, q);
        if (!ev) {
            ++stats.aborted_cooperations;
            for (const std::size_t k : t) {
                next[k].action = ActionState::single(Action::Idle);
            }
            continue;
        }
        ++q;
        ++stats.cooperation_events;
        if (ev->degenerate_allocation) {
            ++stats.degenerate_allocations;
        }
    }

    std::vector<Agent> newborns;
    const double br = birth_rate(population, p.carrying_capacity, p.fertility);
    for (const auto& pr : pairs) {
        Agent& a = next[pr[0]];
        Agent& b = next[pr[1]];
        auto rng = Rng::substream(world.seed, Stream::Birth, world.t, a.id);
        if (!rng.bernoulli(br)) {
            continue;
        }
        const double advantage = population_percentile(0.5 * (a.alpha + b.alpha), snapshot);
        const int count = 1 + (rng.bernoulli(advantage) ? 1 : 0);
        a.energy = std::max(0.0, a.energy - p.reproduction_cost);
        b.energy = std::max(0.0, b.energy - p.reproduction_cost);
        const Vec2 home = ep.arena.clamp(0.5 * (a.pos + b.pos));
        for (int k = 0; k < count; ++k) {
            auto orng = Rng::substream(world.seed, Stream::Offspring, world.t, a.id, k);
            Agent child;
            child.id = world.next_id++;
            child.sex = orng.bernoulli(0.5) ? Sex::Female : Sex::Male;
            child.alpha = make_offspring(a.alpha, b.alpha, p.capability, orng);
            child.energy = p.initial_energy;
            child.pos = home;
            child.action = ActionState::single(Action::Idle);
            child.birth_step = world.t + 1;
            newborns.push_back(child);
        }
    }
    stats.births = static_cast<int>(newborns.size());

    // Movement and energy drain.
    for (std::size_t i = 0; i < n; ++i) {
        Agent& a = next[i];
        if (!a.alive()) {
            continue;
        }
        bool moved = false;
        if (a.action.kind == Action::MovingToVillage) {
            const auto vd = distance_to_village(a.pos, world.env.villages);
            const auto& v = *std::find_if(world.env.villages.begin(), world.env.villages.end(),
                                          [&](const Village& x) { return x.id == vd.village; });
            a.pos = move_step(a.pos, v.center, ep.speed, ep.arena);
            moved = true;
        }
        else if (a.action.kind == Action::Idle) {
            // Idle agents forage: head for the nearest food seen at the start of the step.
            if (!nearest_food(a.pos, food_snapshot, ep.food_radius)) {
                if (const auto f = nearest_food(a.pos, food_snapshot)) {
                    a.pos = move_step(a.pos, food_snapshot[*f].pos, ep.speed, ep.arena);
                    moved = true;
                }
            }
        }
        a.energy -= p.metabolic_cost + (moved ? p.movement_cost : 0.0);
        a.energy = std::max(0.0, a.energy);
    }

    world.agents.clear();
    for (auto& a : next) {
        if (a.alive()) {
            world.agents.push_back(a);
        }
        else {
            ++stats.deaths;
        }
    }
    world.agents.insert(world.agents.end(), newborns.begin(), newborns.end());

    stats.food_restored = regenerate_food(world.env, world.seed, world.t, ep.regen_rate);

    world.t += 1;
    if (world.t % p.age_tick_interval == 0) {
        for (auto& a : world.agents) {
            ++a.age;
        }
    }

    world.total_births += stats.births;
    world.total_deaths += stats.deaths;
    world.degenerate_allocations += stats.degenerate_allocations;
    world.last_step = stats;
}

} // namespace habm
