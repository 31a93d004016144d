#include "habm/environment.h"
#include "habm/rng.h"

#include <algorithm>
#include <cassert>
#include <limits>

namespace habm
{

std::string_view to_string(Action a)
{
    switch (a) {
    case Action::Dead:
        return "DEAD";
    case Action::MovingToVillage:
        return "MOVING_TO_VILLAGE";
    case Action::Idle:
        return "IDLE";
    case Action::WaitRepro:
        return "WAIT_REPRO";
    case Action::Reproduction:
        return "REPRODUCTION";
    case Action::Cooperation:
        return "COOPERATION";
    }
    return "?";
}

Vec2 Arena::clamp(Vec2 p) const
{
    return {std::clamp(p.x, 0.0, width), std::clamp(p.y, 0.0, height)};
}

std::vector<Village> EnvParams::default_villages()
{
    return {
        {1, {20.0, 20.0}, 10.0}, {2, {80.0, 20.0}, 10.0}, {3, {50.0, 50.0}, 10.0},
        {4, {20.0, 80.0}, 10.0}, {5, {80.0, 80.0}, 10.0},
    };
}

VillageDistance distance_to_village(Vec2 pos, std::span<const Village> villages)
{
    assert(!villages.empty());
    VillageDistance best{villages.front().id, std::numeric_limits<double>::infinity(), false};
    double best_radius = 0.0;
    for (const auto& v : villages) {
        const double d = distance(pos, v.center);
        if (d < best.distance || (d == best.distance && v.id < best.village)) {
            best.village = v.id;
            best.distance = d;
            best_radius = v.radius;
        }
    }
    best.inside = best.distance <= best_radius;
    return best;
}

SensedNeighborhood sense(Vec2 pos, AgentId self, std::span<const Agent> agents,
                         const Environment& env, double neighbor_radius, double food_radius)
{
    SensedNeighborhood s;
    const double r2 = neighbor_radius * neighbor_radius;
    for (const auto& a : agents) {
        if (a.id == self || a.action.kind != Action::Idle) {
            continue;
        }
        if (distance_sq(a.pos, pos) <= r2) {
            ++s.idle_neighbors;
        }
    }
    const double f2 = food_radius * food_radius;
    for (const auto& f : env.food) {
        if (f.available && distance_sq(f.pos, pos) <= f2) {
            ++s.food_in_reach;
        }
    }
    const auto vd = distance_to_village(pos, env.villages);
    s.village_distance = vd.distance;
    s.nearest_village = vd.village;
    s.inside_village = vd.inside;
    return s;
}

std::optional<std::size_t> nearest_food(Vec2 pos, std::span<const FoodItem> food, double radius)
{
    std::optional<std::size_t> best;
    double best_d2 = radius * radius;
    for (std::size_t i = 0; i < food.size(); ++i) {
        if (!food[i].available) {
            continue;
        }
        const double d2 = distance_sq(food[i].pos, pos);
        if (d2 < best_d2 || (d2 == best_d2 && !best)) {
            best = i;
            best_d2 = d2;
        }
    }
    return best;
}

std::optional<std::size_t> nearest_food(Vec2 pos, std::span<const FoodItem> food)
{
    return nearest_food(pos, food, std::numeric_limits<double>::max());
}

NeighborIndex::NeighborIndex(const Arena& arena, double cell_size, std::span<const Vec2> points)
    : m_cell(cell_size > 0.0 ? cell_size : 1.0)
    , m_nx(std::max(1, static_cast<int>(std::ceil(arena.width / m_cell))))
    , m_ny(std::max(1, static_cast<int>(std::ceil(arena.height / m_cell))))
    , m_points(points.begin(), points.end())
    , m_start(static_cast<std::size_t>(m_nx * m_ny) + 1, 0)
    , m_items(points.size())
{
    std::vector<std::size_t> cell(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        cell[i] = static_cast<std::size_t>(cell_y(points[i].y) * m_nx + cell_x(points[i].x));
        ++m_start[cell[i] + 1];
    }
    for (std::size_t c = 1; c < m_start.size(); ++c) {
        m_start[c] += m_start[c - 1];
    }
    std::vector<std::size_t> fill(m_start.begin(), m_start.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) {
        m_items[fill[cell[i]]++] = i;
    }
}

Vec2 move_step(Vec2 pos, Vec2 target, double speed, const Arena& arena)
{
    assert(speed > 0.0);
    const Vec2 delta = target - pos;
    const double dist = norm(delta);
    if (dist <= speed) {
        return arena.clamp(target);
    }
    return arena.clamp(pos + (speed / dist) * delta);
}

Vec2 random_position(const Arena& arena, Rng& rng)
{
    const double x = rng.uniform() * arena.width;
    const double y = rng.uniform() * arena.height;
    return {x, y};
}

Environment make_environment(const EnvParams& params, std::uint64_t seed)
{
    Environment env{params.arena, params.villages, {}};
    env.food.reserve(static_cast<std::size_t>(params.food_count));
    for (int i = 0; i < params.food_count; ++i) {
        auto rng = Rng::substream(seed, Stream::FoodInit, i);
        env.food.push_back({i, random_position(params.arena, rng), true});
    }
    return env;
}

int regenerate_food(Environment& env, std::uint64_t seed, std::int64_t step, double regen_rate)
{
    assert(regen_rate >= 0.0 && regen_rate <= 1.0);
    int restored = 0;
    for (auto& f : env.food) {
        if (f.available) {
            continue;
        }
        auto rng = Rng::substream(seed, Stream::FoodRegen, step, f.id);
        if (rng.bernoulli(regen_rate)) {
            f.pos = random_position(env.arena, rng);
            f.available = true;
            ++restored;
        }
    }
    return restored;
}

} // namespace habm
