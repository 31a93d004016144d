#pragma once

#include "habm/agent.h"
#include "habm/geometry.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace habm
{

struct Arena {
    double width = 100.0;
    double height = 100.0;

    bool contains(Vec2 p) const
    {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }
    Vec2 clamp(Vec2 p) const;
};

struct Village {
    int id = 1; ///< 1-based
    Vec2 center;
    double radius = 10.0;
};

struct FoodItem {
    int id = 0;
    Vec2 pos;
    bool available = true;
};

struct SensedNeighborhood {
    int idle_neighbors = 0; ///< nu
    int food_in_reach = 0;  ///< mu
    double village_distance = 0.0;
    int nearest_village = 1;
    bool inside_village = false;
};

struct VillageDistance {
    int village = 1; ///< id of the nearest village
    double distance = 0.0;
    bool inside = false;
};

/// Configurable world layout. None of these values come from the model
/// description; they only have to keep the resource supply and the villages
/// reachable.
struct EnvParams {
    Arena arena;
    std::vector<Village> villages = default_villages();
    int food_count = 150;
    double food_radius = 5.0;     ///< rho
    double neighbor_radius = 5.0; ///< radius for counting idle neighbours
    double speed = 1.0;
    double regen_rate = 0.05;

    static std::vector<Village> default_villages();
};

struct Environment {
    Arena arena;
    std::vector<Village> villages;
    std::vector<FoodItem> food;
};

/// Nearest village by distance to its centre; ties go to the lower id.
/// Inside iff the distance is at most that village's radius.
VillageDistance distance_to_village(Vec2 pos, std::span<const Village> villages);

/// Counts idle agents (other than `self`) within `neighbor_radius` and
/// available food within `food_radius`. Both bounds are inclusive.
SensedNeighborhood sense(Vec2 pos, AgentId self, std::span<const Agent> agents,
                         const Environment& env, double neighbor_radius, double food_radius);

/// Index of the nearest available food item within `radius`, lowest index on ties.
std::optional<std::size_t> nearest_food(Vec2 pos, std::span<const FoodItem> food, double radius);

/// Nearest available food anywhere in the arena.
std::optional<std::size_t> nearest_food(Vec2 pos, std::span<const FoodItem> food);

/// Uniform bucket grid over a fixed set of points for radius queries.
class NeighborIndex
{
public:
    NeighborIndex(const Arena& arena, double cell_size, std::span<const Vec2> points);

    /// Calls f(i) for every point i with |points[i] - p| <= radius. Visit order
    /// is unspecified.
    template <class F>
    void for_each_within(Vec2 p, double radius, F&& f) const
    {
        const double r2 = radius * radius;
        const int reach = static_cast<int>(std::ceil(radius / m_cell));
        const int cx = cell_x(p.x);
        const int cy = cell_y(p.y);
        for (int y = std::max(0, cy - reach); y <= std::min(m_ny - 1, cy + reach); ++y) {
            for (int x = std::max(0, cx - reach); x <= std::min(m_nx - 1, cx + reach); ++x) {
                const auto c = static_cast<std::size_t>(y * m_nx + x);
                for (std::size_t k = m_start[c]; k < m_start[c + 1]; ++k) {
                    const std::size_t i = m_items[k];
                    if (distance_sq(m_points[i], p) <= r2) {
                        f(i);
                    }
                }
            }
        }
    }

private:
    int cell_x(double x) const
    {
        return std::clamp(static_cast<int>(x / m_cell), 0, m_nx - 1);
    }
    int cell_y(double y) const
    {
        return std::clamp(static_cast<int>(y / m_cell), 0, m_ny - 1);
    }

    double m_cell;
    int m_nx;
    int m_ny;
    std::vector<Vec2> m_points;
    std::vector<std::size_t> m_start;
    std::vector<std::size_t> m_items;
};

/// Advance `min(speed, |target - pos|)` toward target, clamped to the arena.
Vec2 move_step(Vec2 pos, Vec2 target, double speed, const Arena& arena);

Vec2 random_position(const Arena& arena, class Rng& rng);

Environment make_environment(const EnvParams& params, std::uint64_t seed);

/// Each consumed item independently respawns, with probability `regen_rate`,
/// at a fresh uniform position. Draws come from a per-(step, item) substream.
/// Returns the number of items restored.
int regenerate_food(Environment& env, std::uint64_t seed, std::int64_t step, double regen_rate);

} // namespace habm
