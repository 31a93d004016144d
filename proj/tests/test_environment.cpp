#include "habm/environment.h"
#include "habm/rng.h"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace habm;

namespace
{

Agent idle_at(AgentId id, Vec2 p)
{
    Agent a;
    a.id = id;
    a.pos = p;
    a.energy = 5.0;
    a.action = ActionState::single(Action::Idle);
    return a;
}

} // namespace

TEST_SUITE("environment")
{

TEST_CASE("village distance")
{
    const auto villages = EnvParams::default_villages();

    SUBCASE("at a centre")
    {
        const auto d = distance_to_village({20.0, 20.0}, villages);
        CHECK(d.village == 1);
        CHECK(d.distance == 0.0);
        CHECK(d.inside);
    }
    SUBCASE("boundary is inside")
    {
        const auto d = distance_to_village({30.0, 20.0}, villages);
        CHECK(d.village == 1);
        CHECK(d.distance == doctest::Approx(10.0));
        CHECK(d.inside);
        CHECK_FALSE(distance_to_village({30.0 + 1e-9, 20.0}, villages).inside);
    }
    SUBCASE("ties go to the lower id")
    {
        const std::vector<Village> vs{{1, {90.0, 90.0}, 5.0}, {2, {0.0, 0.0}, 5.0},
                                      {3, {10.0, 0.0}, 5.0}};
        const auto d = distance_to_village({5.0, 3.0}, vs);
        CHECK(d.village == 2);
        const std::vector<Village> swapped{vs[0], vs[2], vs[1]};
        CHECK(distance_to_village({5.0, 3.0}, swapped).village == 2);
    }
}

TEST_CASE("sensing")
{
    Environment env;
    env.villages = EnvParams::default_villages();

    SUBCASE("alone")
    {
        const std::vector<Agent> agents{idle_at(0, {40.0, 40.0})};
        const auto s = sense(agents[0].pos, 0, agents, env, 5.0, 5.0);
        CHECK(s.idle_neighbors == 0);
        CHECK(s.food_in_reach == 0);
    }
    SUBCASE("idle neighbours within the radius")
    {
        std::vector<Agent> agents{idle_at(0, {40.0, 40.0}), idle_at(1, {43.0, 40.0}),
                                  idle_at(2, {40.0, 44.0}), idle_at(3, {37.0, 37.0}),
                                  idle_at(4, {46.0, 40.0})};
        auto busy = idle_at(5, {41.0, 40.0});
        busy.action = ActionState::single(Action::WaitRepro);
        agents.push_back(busy);
        const auto s = sense(agents[0].pos, 0, agents, env, 5.0, 5.0);
        CHECK(s.idle_neighbors == 3);
    }
    SUBCASE("consumed food is not counted")
    {
        env.food = {{0, {41.0, 40.0}, true}, {1, {40.0, 43.0}, true}, {2, {39.0, 39.0}, false},
                    {3, {50.0, 50.0}, true}};
        const std::vector<Agent> agents{idle_at(0, {40.0, 40.0})};
        const auto s = sense(agents[0].pos, 0, agents, env, 5.0, 5.0);
        CHECK(s.food_in_reach == 2);
        REQUIRE(nearest_food({40.0, 40.0}, env.food, 5.0));
        CHECK(*nearest_food({40.0, 40.0}, env.food, 5.0) == 0);
        CHECK(*nearest_food({48.0, 48.0}, env.food) == 3);
    }
}

TEST_CASE("grid index agrees with brute force")
{
    Arena arena;
    auto rng = Rng(99);
    std::vector<Vec2> pts;
    for (int i = 0; i < 500; ++i) {
        pts.push_back(random_position(arena, rng));
    }
    pts.push_back({0.0, 0.0});
    pts.push_back({100.0, 100.0});
    const NeighborIndex index(arena, 5.0, pts);
    for (int q = 0; q < 200; ++q) {
        const Vec2 p = random_position(arena, rng);
        const double r = 0.5 + 9.0 * rng.uniform();
        std::vector<std::size_t> got;
        index.for_each_within(p, r, [&](std::size_t i) { got.push_back(i); });
        std::sort(got.begin(), got.end());
        std::vector<std::size_t> want;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (distance_sq(pts[i], p) <= r * r) {
                want.push_back(i);
            }
        }
        CHECK(got == want);
    }
}

TEST_CASE("movement")
{
    Arena arena;
    CHECK(move_step({5.0, 5.0}, {5.0, 5.0}, 1.0, arena) == Vec2{5.0, 5.0});

    const Vec2 start{10.0, 10.0};
    const Vec2 target{16.0, 18.0};
    const Vec2 next = move_step(start, target, 3.0, arena);
    CHECK(distance(next, target) == doctest::Approx(7.0).epsilon(1e-12));

    CHECK(move_step({1.0, 1.0}, {1.0, 1.5}, 3.0, arena) == Vec2{1.0, 1.5});
    const Vec2 out = move_step({99.5, 50.0}, {120.0, 50.0}, 2.0, arena);
    CHECK(out.x == 100.0);
    CHECK(arena.contains(out));
}

TEST_CASE("food regeneration")
{
    Environment env;
    for (int i = 0; i < 1000; ++i) {
        env.food.push_back({i, {50.0, 50.0}, false});
    }
    SUBCASE("rate 0")
    {
        CHECK(regenerate_food(env, 3, 1, 0.0) == 0);
    }
    SUBCASE("rate 1")
    {
        CHECK(regenerate_food(env, 3, 1, 1.0) == 1000);
        for (const auto& f : env.food) {
            CHECK(f.available);
            CHECK(env.arena.contains(f.pos));
        }
    }
    SUBCASE("rate 0.5 is binomial")
    {
        const int n = regenerate_food(env, 3, 1, 0.5);
        CHECK(std::abs(n - 500) <= 5.0 * std::sqrt(250.0));
    }
    SUBCASE("available items are left alone")
    {
        env.food[0].available = true;
        env.food[0].pos = {1.0, 2.0};
        regenerate_food(env, 3, 1, 1.0);
        CHECK(env.food[0].pos == Vec2{1.0, 2.0});
    }
}

TEST_CASE("initial layout")
{
    EnvParams p;
    const auto a = make_environment(p, 11);
    const auto b = make_environment(p, 11);
    REQUIRE(a.food.size() == static_cast<std::size_t>(p.food_count));
    for (std::size_t i = 0; i < a.food.size(); ++i) {
        CHECK(a.food[i].pos == b.food[i].pos);
        CHECK(a.food[i].available);
        CHECK(a.arena.contains(a.food[i].pos));
    }
    CHECK(a.villages.size() == 5);
}

}
