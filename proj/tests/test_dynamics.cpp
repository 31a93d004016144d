#include "habm/dynamics.h"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace habm;

namespace
{

Agent waiting(AgentId id, Sex sex, Vec2 pos, double energy)
{
    Agent a;
    a.id = id;
    a.sex = sex;
    a.pos = pos;
    a.energy = energy;
    a.action = ActionState::single(Action::WaitRepro);
    return a;
}

void check_invariants(const World& w)
{
    for (std::size_t i = 0; i < w.agents.size(); ++i) {
        const auto& a = w.agents[i];
        CHECK(a.alive());
        CHECK(a.energy >= 0.0);
        CHECK(a.alpha >= 1.0);
        CHECK(w.env.arena.contains(a.pos));
        if (i > 0) {
            CHECK(w.agents[i - 1].id < a.id);
        }
    }
    for (const auto& f : w.env.food) {
        CHECK(w.env.arena.contains(f.pos));
    }
    std::uint64_t mass = 0;
    for (const auto& [e, wt] : w.ledger.edges()) {
        CHECK(e.first != e.second);
        mass += wt;
    }
    CHECK(mass == w.ledger.total());
    CHECK(w.ledger.total() == 2 * w.ledger.events());
}

} // namespace

TEST_SUITE("dynamics")
{

TEST_CASE("birth rate")
{
    CHECK(birth_rate(100.0, 100.0, 0.8) == 0.0);
    CHECK(birth_rate(0.0, 100.0, 0.8) == 0.8);
    CHECK(birth_rate(50.0, 100.0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(birth_rate(150.0, 100.0, 0.5) == 0.0);
}

TEST_CASE("mortality")
{
    ModelParams p;
    Agent a;
    a.energy = 0.0;
    CHECK(death_probability(a, p) == 1.0);
    auto rng = Rng(1);
    CHECK(death_check(a, rng, p));

    p.hazard_base = 0.0;
    a.energy = 5.0;
    a.age = 5;
    CHECK(death_probability(a, p) == 0.0);
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(death_check(a, rng, p));
    }

    p.hazard_base = 0.001;
    p.hazard_age = 0.05;
    a.age = 12;
    CHECK(hazard(12, p) == doctest::Approx(0.151).epsilon(1e-14));
    CHECK(death_probability(a, p) == doctest::Approx(1.0 - std::exp(-0.151)).epsilon(1e-14));
    CHECK(hazard(9, p) == 0.001);
    CHECK(hazard(10, p) == doctest::Approx(0.051));
}

TEST_CASE("reproduction predicate")
{
    const auto villages = EnvParams::default_villages();
    const auto i = waiting(1, Sex::Male, {20.0, 21.0}, 15.0);
    const auto j = waiting(2, Sex::Female, {22.0, 18.0}, 12.0);
    CHECK(reproduction_predicate(i, j, villages));
    CHECK(reproduction_predicate(j, i, villages));

    auto k = j;
    k.energy = 10.0;
    CHECK_FALSE(reproduction_predicate(i, k, villages));

    k = j;
    k.sex = Sex::Male;
    CHECK_FALSE(reproduction_predicate(i, k, villages));

    k = j;
    k.pos = {80.0, 20.0};
    CHECK_FALSE(reproduction_predicate(i, k, villages));

    k = j;
    k.pos = {35.0, 35.0};
    CHECK_FALSE(reproduction_predicate(i, k, villages));

    k = j;
    k.action = ActionState::single(Action::Idle);
    CHECK_FALSE(reproduction_predicate(i, k, villages));
}

TEST_CASE("cooperation predicate")
{
    Agent a;
    SensedNeighborhood s;
    a.energy = 5.0;
    s.idle_neighbors = 2;
    s.food_in_reach = 1;
    CHECK(cooperation_predicate(a, s));
    a.energy = 10.0;
    CHECK_FALSE(cooperation_predicate(a, s));
    a.energy = 5.0;
    s.idle_neighbors = 1;
    s.food_in_reach = 3;
    CHECK_FALSE(cooperation_predicate(a, s));
    s.idle_neighbors = 4;
    s.food_in_reach = 0;
    CHECK_FALSE(cooperation_predicate(a, s));
}

TEST_CASE("action priority")
{
    ModelParams p;
    Agent a;
    ActionContext ctx;

    a.energy = 8.0;
    CHECK(select_action(a, ctx, p) == Action::Idle);

    a.energy = 15.0;
    ctx.sensed.inside_village = true;
    CHECK(select_action(a, ctx, p) == Action::WaitRepro);
    ctx.sensed.inside_village = false;
    CHECK(select_action(a, ctx, p) == Action::MovingToVillage);

    ctx.has_mate = true;
    CHECK(select_action(a, ctx, p) == Action::Reproduction);

    a.energy = 5.0;
    a.age = 12;
    ctx = {};
    ctx.sensed.idle_neighbors = 2;
    ctx.sensed.food_in_reach = 1;
    CHECK(select_action(a, ctx, p) == Action::Cooperation);
    ctx.dies = true;
    CHECK(select_action(a, ctx, p) == Action::Dead);
}

TEST_CASE("a lone agent without food starves")
{
    ModelParams p;
    p.initial_population = 1;
    p.env.food_count = 0;
    p.hazard_base = 0.0;
    auto w = make_world(p, 3);
    REQUIRE(w.population() == 1);
    double last = w.agents[0].energy;
    for (int t = 0; t < 2000 && w.population() > 0; ++t) {
        step(w);
        if (w.population() > 0) {
            CHECK(w.agents[0].energy < last);
            last = w.agents[0].energy;
        }
    }
    CHECK(w.population() == 0);
    CHECK(w.total_deaths == 1);
    CHECK(w.total_births == 0);
}

TEST_CASE("no births at carrying capacity")
{
    ModelParams p;
    p.initial_population = 60;
    p.carrying_capacity = 60;
    p.metabolic_cost = 0.0;
    p.movement_cost = 0.0;
    p.hazard_base = 0.0;
    auto w = make_world(p, 9);
    for (int t = 0; t < 1000; ++t) {
        step(w);
        REQUIRE(w.population() == 60);
    }
    CHECK(w.total_births == 0);
    CHECK(w.total_deaths == 0);
}

TEST_CASE("determinism")
{
    ModelParams p;
    auto a = make_world(p, 2024);
    auto b = make_world(p, 2024);
    for (int t = 0; t < 1000; ++t) {
        step(a);
        step(b);
    }
    CHECK(a.t == 1000);
    CHECK(a.agents == b.agents);
    CHECK(a.ledger == b.ledger);
    CHECK(a.total_births == b.total_births);
    CHECK(a.ledger.total() > 0);

    auto c = make_world(p, 2025);
    for (int t = 0; t < 1000; ++t) {
        step(c);
    }
    CHECK_FALSE(c.agents == a.agents);
}

TEST_CASE("agent order on entry does not matter")
{
    ModelParams p;
    auto a = make_world(p, 77);
    for (int t = 0; t < 300; ++t) {
        step(a);
    }
    auto b = a;
    std::mt19937 shuffle_rng(1);
    for (int t = 0; t < 200; ++t) {
        std::shuffle(b.agents.begin(), b.agents.end(), shuffle_rng);
        step(a);
        step(b);
        REQUIRE(a.agents == b.agents);
    }
    CHECK(a.ledger == b.ledger);
}

TEST_CASE("state invariants hold along a run")
{
    ModelParams p;
    auto w = make_world(p, 5);
    for (int t = 1; t <= 3000; ++t) {
        step(w);
        if (t % 250 == 0) {
            check_invariants(w);
        }
    }
    CHECK(w.population() > 0);
    for (const auto& a : w.agents) {
        const auto lived = (w.t - a.birth_step) / p.age_tick_interval;
        CHECK(a.age >= lived);
        CHECK(a.age <= lived + 1);
    }
}

TEST_CASE("parameter validation")
{
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    p.fertility = 1.0;
    CHECK_THROWS(p.validate());
    p = {};
    p.carrying_capacity = 0.0;
    CHECK_THROWS(p.validate());
    p = {};
    p.age_tick_interval = 0;
    CHECK_THROWS(p.validate());
}

}
