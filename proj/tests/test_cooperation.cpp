#include "habm/cooperation.h"
#include "habm/rng.h"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

using namespace habm;

namespace
{

std::vector<double> v(std::initializer_list<double> xs)
{
    return xs;
}

struct Team {
    std::array<Agent, 3> agents;
    Environment env;

    explicit Team(std::array<double, 3> alphas)
    {
        for (int i = 0; i < 3; ++i) {
            agents[i].id = 10 + i;
            agents[i].alpha = alphas[i];
            agents[i].energy = 5.0;
            agents[i].pos = {50.0 + i, 50.0};
            agents[i].action = ActionState::single(Action::Cooperation);
        }
        env.food = {{0, {52.0, 52.0}, true}, {1, {50.5, 50.0}, true}, {2, {90.0, 90.0}, true}};
    }

    std::array<Agent*, 3> ptrs()
    {
        return {&agents[0], &agents[1], &agents[2]};
    }
};

} // namespace

TEST_SUITE("cooperation")
{

TEST_CASE("speaker probabilities")
{
    const auto eq = speaker_probabilities(v({7.0, 7.0, 7.0}));
    for (double p : eq) {
        CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }

    const auto p12 = speaker_probabilities(v({1.0, 2.0}));
    const double want0 = 1.0 / (1.0 + std::exp(1.0));
    CHECK(std::abs(p12[0] - want0) < 1e-9);
    CHECK(std::abs(p12[1] - (1.0 - want0)) < 1e-9);
    CHECK(std::abs(p12[0] - 0.2689414213699951) < 1e-9);

    const auto big = speaker_probabilities(v({1000.0, 1001.0}));
    CHECK(std::isfinite(big[0]));
    CHECK(std::abs(big[0] - p12[0]) < 1e-9);
    CHECK(std::abs(big[1] - p12[1]) < 1e-9);

    const auto s = speaker_probabilities(v({100.3, 97.1, 101.9, 99.0}));
    CHECK(std::accumulate(s.begin(), s.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("speaker sampling")
{
    SUBCASE("saturated")
    {
        for (std::uint64_t seed = 0; seed < 2000; ++seed) {
            auto rng = Rng(seed);
            CHECK(select_speaker(v({200.0, 100.0, 90.0}), rng) == 0);
        }
    }
    SUBCASE("frequency")
    {
        auto rng = Rng(4242);
        const int n = 100000;
        int ones = 0;
        for (int i = 0; i < n; ++i) {
            ones += select_speaker(v({1.0, 2.0}), rng) == 1 ? 1 : 0;
        }
        CHECK(std::abs(static_cast<double>(ones) / n - 0.7310585786300049) < 0.01);
    }
    SUBCASE("fixed seed, fixed sequence")
    {
        auto a = Rng(8);
        auto b = Rng(8);
        for (int i = 0; i < 100; ++i) {
            CHECK(select_speaker(v({1.0, 1.5, 0.5}), a) == select_speaker(v({1.0, 1.5, 0.5}), b));
        }
    }
}

TEST_CASE("percentile ranks")
{
    const auto r = percentile_ranks(v({1.0, 2.0, 3.0}));
    CHECK(r[0] == doctest::Approx(1.0 / 3.0));
    CHECK(r[1] == doctest::Approx(2.0 / 3.0));
    CHECK(r[2] == 1.0);

    for (double x : percentile_ranks(v({4.0, 4.0, 4.0}))) {
        CHECK(x == doctest::Approx(2.0 / 3.0));
    }
    CHECK(percentile_ranks(v({9.0}))[0] == 1.0);

    const auto mixed = percentile_ranks(v({3.0, 1.0, 3.0}));
    CHECK(mixed[1] == doctest::Approx(1.0 / 3.0));
    CHECK(mixed[0] == doctest::Approx(5.0 / 6.0));
    CHECK(mixed[2] == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("expected dominance")
{
    CHECK(expected_dominance(1.0, Role::Speaker) == 1.0);
    CHECK(expected_dominance(0.5, Role::Listener) == 0.25);
    CHECK(expected_dominance(1e-12, Role::Listener) < 1e-11);
    CHECK(expected_dominance(1e-12, Role::Speaker) >= 0.5);
}

TEST_CASE("consensus coefficient")
{
    SUBCASE("equal abilities are neutral")
    {
        const auto ranks = percentile_ranks(v({5.0, 5.0, 5.0}));
        const double ds = expected_dominance(ranks[0], Role::Speaker);
        const std::vector<ListenerTerm> ls{{5.0, expected_dominance(ranks[1], Role::Listener)},
                                           {5.0, expected_dominance(ranks[2], Role::Listener)}};
        CHECK(consensus_coefficient(5.0, ds, ls) == 1.0);
    }
    SUBCASE("two-agent team")
    {
        const auto ranks = percentile_ranks(v({2.0, 1.0}));
        CHECK(ranks[0] == 1.0);
        CHECK(ranks[1] == 0.5);
        const double ds = expected_dominance(ranks[0], Role::Speaker);
        const std::vector<ListenerTerm> ls{{1.0, expected_dominance(ranks[1], Role::Listener)}};
        CHECK(consensus_coefficient(2.0, ds, ls) == doctest::Approx(1.75).epsilon(1e-15));
    }
    SUBCASE("weaker speaker meets resistance")
    {
        const auto ranks = percentile_ranks(v({1.0, 2.0}));
        const double ds = expected_dominance(ranks[0], Role::Speaker);
        const std::vector<ListenerTerm> ls{{2.0, expected_dominance(ranks[1], Role::Listener)}};
        CHECK(consensus_coefficient(1.0, ds, ls) < 1.0);
    }
    CHECK_THROWS(consensus_coefficient(1.0, 1.0, std::span<const ListenerTerm>{}));
}

TEST_CASE("share allocation")
{
    for (double d : {0.0, 0.7, 1.75, -0.001}) {
        const auto s = allocate_shares(v({3.0, 3.0, 3.0}), d);
        for (double x : s.shares) {
            CHECK(x == doctest::Approx(1.0 / 3.0));
        }
    }
    const auto zero = allocate_shares(v({1.0, 50.0, 3.0}), 0.0);
    for (double x : zero.shares) {
        CHECK(x == doctest::Approx(1.0 / 3.0));
    }

    const auto s13 = allocate_shares(v({1.0, 3.0}), 1.0);
    CHECK(s13.shares[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(s13.shares[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK_FALSE(s13.degenerate);

    const auto deg = allocate_shares(v({100.0, 101.0, 102.0}), -0.5);
    CHECK(deg.degenerate);
    for (double x : deg.shares) {
        CHECK(x == doctest::Approx(1.0 / 3.0));
    }

    auto rng = Rng(3);
    for (int i = 0; i < 500; ++i) {
        const auto a = v({90.0 + 20.0 * rng.uniform(), 90.0 + 20.0 * rng.uniform(),
                          90.0 + 20.0 * rng.uniform()});
        const auto s = allocate_shares(a, 0.2 + 2.0 * rng.uniform());
        CHECK(std::abs(std::accumulate(s.shares.begin(), s.shares.end(), 0.0) - 1.0) < 1e-12);
        for (double x : s.shares) {
            CHECK(x > 0.0);
        }
    }
}

TEST_CASE("ledger")
{
    InteractionLedger l;
    l.endorse(1, 2);
    l.endorse(1, 2);
    l.endorse(3, 2);
    CHECK(l.weight(1, 2) == 2);
    CHECK(l.weight(2, 1) == 0);
    CHECK(l.total() == 3);
    CHECK_THROWS(l.endorse(4, 4));
    CHECK(l.weight(4, 4) == 0);
}

TEST_CASE("cooperation event")
{
    SUBCASE("equal abilities split evenly")
    {
        Team t({100.0, 100.0, 100.0});
        InteractionLedger ledger;
        auto rng = Rng(77);
        const auto ev = execute_cooperation(t.ptrs(), t.env, ledger, 5.0, 10.0, rng, 0);
        REQUIRE(ev);
        for (const auto& a : t.agents) {
            CHECK(a.energy == doctest::Approx(5.0 + 10.0 / 3.0));
        }
        CHECK(ledger.total() == 2);
        CHECK(ledger.events() == 1);
        for (AgentId l : ev->listeners) {
            CHECK(l != ev->speaker);
            CHECK(ledger.weight(l, ev->speaker) == 1);
        }
        CHECK(ev->consensus == 1.0);
        CHECK_FALSE(t.env.food[1].available);
        CHECK(t.env.food[0].available);
        CHECK(t.env.food[2].available);
    }
    SUBCASE("no food in reach aborts without side effects")
    {
        Team t({100.0, 101.0, 99.0});
        for (auto& f : t.env.food) {
            f.pos = {5.0, 5.0};
        }
        InteractionLedger ledger;
        auto rng = Rng(77);
        const auto before = t.agents;
        CHECK_FALSE(execute_cooperation(t.ptrs(), t.env, ledger, 5.0, 10.0, rng, 0));
        CHECK(ledger == InteractionLedger{});
        CHECK(t.agents == before);
        for (const auto& f : t.env.food) {
            CHECK(f.available);
        }
    }
    SUBCASE("same team and seed give the same outcome")
    {
        Team a({101.0, 99.5, 100.2});
        Team b({101.0, 99.5, 100.2});
        InteractionLedger la;
        InteractionLedger lb;
        auto ra = Rng(5);
        auto rb = Rng(5);
        const auto ea = execute_cooperation(a.ptrs(), a.env, la, 5.0, 10.0, ra, 0);
        const auto eb = execute_cooperation(b.ptrs(), b.env, lb, 5.0, 10.0, rb, 0);
        REQUIRE(ea);
        REQUIRE(eb);
        CHECK(ea->speaker == eb->speaker);
        CHECK(ea->shares == eb->shares);
        CHECK(la == lb);
        CHECK(a.agents == b.agents);
    }
    SUBCASE("energy is conserved and the ledger mass is twice the event count")
    {
        auto rng = Rng(12);
        InteractionLedger ledger;
        int events = 0;
        for (int k = 0; k < 300; ++k) {
            Team t({95.0 + 10.0 * rng.uniform(), 95.0 + 10.0 * rng.uniform(),
                    95.0 + 10.0 * rng.uniform()});
            const double before = t.agents[0].energy + t.agents[1].energy + t.agents[2].energy;
            if (execute_cooperation(t.ptrs(), t.env, ledger, 5.0, 10.0, rng, k)) {
                ++events;
                const double after = t.agents[0].energy + t.agents[1].energy + t.agents[2].energy;
                CHECK(after - before == doctest::Approx(10.0));
            }
        }
        CHECK(ledger.total() == 2u * static_cast<std::uint64_t>(events));
        for (const auto& [e, w] : ledger.edges()) {
            CHECK(e.first != e.second);
        }
    }
}

}
