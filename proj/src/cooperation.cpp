#include "habm/cooperation.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace habm
{

std::vector<double> speaker_probabilities(std::span<const double> alphas)
{
    assert(!alphas.empty());
    const double top = *std::max_element(alphas.begin(), alphas.end());
    std::vector<double> p(alphas.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        p[i] = std::exp(alphas[i] - top);
        sum += p[i];
    }
    for (auto& x : p) {
        x /= sum;
    }
    return p;
}

std::size_t select_speaker(std::span<const double> alphas, Rng& rng)
{
    const auto p = speaker_probabilities(alphas);
    const double draw = rng.uniform();
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            last_positive = i;
        }
        cum += p[i];
        if (draw < cum) {
            return i;
        }
    }
    // cum can land a rounding error short of 1
    return last_positive;
}

std::vector<double> percentile_ranks(std::span<const double> alphas)
{
    const std::size_t n = alphas.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return alphas[a] < alphas[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && alphas[order[j + 1]] == alphas[order[i]]) {
            ++j;
        }
        // positions i..j (0-based) hold ranks i+1..j+1
        const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = mean_rank / static_cast<double>(n);
        }
        i = j + 1;
    }
    return ranks;
}

double expected_dominance(double rank, Role role)
{
    return role == Role::Speaker ? 0.5 + 0.5 * rank : 0.5 * rank;
}

double consensus_coefficient(double speaker_alpha, double speaker_dominance,
                             std::span<const ListenerTerm> listeners)
{
    if (listeners.empty()) {
        throw std::invalid_argument("consensus_coefficient: at least one listener required");
    }
    double sum = 0.0;
    for (const auto& l : listeners) {
        sum += (speaker_alpha - l.alpha) * (speaker_dominance - l.dominance);
    }
    return 1.0 + sum / static_cast<double>(listeners.size());
}

ShareAllocation allocate_shares(std::span<const double> alphas, double consensus)
{
    assert(!alphas.empty());
    const std::size_t n = alphas.size();
    ShareAllocation out;
    out.shares.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double num = 1.0 + consensus * alphas[i];
        if (!(num > 0.0)) {
            out.degenerate = true;
        }
        out.shares[i] = num;
        sum += num;
    }
    if (out.degenerate) {
        std::fill(out.shares.begin(), out.shares.end(), 1.0 / static_cast<double>(n));
        return out;
    }
    for (auto& s : out.shares) {
        s /= sum;
    }
    return out;
}

void InteractionLedger::endorse(AgentId listener, AgentId speaker)
{
    if (listener == speaker) {
        throw std::invalid_argument("ledger: an agent cannot endorse itself");
    }
    ++m_edges[{listener, speaker}];
    ++m_total;
}

std::uint64_t InteractionLedger::weight(AgentId listener, AgentId speaker) const
{
    const auto it = m_edges.find({listener, speaker});
    return it == m_edges.end() ? 0 : it->second;
}

std::optional<CooperationEvent> execute_cooperation(std::array<Agent*, 3> team, Environment& env,
                                                    InteractionLedger& ledger, double food_radius,
                                                    double food_energy, Rng& rng, int event_index)
{
    const auto item = nearest_food(team[0]->pos, env.food, food_radius);
    if (!item) {
        return std::nullopt;
    }
    env.food[*item].available = false;

    std::array<double, 3> alphas{};
    CooperationEvent ev;
    ev.index = event_index;
    for (std::size_t k = 0; k < 3; ++k) {
        alphas[k] = team[k]->alpha;
        ev.team[k] = team[k]->id;
    }

    const std::size_t s = select_speaker(alphas, rng);
    const auto ranks = percentile_ranks(alphas);
    const double d_s = expected_dominance(ranks[s], Role::Speaker);

    std::array<ListenerTerm, 2> listeners{};
    std::size_t li = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        if (k == s) {
            continue;
        }
        listeners[li] = {alphas[k], expected_dominance(ranks[k], Role::Listener)};
        ev.listeners[li] = team[k]->id;
        ++li;
    }
    ev.speaker = team[s]->id;
    ev.consensus = consensus_coefficient(alphas[s], d_s, listeners);

    const auto alloc = allocate_shares(alphas, ev.consensus);
    ev.degenerate_allocation = alloc.degenerate;
    ev.energy_pool = food_energy;
    for (std::size_t k = 0; k < 3; ++k) {
        ev.shares[k] = alloc.shares[k];
        team[k]->energy += food_energy * alloc.shares[k];
    }

    for (const AgentId l : ev.listeners) {
        ledger.endorse(l, ev.speaker);
    }
    ledger.count_event();
    return ev;
}

} // namespace habm
