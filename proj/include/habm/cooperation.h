#pragma once

#include "habm/agent.h"
#include "habm/environment.h"
#include "habm/rng.h"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace habm
{

enum class Role
{
    Speaker,
    Listener,
};

/// Softmax over abilities, shifted by the maximum before exponentiation
/// (abilities sit near 100, where exp() overflows a double).
std::vector<double> speaker_probabilities(std::span<const double> alphas);

/// Inverse-CDF sample from `speaker_probabilities` using one uniform draw.
std::size_t select_speaker(std::span<const double> alphas, Rng& rng);

/// Ascending ranks divided by n, ties sharing the mean of their positions.
std::vector<double> percentile_ranks(std::span<const double> alphas);

/// 0.5 + 0.5 R for the speaker, 0.5 R for a listener.
double expected_dominance(double rank, Role role);

struct ListenerTerm {
    double alpha;
    double dominance;
};

/// d = 1 + mean over listeners of (alpha_s - alpha_l)(d_s - d_l). Not clamped.
double consensus_coefficient(double speaker_alpha, double speaker_dominance,
                             std::span<const ListenerTerm> listeners);

struct ShareAllocation {
    std::vector<double> shares;
    bool degenerate = false; ///< a numerator 1 + d*alpha was <= 0; shares fell back to uniform
};

/// r_i = (1 + d alpha_i) / sum_z (1 + d alpha_z).
ShareAllocation allocate_shares(std::span<const double> alphas, double consensus);

/// Cumulative listener -> speaker endorsement counts, keyed by agent id.
/// Stored sparsely; absent pairs have weight 0 and the diagonal is never written.
class InteractionLedger
{
public:
    using Edge = std::pair<AgentId, AgentId>;

    void endorse(AgentId listener, AgentId speaker);

    std::uint64_t weight(AgentId listener, AgentId speaker) const;
    std::uint64_t total() const
    {
        return m_total;
    }
    std::uint64_t events() const
    {
        return m_events;
    }
    void count_event()
    {
        ++m_events;
    }
    const std::map<Edge, std::uint64_t>& edges() const
    {
        return m_edges;
    }

    bool operator==(const InteractionLedger&) const = default;

private:
    std::map<Edge, std::uint64_t> m_edges;
    std::uint64_t m_total = 0;
    std::uint64_t m_events = 0;
};

struct CooperationEvent {
    int index = 0; ///< q, position within the step
    std::array<AgentId, 3> team{};
    AgentId speaker = no_agent;
    std::array<AgentId, 2> listeners{};
    double consensus = 1.0;
    std::array<double, 3> shares{};
    double energy_pool = 0.0;
    bool degenerate_allocation = false;
};

/// Runs one cooperation event for a team whose first member is the initiator.
/// Consumes the nearest available food item within `food_radius` of the
/// initiator, splits `food_energy` by ability-weighted shares and records one
/// endorsement per listener. Returns nullopt (and touches nothing) when no
/// food is in reach.
std::optional<CooperationEvent> execute_cooperation(std::array<Agent*, 3> team, Environment& env,
                                                    InteractionLedger& ledger, double food_radius,
                                                    double food_energy, Rng& rng, int event_index);

} // namespace habm
