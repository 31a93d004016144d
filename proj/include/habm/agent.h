#pragma once

#include "habm/geometry.h"

#include <array>
#include <cstdint>
#include <string_view>

namespace habm
{

using AgentId = std::int64_t;
inline constexpr AgentId no_agent = -1;

enum class Sex : std::uint8_t
{
    Male,
    Female,
};

enum class Action : std::uint8_t
{
    Dead,
    MovingToVillage,
    Idle,
    WaitRepro,
    Reproduction,
    Cooperation,
};

std::string_view to_string(Action a);

/// Current action plus the partners of a joint action. Reproduction uses one
/// partner slot, cooperation uses both.
struct ActionState {
    Action kind = Action::Idle;
    std::array<AgentId, 2> partners{no_agent, no_agent};

    static ActionState single(Action a)
    {
        return {a, {no_agent, no_agent}};
    }
    static ActionState reproduction(AgentId partner)
    {
        return {Action::Reproduction, {partner, no_agent}};
    }
    static ActionState cooperation(AgentId a, AgentId b)
    {
        return {Action::Cooperation, {a, b}};
    }

    bool operator==(const ActionState&) const = default;
};

struct Agent {
    AgentId id = 0;
    Sex sex = Sex::Male;
    int age = 0; ///< age ticks, advanced every age_tick_interval steps
    double energy = 0.0;
    Vec2 pos;
    double alpha = 100.0; ///< ability, static after birth
    ActionState action;
    std::int64_t birth_step = 0;

    bool alive() const
    {
        return action.kind != Action::Dead;
    }

    bool operator==(const Agent&) const = default;
};

} // namespace habm
