#pragma once

#include "habm/rng.h"

namespace habm
{

struct CapabilityParams {
    double mean = 100.0;
    double spread = 0.05;       ///< c: standard deviation of founder capability
    double heritability = 0.9;  ///< weight on the stronger parent
    double mutation_prob = 1.0; ///< p_m
    double mutation_sd = 1.0;   ///< u

    void validate() const;
};

inline constexpr double min_viable_capability = 1.0;

inline double viability_clamp(double c)
{
    return c < min_viable_capability ? min_viable_capability : c;
}

/// Founder capability ~ N(mean, spread), clamped to the viability floor.
double initial_capability(Rng& rng, const CapabilityParams& p);

/// h * max + (1 - h) * mean of the two parents.
double inherit(double parent1, double parent2, double heritability);

/// With probability p_m add N(0, u^2) noise, otherwise return `inherited`.
double mutate(double inherited, double mutation_prob, double mutation_sd, Rng& rng);

/// Offspring ability: inherit, mutate, then clamp to the viability floor.
double make_offspring(double parent1, double parent2, const CapabilityParams& p, Rng& rng);

} // namespace habm
