#include "habm/genetics.h"

#include <algorithm>
#include <stdexcept>

namespace habm
{

void CapabilityParams::validate() const
{
    if (!(spread >= 0.0)) {
        throw std::invalid_argument("c (initial capability spread) must be >= 0");
    }
    if (!(mutation_sd >= 0.0)) {
        throw std::invalid_argument("u (mutation amplitude) must be >= 0");
    }
    if (!(heritability >= 0.0 && heritability <= 1.0)) {
        throw std::invalid_argument("heritability must lie in [0, 1]");
    }
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
        throw std::invalid_argument("mutation probability must lie in [0, 1]");
    }
}

double initial_capability(Rng& rng, const CapabilityParams& p)
{
    const double z = rng.normal();
    return viability_clamp(p.mean + p.spread * z);
}

double inherit(double parent1, double parent2, double heritability)
{
    const double hi = std::max(parent1, parent2);
    const double mean = 0.5 * (parent1 + parent2);
    return heritability * hi + (1.0 - heritability) * mean;
}

double mutate(double inherited, double mutation_prob, double mutation_sd, Rng& rng)
{
    // Both draws are always consumed so the stream position does not depend
    // on the branch taken.
    const bool hit = rng.bernoulli(mutation_prob);
    const double delta = mutation_sd * rng.normal();
    return hit ? inherited + delta : inherited;
}

double make_offspring(double parent1, double parent2, const CapabilityParams& p, Rng& rng)
{
    return viability_clamp(mutate(inherit(parent1, parent2, p.heritability), p.mutation_prob,
                                  p.mutation_sd, rng));
}

} // namespace habm
