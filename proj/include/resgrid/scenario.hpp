#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resgrid/netmodel.hpp"

namespace resgrid {

struct Scenario {
    int id = 0;
    std::vector<std::string> damaged_lines;  // sorted, existing lines only

    bool damages(const std::string& line_id) const;
};

struct ScenarioSet {
    std::vector<Scenario> scenarios;
    double damage_percentile = 0.0;
    double sigma_miles = 0.0;
    uint64_t rng_seed = 0;
};

/// Peak failure probability of `percentile` at the line closest to the
/// centroid of bus locations, falling off as an isotropic Gaussian of the
/// line-midpoint distance.
double line_failure_probability(const Line& line, const Network& net,
                                double sigma_miles, double percentile);

/// Quarter of the bounding-box diagonal of the bus locations.
double default_field_sigma(const Network& net);

/// `count` scenarios of independent per-line Bernoulli trials. One uniform
/// draw per (scenario, line) pair in file order, so raising the percentile
/// only ever adds damaged lines for a fixed seed.
ScenarioSet sample_scenarios(const Network& net, int count, double percentile,
                             double sigma_miles, uint64_t seed);

ScenarioSet load_scenarios(const std::string& text, const Network& net);
std::string save_scenarios(const ScenarioSet& set);

}  // namespace resgrid
