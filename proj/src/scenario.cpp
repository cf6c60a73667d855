#include "resgrid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "resgrid/rng.hpp"

namespace resgrid {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool Scenario::damages(const std::string& line_id) const {
    return std::binary_search(damaged_lines.begin(), damaged_lines.end(), line_id);
}

namespace {

double midpoint_dist_sq(const Line& l, const Network& net,
                        const std::pair<double, double>& c) {
    const Bus& a = net.buses[size_t(net.bus_index(l.from))];
    const Bus& b = net.buses[size_t(net.bus_index(l.to))];
    const double mx = 0.5 * (a.x_miles + b.x_miles);
    const double my = 0.5 * (a.y_miles + b.y_miles);
    const double dx = mx - c.first, dy = my - c.second;
    return dx * dx + dy * dy;
}

double min_existing_dist_sq(const Network& net, const std::pair<double, double>& c) {
    double best = std::numeric_limits<double>::infinity();
    for (const Line& l : net.lines)
        if (l.exists) best = std::min(best, midpoint_dist_sq(l, net, c));
    return best;
}

}  // namespace

double line_failure_probability(const Line& line, const Network& net,
                                double sigma_miles, double percentile) {
    if (net.buses.empty()) throw NetworkError("buses", "empty network");
    if (!(sigma_miles > 0.0)) throw NetworkError("sigma", "sigma must be positive");
    const auto c = net.centroid();
    const double d2 = midpoint_dist_sq(line, net, c);
    const double d2min = min_existing_dist_sq(net, c);
    // Normalized so the closest existing line sits exactly at `percentile`.
    return percentile * std::exp(-(d2 - d2min) / (2.0 * sigma_miles * sigma_miles));
}

double default_field_sigma(const Network& net) {
    double xl = std::numeric_limits<double>::infinity(), xu = -xl;
    double yl = xl, yu = -xl;
    for (const Bus& b : net.buses) {
        xl = std::min(xl, b.x_miles);
        xu = std::max(xu, b.x_miles);
        yl = std::min(yl, b.y_miles);
        yu = std::max(yu, b.y_miles);
    }
    const double diag = std::hypot(xu - xl, yu - yl);
    return diag > 0.0 ? 0.25 * diag : 1.0;
}

ScenarioSet sample_scenarios(const Network& net, int count, double percentile,
                             double sigma_miles, uint64_t seed) {
    if (count < 1) throw NetworkError("count", "need at least one scenario");
    ScenarioSet set;
    set.damage_percentile = percentile;
    set.sigma_miles = sigma_miles;
    set.rng_seed = seed;

    std::vector<double> prob(net.lines.size(), 0.0);
    for (size_t i = 0; i < net.lines.size(); ++i)
        if (net.lines[i].exists)
            prob[i] = line_failure_probability(net.lines[i], net, sigma_miles, percentile);

    Rng rng(seed);
    for (int s = 0; s < count; ++s) {
        Scenario sc;
        sc.id = s;
        for (size_t i = 0; i < net.lines.size(); ++i) {
            if (!net.lines[i].exists) continue;
            const double u = rng.next_double();
            if (u < prob[i]) sc.damaged_lines.push_back(net.lines[i].id);
        }
        std::sort(sc.damaged_lines.begin(), sc.damaged_lines.end());
        set.scenarios.push_back(std::move(sc));
    }
    return set;
}

ScenarioSet load_scenarios(const std::string& text, const Network& net) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error&) {
        throw NetworkError("scenarios", "JSON syntax error");
    }
    ScenarioSet set;
    set.rng_seed = doc.value("seed", uint64_t(0));
    set.damage_percentile = doc.value("percentile", 0.0);
    set.sigma_miles = doc.value("sigma", 0.0);
    if (doc.contains("rng") && doc["rng"].get<std::string>() != Rng::kAlgorithm)
        throw NetworkError("scenarios.rng",
                           "unknown generator '" + doc["rng"].get<std::string>() + "'");
    auto arr = doc.find("scenarios");
    if (arr == doc.end() || !arr->is_array())
        throw NetworkError("scenarios", "missing scenario array");
    std::vector<int> seen_ids;
    for (size_t i = 0; i < arr->size(); ++i) {
        const json& js = (*arr)[i];
        Scenario sc;
        sc.id = js.at("id").get<int>();
        for (const auto& jl : js.at("damaged_lines")) {
            const std::string lid = jl.get<std::string>();
            const int li = net.line_index(lid);
            if (li < 0)
                throw NetworkError("scenarios[" + std::to_string(i) + "]",
                                   "unknown line id '" + lid + "'");
            if (!net.lines[size_t(li)].exists)
                throw NetworkError("scenarios[" + std::to_string(i) + "]",
                                   "candidate line '" + lid + "' cannot be damaged");
            sc.damaged_lines.push_back(lid);
        }
        std::sort(sc.damaged_lines.begin(), sc.damaged_lines.end());
        seen_ids.push_back(sc.id);
        set.scenarios.push_back(std::move(sc));
    }
    std::sort(seen_ids.begin(), seen_ids.end());
    if (std::adjacent_find(seen_ids.begin(), seen_ids.end()) != seen_ids.end())
        throw NetworkError("scenarios", "duplicate scenario id");
    return set;
}

std::string save_scenarios(const ScenarioSet& set) {
    ordered_json doc;
    doc["rng"] = Rng::kAlgorithm;
    doc["seed"] = set.rng_seed;
    doc["percentile"] = set.damage_percentile;
    doc["sigma"] = set.sigma_miles;
    doc["scenarios"] = ordered_json::array();
    for (const Scenario& sc : set.scenarios) {
        ordered_json js;
        js["id"] = sc.id;
        js["damaged_lines"] = sc.damaged_lines;
        doc["scenarios"].push_back(std::move(js));
    }
    return doc.dump(2) + "\n";
}

}  // namespace resgrid
