#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace resgrid {

/// Parse/validation failure with a location: either line/column (syntax)
/// or a field path like "lines[2].to" (semantic).
class NetworkError : public std::runtime_error {
public:
    NetworkError(std::string where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what),
          where_(std::move(where)) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

struct Bus {
    std::string id;
    double x_miles = 0.0;
    double y_miles = 0.0;
    double demand_p = 0.0;          // MW
    double demand_q = 0.0;          // MVAr
    bool is_critical = false;
    double v_min = 0.95;            // p.u.
    double v_max = 1.05;            // p.u.
    double existing_gen_p_max = 0.0;   // MW
    double existing_gen_q_min = 0.0;   // MVAr
    double existing_gen_q_max = 0.0;   // MVAr
    double new_gen_p_cap = 0.0;     // MW, 0 means no facility can be sited
    double new_gen_q_cap = 0.0;     // MVAr
    double cost_gen_facility = 0.0;    // $
    double cost_gen_capacity = 0.0;    // $/MW
};

struct Line {
    std::string id;
    std::string from;
    std::string to;
    bool exists = true;             // false: build candidate
    double length = -1.0;           // miles; <0 means derive from bus locations
    double resistance = 0.0;        // p.u.
    double reactance = 0.0;         // p.u.
    double reduced_reactance = 0.0; // p.u., series-compensated value
    double thermal_limit = 0.0;     // MVA
    double cost_build = 0.0;
    double cost_switch = 0.0;
    double cost_harden = 0.0;
    double cost_facts = 0.0;
    double cost_pst = 0.0;
    bool can_switch = true;
    bool can_harden = true;
    bool can_facts = true;
    bool can_pst = true;
};

struct GlobalParams {
    double theta_u = 0.2617993877991494;  // rad (15 deg)
    double theta_m = 3.141592653589793;   // rad, big-M on angle differences
    double phi_u = 1.0471975511965976;    // rad (60 deg)
    double lp_cr = 0.99;
    double lq_cr = 0.99;
    double lp_ncr = 0.8;
    double lq_ncr = 0.8;
    double load_scale = 1.0;
    double facts_reduction_factor = 0.5;
    double m_crit = 100.0;                // recovery objective weight
    double base_mva = 100.0;
};

struct Network {
    std::vector<Bus> buses;
    std::vector<Line> lines;
    GlobalParams params;

    int bus_index(const std::string& id) const;
    int line_index(const std::string& id) const;
    const Bus& bus(const std::string& id) const { return buses[size_t(bus_index(id))]; }

    /// Line length in miles: explicit value, or Euclidean bus distance.
    double line_length(const Line& l) const;
    /// Centroid of bus locations (miles).
    std::pair<double, double> centroid() const;
    double total_demand_p() const;
    double total_demand_q() const;

    void rebuild_indexes();
    /// Enforces the type invariants; throws NetworkError with a field path.
    void validate() const;

private:
    std::unordered_map<std::string, int> bus_idx_;
    std::unordered_map<std::string, int> line_idx_;
};

/// Series-element admittance G + iB = 1/(R + iZ), Z = reduced reactance when
/// the FACTS device is active. B < 0 for inductive lines.
std::pair<double, double> admittance_of(const Line& line, bool facts_active);

Network parse_network(const std::string& text);
std::string serialize_network(const Network& net);

/// Scales every demand by `scale`; everything else untouched.
Network apply_load_scale(const Network& net, double scale);

}  // namespace resgrid
