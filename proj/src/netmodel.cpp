#include "resgrid/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace resgrid {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

int Network::bus_index(const std::string& id) const {
    auto it = bus_idx_.find(id);
    return it == bus_idx_.end() ? -1 : it->second;
}

int Network::line_index(const std::string& id) const {
    auto it = line_idx_.find(id);
    return it == line_idx_.end() ? -1 : it->second;
}

double Network::line_length(const Line& l) const {
    if (l.length >= 0.0) return l.length;
    const Bus& a = buses[size_t(bus_index(l.from))];
    const Bus& b = buses[size_t(bus_index(l.to))];
    return std::hypot(a.x_miles - b.x_miles, a.y_miles - b.y_miles);
}

std::pair<double, double> Network::centroid() const {
    double cx = 0.0, cy = 0.0;
    for (const Bus& b : buses) {
        cx += b.x_miles;
        cy += b.y_miles;
    }
    const double n = double(buses.empty() ? 1 : buses.size());
    return {cx / n, cy / n};
}

double Network::total_demand_p() const {
    double s = 0.0;
    for (const Bus& b : buses) s += b.demand_p;
    return s;
}

double Network::total_demand_q() const {
    double s = 0.0;
    for (const Bus& b : buses) s += b.demand_q;
    return s;
}

void Network::rebuild_indexes() {
    bus_idx_.clear();
    line_idx_.clear();
    for (size_t i = 0; i < buses.size(); ++i) bus_idx_[buses[i].id] = int(i);
    for (size_t i = 0; i < lines.size(); ++i) line_idx_[lines[i].id] = int(i);
}

namespace {

void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) throw NetworkError(path, msg);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void Network::validate() const {
    require(!buses.empty(), "buses", "network has no buses");
    {
        std::unordered_map<std::string, int> seen;
        for (size_t i = 0; i < buses.size(); ++i) {
            const Bus& b = buses[i];
            const std::string path = "buses[" + std::to_string(i) + "]";
            require(!b.id.empty(), path + ".id", "empty bus id");
            require(seen.emplace(b.id, int(i)).second, path + ".id",
                    "duplicate bus id '" + b.id + "'");
            require(finite(b.demand_p) && finite(b.demand_q), path,
                    "demand must be finite");
            require(b.v_min <= b.v_max, path, "v_min exceeds v_max");
            require(b.v_min > 0.0, path + ".v_min", "voltage bound must be positive");
            require(b.new_gen_p_cap >= 0.0 && b.new_gen_q_cap >= 0.0, path,
                    "new generation caps must be nonnegative");
            require(finite(b.existing_gen_p_max) && finite(b.existing_gen_q_min) &&
                        finite(b.existing_gen_q_max) && finite(b.new_gen_p_cap) &&
                        finite(b.new_gen_q_cap),
                    path, "capacity fields must be finite");
            require(b.existing_gen_q_min <= b.existing_gen_q_max, path,
                    "existing_gen_q_min exceeds existing_gen_q_max");
        }
    }
    {
        std::unordered_map<std::string, int> seen;
        for (size_t i = 0; i < lines.size(); ++i) {
            const Line& l = lines[i];
            const std::string path = "lines[" + std::to_string(i) + "]";
            require(!l.id.empty(), path + ".id", "empty line id");
            require(seen.emplace(l.id, int(i)).second, path + ".id",
                    "duplicate line id '" + l.id + "'");
            require(bus_index(l.from) >= 0, path + ".from",
                    "unknown bus '" + l.from + "'");
            require(bus_index(l.to) >= 0, path + ".to", "unknown bus '" + l.to + "'");
            require(l.from != l.to, path, "line endpoints coincide");
            require(l.resistance >= 0.0, path + ".resistance", "negative resistance");
            require(l.reactance > 0.0, path + ".reactance", "reactance must be positive");
            require(l.reduced_reactance > 0.0 && l.reduced_reactance <= l.reactance,
                    path + ".reduced_reactance", "must satisfy 0 < X_bar <= X");
            require(l.thermal_limit > 0.0, path + ".thermal_limit",
                    "thermal limit must be positive");
        }
    }
    {
        const GlobalParams& p = params;
        require(p.theta_u > 0.0 && p.theta_u <= p.theta_m, "params.theta_u",
                "need 0 < theta_u <= theta_m");
        for (auto [v, name] : {std::pair<double, const char*>{p.lp_cr, "lp_cr"},
                               {p.lq_cr, "lq_cr"},
                               {p.lp_ncr, "lp_ncr"},
                               {p.lq_ncr, "lq_ncr"}})
            require(v >= 0.0 && v <= 1.0, std::string("params.") + name,
                    "fraction outside [0,1]");
        require(p.facts_reduction_factor > 0.0 && p.facts_reduction_factor <= 1.0,
                "params.facts_reduction_factor", "must be in (0,1]");
        require(p.load_scale > 0.0, "params.load_scale", "must be positive");
        require(p.base_mva > 0.0, "params.base_mva", "must be positive");
        require(p.phi_u >= 0.0, "params.phi_u", "must be nonnegative");
    }
}

std::pair<double, double> admittance_of(const Line& line, bool facts_active) {
    const double r = line.resistance;
    const double z = facts_active ? line.reduced_reactance : line.reactance;
    const double d = r * r + z * z;
    if (d <= 0.0)
        throw NetworkError("lines", "degenerate impedance on line '" + line.id + "'");
    return {r / d, -z / d};
}

namespace {

double get_num(const json& obj, const char* key, const std::string& path,
               std::optional<double> fallback = std::nullopt) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (fallback) return *fallback;
        throw NetworkError(path + "." + key, "missing field");
    }
    if (!it->is_number())
        throw NetworkError(path + "." + key, "expected a number");
    return it->get<double>();
}

bool get_bool(const json& obj, const char* key, const std::string& path, bool fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) throw NetworkError(path + "." + key, "expected a boolean");
    return it->get<bool>();
}

std::string get_str(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw NetworkError(path + "." + key, "missing field");
    if (!it->is_string()) throw NetworkError(path + "." + key, "expected a string");
    return it->get<std::string>();
}

std::pair<int, int> line_col_of_offset(const std::string& text, size_t byte) {
    int line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

Network parse_network(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        throw NetworkError("line " + std::to_string(line) + ", column " +
                               std::to_string(col),
                           "JSON syntax error");
    }
    if (!doc.is_object()) throw NetworkError("", "top level must be an object");

    Network net;
    if (auto it = doc.find("params"); it != doc.end()) {
        const json& p = *it;
        GlobalParams d;  // defaults
        net.params.theta_u = get_num(p, "theta_u", "params", d.theta_u);
        net.params.theta_m = get_num(p, "theta_m", "params", d.theta_m);
        net.params.phi_u = get_num(p, "phi_u", "params", d.phi_u);
        net.params.lp_cr = get_num(p, "lp_cr", "params", d.lp_cr);
        net.params.lq_cr = get_num(p, "lq_cr", "params", d.lq_cr);
        net.params.lp_ncr = get_num(p, "lp_ncr", "params", d.lp_ncr);
        net.params.lq_ncr = get_num(p, "lq_ncr", "params", d.lq_ncr);
        net.params.load_scale = get_num(p, "load_scale", "params", d.load_scale);
        net.params.facts_reduction_factor =
            get_num(p, "facts_reduction_factor", "params", d.facts_reduction_factor);
        net.params.m_crit = get_num(p, "m_crit", "params", d.m_crit);
        net.params.base_mva = get_num(p, "base_mva", "params", d.base_mva);
    }

    auto buses_it = doc.find("buses");
    if (buses_it == doc.end() || !buses_it->is_array())
        throw NetworkError("buses", "missing or non-array");
    for (size_t i = 0; i < buses_it->size(); ++i) {
        const json& jb = (*buses_it)[i];
        const std::string path = "buses[" + std::to_string(i) + "]";
        if (!jb.is_object()) throw NetworkError(path, "expected an object");
        Bus b;
        b.id = get_str(jb, "id", path);
        auto loc = jb.find("location");
        if (loc != jb.end()) {
            if (!loc->is_array() || loc->size() != 2 || !(*loc)[0].is_number() ||
                !(*loc)[1].is_number())
                throw NetworkError(path + ".location", "expected [x_miles, y_miles]");
            b.x_miles = (*loc)[0].get<double>();
            b.y_miles = (*loc)[1].get<double>();
        }
        b.demand_p = get_num(jb, "demand_p", path, 0.0);
        b.demand_q = get_num(jb, "demand_q", path, 0.0);
        b.is_critical = get_bool(jb, "is_critical", path, false);
        b.v_min = get_num(jb, "v_min", path, 0.95);
        b.v_max = get_num(jb, "v_max", path, 1.05);
        b.existing_gen_p_max = get_num(jb, "existing_gen_p_max", path, 0.0);
        b.existing_gen_q_min = get_num(jb, "existing_gen_q_min", path, 0.0);
        b.existing_gen_q_max = get_num(jb, "existing_gen_q_max", path, 0.0);
        b.new_gen_p_cap = get_num(jb, "new_gen_p_cap", path, 0.0);
        b.new_gen_q_cap = get_num(jb, "new_gen_q_cap", path, 0.0);
        b.cost_gen_facility = get_num(jb, "cost_gen_facility", path, 0.0);
        b.cost_gen_capacity = get_num(jb, "cost_gen_capacity", path, 0.0);
        net.buses.push_back(std::move(b));
    }

    auto lines_it = doc.find("lines");
    if (lines_it == doc.end() || !lines_it->is_array())
        throw NetworkError("lines", "missing or non-array");
    for (size_t i = 0; i < lines_it->size(); ++i) {
        const json& jl = (*lines_it)[i];
        const std::string path = "lines[" + std::to_string(i) + "]";
        if (!jl.is_object()) throw NetworkError(path, "expected an object");
        Line l;
        l.id = get_str(jl, "id", path);
        l.from = get_str(jl, "from", path);
        l.to = get_str(jl, "to", path);
        l.exists = get_bool(jl, "exists", path, true);
        l.length = get_num(jl, "length", path, -1.0);
        l.resistance = get_num(jl, "resistance", path);
        l.reactance = get_num(jl, "reactance", path);
        l.reduced_reactance = get_num(jl, "reduced_reactance", path,
                                      net.params.facts_reduction_factor * l.reactance);
        l.thermal_limit = get_num(jl, "thermal_limit", path);
        l.cost_build = get_num(jl, "cost_build", path, 0.0);
        l.cost_switch = get_num(jl, "cost_switch", path, 0.0);
        l.cost_harden = get_num(jl, "cost_harden", path, 0.0);
        l.cost_facts = get_num(jl, "cost_facts", path, 0.0);
        l.cost_pst = get_num(jl, "cost_pst", path, 0.0);
        l.can_switch = get_bool(jl, "can_switch", path, true);
        l.can_harden = get_bool(jl, "can_harden", path, true);
        l.can_facts = get_bool(jl, "can_facts", path, true);
        l.can_pst = get_bool(jl, "can_pst", path, true);
        net.lines.push_back(std::move(l));
    }

    net.rebuild_indexes();
    net.validate();
    return net;
}

std::string serialize_network(const Network& net) {
    ordered_json doc;
    doc["buses"] = ordered_json::array();
    for (const Bus& b : net.buses) {
        ordered_json jb;
        jb["id"] = b.id;
        jb["location"] = {b.x_miles, b.y_miles};
        jb["demand_p"] = b.demand_p;
        jb["demand_q"] = b.demand_q;
        jb["is_critical"] = b.is_critical;
        jb["v_min"] = b.v_min;
        jb["v_max"] = b.v_max;
        jb["existing_gen_p_max"] = b.existing_gen_p_max;
        jb["existing_gen_q_min"] = b.existing_gen_q_min;
        jb["existing_gen_q_max"] = b.existing_gen_q_max;
        jb["new_gen_p_cap"] = b.new_gen_p_cap;
        jb["new_gen_q_cap"] = b.new_gen_q_cap;
        jb["cost_gen_facility"] = b.cost_gen_facility;
        jb["cost_gen_capacity"] = b.cost_gen_capacity;
        doc["buses"].push_back(std::move(jb));
    }
    doc["lines"] = ordered_json::array();
    for (const Line& l : net.lines) {
        ordered_json jl;
        jl["id"] = l.id;
        jl["from"] = l.from;
        jl["to"] = l.to;
        jl["exists"] = l.exists;
        jl["length"] = net.line_length(l);
        jl["resistance"] = l.resistance;
        jl["reactance"] = l.reactance;
        jl["reduced_reactance"] = l.reduced_reactance;
        jl["thermal_limit"] = l.thermal_limit;
        jl["cost_build"] = l.cost_build;
        jl["cost_switch"] = l.cost_switch;
        jl["cost_harden"] = l.cost_harden;
        jl["cost_facts"] = l.cost_facts;
        jl["cost_pst"] = l.cost_pst;
        jl["can_switch"] = l.can_switch;
        jl["can_harden"] = l.can_harden;
        jl["can_facts"] = l.can_facts;
        jl["can_pst"] = l.can_pst;
        doc["lines"].push_back(std::move(jl));
    }
    ordered_json jp;
    jp["theta_u"] = net.params.theta_u;
    jp["theta_m"] = net.params.theta_m;
    jp["phi_u"] = net.params.phi_u;
    jp["lp_cr"] = net.params.lp_cr;
    jp["lq_cr"] = net.params.lq_cr;
    jp["lp_ncr"] = net.params.lp_ncr;
    jp["lq_ncr"] = net.params.lq_ncr;
    jp["load_scale"] = net.params.load_scale;
    jp["facts_reduction_factor"] = net.params.facts_reduction_factor;
    jp["m_crit"] = net.params.m_crit;
    jp["base_mva"] = net.params.base_mva;
    doc["params"] = std::move(jp);
    return doc.dump(2) + "\n";
}

Network apply_load_scale(const Network& net, double scale) {
    if (!(scale > 0.0)) throw NetworkError("load_scale", "scale must be positive");
    Network out = net;
    for (Bus& b : out.buses) {
        b.demand_p *= scale;
        b.demand_q *= scale;
    }
    out.rebuild_indexes();
    return out;
}

}  // namespace resgrid
