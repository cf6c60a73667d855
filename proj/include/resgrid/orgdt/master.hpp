#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "resgrid/milp/model.hpp"
#include "resgrid/netmodel.hpp"
#include "resgrid/scenario.hpp"

namespace resgrid {

enum class FlowMode : uint8_t { Qc, Dc };

inline const char* mode_name(FlowMode m) { return m == FlowMode::Qc ? "qc" : "dc"; }

/// First-stage upgrade decision vector: one slot per network line/bus.
struct DesignDecision {
    std::vector<uint8_t> build_line;
    std::vector<uint8_t> add_switch;
    std::vector<uint8_t> harden;
    std::vector<uint8_t> facts;
    std::vector<uint8_t> pst;
    std::vector<uint8_t> build_gen;
    std::vector<double> gen_capacity_p;  // MW
    std::vector<double> gen_capacity_q;  // MVAr

    static DesignDecision zeros(const Network& net);
    double cost(const Network& net) const;
    /// Checks the capacity-linking invariants; throws NetworkError.
    void validate(const Network& net) const;

    std::string to_json() const;
    static DesignDecision from_json(const std::string& text, const Network& net);
};

/// Per-scenario operating state extracted from a solve.
struct LineOperation {
    int in_service = 0;    // x^s
    int switch_open = 0;   // tau^s
    int hardened_used = 0; // t^s
    int active = 0;        // x~^s
    int facts_on = 0;      // delta^s
    int pst_on = 0;        // gamma^s
    double p_from = 0, q_from = 0, p_to = 0, q_to = 0;  // MW / MVAr
    double current_sq = 0;                              // p.u.
    double angle_diff = 0;                              // rad
    double phase_shift = 0;                             // rad
};

struct BusOperation {
    double angle = 0;     // rad
    double voltage = 1;   // p.u.
    double gen_p = 0, gen_q = 0;      // MW / MVAr
    double cap_p = 0, cap_q = 0;      // zp^s, zq^s (MW / MVAr)
    double served_p = 0, served_q = 0;
    double served_frac_p = 1, served_frac_q = 1;  // yp^s, yq^s
};

struct ScenarioOperation {
    int scenario_id = 0;
    std::vector<LineOperation> lines;
    std::vector<BusOperation> buses;
};

struct MasterOptions {
    FlowMode mode = FlowMode::Qc;
    bool devices = true;
    double load_scale = 1.0;
    std::optional<double> theta_u;      // radians; overrides network params
    std::optional<double> budget_cap;   // optional cap on total upgrade cost
};

/// Builds and owns the upgrade-design MILP: first-stage variables and
/// objective, plus one on/off flow block per added scenario. When
/// constructed around a fixed DesignDecision the first stage collapses to
/// constants and per-class shortfall slacks become available, which is the
/// pricing/recovery-relaxation configuration.
class MasterModel {
public:
    MasterModel(const Network& net, const MasterOptions& opt);
    MasterModel(const Network& net, const MasterOptions& opt,
                const DesignDecision& fixed_design, bool slack_objective);

    MasterModel(const MasterModel&) = delete;
    MasterModel(MasterModel&&) = default;

    /// Appends the Q block for one scenario. Scenario must damage only
    /// existing lines known to the network.
    void add_scenario(const Scenario& s);

    MilpModel& model() { return model_; }
    const MilpModel& model() const { return model_; }
    const Network& net() const { return *net_; }
    const MasterOptions& options() const { return opt_; }
    int num_blocks() const { return int(blocks_.size()); }
    int block_scenario_id(int block) const { return blocks_[size_t(block)].scenario_id; }

    DesignDecision extract_design(const SolveResult& r,
                                  std::vector<std::string>* warnings = nullptr) const;
    ScenarioOperation extract_operation(const SolveResult& r, int block) const;

    /// Sum of the slack variables (p.u.) at the solution; only valid for
    /// slack-objective models.
    double slack_value(const SolveResult& r, int block) const;

    /// Canonical lifted assignment for one block: given exact AC operating
    /// values (p.u.), fills every model variable of the block (relaxation
    /// auxiliaries at their defining products). Used by the soundness
    /// checks. Returns false if the block has no such lift (dead line
    /// mismatch etc.).
    struct AcPoint {
        std::vector<double> v, theta;     // per bus (p.u., rad)
        std::vector<double> phi;          // per line (rad)
        std::vector<int> active;          // x~ per line
        std::vector<int> facts_on, pst_on;
        std::vector<double> gp, gq;       // p.u.
        std::vector<double> yp, yq;       // served fractions
        std::vector<int> in_service;      // x^s per line (defaults to active)
    };
    bool lift_point(int block, const AcPoint& pt, std::vector<double>& x) const;

    /// Max violation over the block's rows and atoms at assignment x.
    double block_violation(int block, const std::vector<double>& x) const;

    double theta_u() const { return theta_u_; }
    double base_mva() const { return net_->params.base_mva; }

private:
    struct LineVars {
        Entry xs, xt, delta, gamma;
        Entry p_ij, p_ji, q_ij, q_ji;
        Entry ell, dl;
        Entry theta, phi;
        Entry w, cs, sn, wc, ws, xv_i, xv_j;
        Entry dxv_i, dxv_j, dwc, dws, dtheta;
        Entry theta_sq;
        Entry cap_ij, cap_ji;
        bool damaged = false;
    };
    struct BusVars {
        Entry v, theta, vhat;
        Entry gp, gq, zp, zq, yp, yq;
    };
    struct Block {
        int scenario_id = 0;
        std::vector<LineVars> lines;
        std::vector<BusVars> buses;
        std::array<Entry, 4> slack;  // p_cr, q_cr, p_ncr, q_ncr
        int first_row = 0, last_row = 0;
        int first_atom = 0, last_atom = 0;
    };
    struct FirstStage {
        std::vector<Entry> x, tau, t, delta, gamma;
        std::vector<Entry> u, zp, zq;
    };

    void build_first_stage();
    void build_first_stage_fixed(const DesignDecision& d);
    void add_qc_block(Block& blk, const Scenario& s);
    void add_dc_block(Block& blk, const Scenario& s);
    Entry line_state(Block& blk, const Scenario& s, int li, const std::string& pre);
    Entry bus_vhat(Block& blk, int bi, const std::string& pre);
    VarRef fresh(const std::string& name, double lb, double ub);

    const Network* net_;
    MasterOptions opt_;
    MilpModel model_;
    FirstStage fs_;
    std::vector<Block> blocks_;
    bool slack_mode_ = false;
    double theta_u_ = 0.0;
    double base_ = 100.0;
};

}  // namespace resgrid
