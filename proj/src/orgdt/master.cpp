#include "resgrid/orgdt/master.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "resgrid/envelope.hpp"

namespace resgrid {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr double kIntViolTol = 1e-6;

int round_binary(double v, const std::string& what, std::vector<std::string>* warnings) {
    if (std::abs(v - std::round(v)) <= kIntViolTol) return v >= 0.5 ? 1 : 0;
    // Boundary rule: values within tolerance of 0.5 round by the >= 0.5
    // test and are flagged rather than rejected.
    if (std::abs(v - 0.5) <= kIntViolTol) {
        if (warnings)
            warnings->push_back(what + ": ambiguous value " + std::to_string(v) +
                                " rounded " + (v >= 0.5 ? "up" : "down"));
        return v >= 0.5 ? 1 : 0;
    }
    throw NetworkError(what, "integrality violation " + std::to_string(v));
}
}  // namespace

DesignDecision DesignDecision::zeros(const Network& net) {
    DesignDecision d;
    const size_t nl = net.lines.size(), nb = net.buses.size();
    d.build_line.assign(nl, 0);
    for (size_t i = 0; i < nl; ++i) d.build_line[i] = net.lines[i].exists ? 1 : 0;
    d.add_switch.assign(nl, 0);
    d.harden.assign(nl, 0);
    d.facts.assign(nl, 0);
    d.pst.assign(nl, 0);
    d.build_gen.assign(nb, 0);
    d.gen_capacity_p.assign(nb, 0.0);
    d.gen_capacity_q.assign(nb, 0.0);
    return d;
}

double DesignDecision::cost(const Network& net) const {
    double c = 0.0;
    for (size_t i = 0; i < net.lines.size(); ++i) {
        const Line& l = net.lines[i];
        if (!l.exists && build_line[i]) c += l.cost_build;
        if (add_switch[i]) c += l.cost_switch;
        if (harden[i]) c += l.cost_harden;
        if (facts[i]) c += l.cost_facts;
        if (pst[i]) c += l.cost_pst;
    }
    for (size_t i = 0; i < net.buses.size(); ++i) {
        const Bus& b = net.buses[i];
        if (build_gen[i]) c += b.cost_gen_facility;
        c += b.cost_gen_capacity * gen_capacity_p[i];
    }
    return c;
}

void DesignDecision::validate(const Network& net) const {
    const double tol = 1e-6;
    for (size_t i = 0; i < net.buses.size(); ++i) {
        const Bus& b = net.buses[i];
        const std::string path = "design.buses[" + std::to_string(i) + "]";
        if (gen_capacity_p[i] < -tol || gen_capacity_q[i] < -tol)
            throw NetworkError(path, "negative capacity");
        if (gen_capacity_p[i] > b.new_gen_p_cap * build_gen[i] + tol)
            throw NetworkError(path, "capacity above facility limit");
        if (gen_capacity_q[i] > b.new_gen_q_cap * build_gen[i] + tol)
            throw NetworkError(path, "reactive capacity above facility limit");
        if (gen_capacity_p[i] + tol < 2.0 * gen_capacity_q[i])
            throw NetworkError(path, "reactive capacity above half of real capacity");
    }
    for (size_t i = 0; i < net.lines.size(); ++i) {
        if (net.lines[i].exists && !build_line[i])
            throw NetworkError("design.lines[" + std::to_string(i) + "]",
                               "existing line marked unbuilt");
    }
}

std::string DesignDecision::to_json() const {
    ordered_json doc;
    doc["lines"] = ordered_json::array();
    for (size_t i = 0; i < build_line.size(); ++i) {
        ordered_json jl;
        jl["build"] = int(build_line[i]);
        jl["switch"] = int(add_switch[i]);
        jl["harden"] = int(harden[i]);
        jl["facts"] = int(facts[i]);
        jl["pst"] = int(pst[i]);
        doc["lines"].push_back(std::move(jl));
    }
    doc["buses"] = ordered_json::array();
    for (size_t i = 0; i < build_gen.size(); ++i) {
        ordered_json jb;
        jb["build_gen"] = int(build_gen[i]);
        jb["capacity_p"] = gen_capacity_p[i];
        jb["capacity_q"] = gen_capacity_q[i];
        doc["buses"].push_back(std::move(jb));
    }
    return doc.dump(2) + "\n";
}

DesignDecision DesignDecision::from_json(const std::string& text, const Network& net) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        throw NetworkError("design", "JSON syntax error");
    }
    DesignDecision d = zeros(net);
    const auto& jl = doc.at("lines");
    if (jl.size() != net.lines.size())
        throw NetworkError("design.lines", "line count mismatch");
    for (size_t i = 0; i < jl.size(); ++i) {
        d.build_line[i] =
            net.lines[i].exists ? 1 : uint8_t(jl[i].value("build", 0));
        d.add_switch[i] = uint8_t(jl[i].value("switch", 0));
        d.harden[i] = uint8_t(jl[i].value("harden", 0));
        d.facts[i] = uint8_t(jl[i].value("facts", 0));
        d.pst[i] = uint8_t(jl[i].value("pst", 0));
    }
    const auto& jb = doc.at("buses");
    if (jb.size() != net.buses.size())
        throw NetworkError("design.buses", "bus count mismatch");
    for (size_t i = 0; i < jb.size(); ++i) {
        d.build_gen[i] = uint8_t(jb[i].value("build_gen", 0));
        d.gen_capacity_p[i] = jb[i].value("capacity_p", 0.0);
        d.gen_capacity_q[i] = jb[i].value("capacity_q", 0.0);
    }
    d.validate(net);
    return d;
}

MasterModel::MasterModel(const Network& net, const MasterOptions& opt)
    : net_(&net), opt_(opt) {
    base_ = net.params.base_mva;
    theta_u_ = opt.theta_u.value_or(net.params.theta_u);
    if (opt_.mode == FlowMode::Qc && theta_u_ > std::numbers::pi / 2.0)
        throw NetworkError("theta_u", "QC envelopes need theta_u <= pi/2");
    if (theta_u_ > net.params.theta_m)
        throw NetworkError("theta_u", "theta_u exceeds theta_m");
    build_first_stage();
}

MasterModel::MasterModel(const Network& net, const MasterOptions& opt,
                         const DesignDecision& fixed_design, bool slack_objective)
    : net_(&net), opt_(opt), slack_mode_(slack_objective) {
    base_ = net.params.base_mva;
    theta_u_ = opt.theta_u.value_or(net.params.theta_u);
    if (opt_.mode == FlowMode::Qc && theta_u_ > std::numbers::pi / 2.0)
        throw NetworkError("theta_u", "QC envelopes need theta_u <= pi/2");
    build_first_stage_fixed(fixed_design);
}

VarRef MasterModel::fresh(const std::string& name, double lb, double ub) {
    return model_.add_var(name, lb, ub);
}

void MasterModel::build_first_stage() {
    const Network& net = *net_;
    LinExpr cost;
    const size_t nl = net.lines.size(), nb = net.buses.size();
    fs_.x.resize(nl);
    fs_.tau.resize(nl);
    fs_.t.resize(nl);
    fs_.delta.resize(nl);
    fs_.gamma.resize(nl);
    for (size_t i = 0; i < nl; ++i) {
        const Line& l = net.lines[i];
        const std::string id = l.id;
        if (l.exists) {
            fs_.x[i] = Entry::constant(1.0);
        } else {
            VarRef x = model_.add_var("x_" + id, 0, 1, VarKind::Binary, 10);
            fs_.x[i] = Entry::of(x);
            cost.add(x, l.cost_build);
        }
        if (l.can_switch) {
            VarRef tau = model_.add_var("tau_" + id, 0, 1, VarKind::Binary, 10);
            fs_.tau[i] = Entry::of(tau);
            cost.add(tau, l.cost_switch);
        } else {
            fs_.tau[i] = Entry::constant(0.0);
        }
        if (l.exists && l.can_harden) {
            VarRef t = model_.add_var("t_" + id, 0, 1, VarKind::Binary, 10);
            fs_.t[i] = Entry::of(t);
            cost.add(t, l.cost_harden);
        } else {
            fs_.t[i] = Entry::constant(0.0);
        }
        if (opt_.devices && l.can_facts) {
            VarRef d = model_.add_var("facts_" + id, 0, 1, VarKind::Binary, 10);
            fs_.delta[i] = Entry::of(d);
            cost.add(d, l.cost_facts);
        } else {
            fs_.delta[i] = Entry::constant(0.0);
        }
        if (opt_.devices && l.can_pst) {
            VarRef g = model_.add_var("pst_" + id, 0, 1, VarKind::Binary, 10);
            fs_.gamma[i] = Entry::of(g);
            cost.add(g, l.cost_pst);
        } else {
            fs_.gamma[i] = Entry::constant(0.0);
        }
    }
    fs_.u.resize(nb);
    fs_.zp.resize(nb);
    fs_.zq.resize(nb);
    for (size_t i = 0; i < nb; ++i) {
        const Bus& b = net.buses[i];
        if (b.new_gen_p_cap <= 0.0) {
            fs_.u[i] = Entry::constant(0.0);
            fs_.zp[i] = Entry::constant(0.0);
            fs_.zq[i] = Entry::constant(0.0);
            continue;
        }
        VarRef u = model_.add_var("u_" + b.id, 0, 1, VarKind::Binary, 10);
        const double zp_u = b.new_gen_p_cap / base_;
        const double zq_u = b.new_gen_q_cap / base_;
        VarRef zp = model_.add_var("zp_" + b.id, 0, zp_u);
        fs_.u[i] = Entry::of(u);
        fs_.zp[i] = Entry::of(zp);
        cost.add(u, b.cost_gen_facility);
        cost.add(zp, b.cost_gen_capacity * base_);
        model_.add_row(LinExpr{}.add(zp, 1.0).add(u, -zp_u), Sense::LessEq, 0.0,
                       "cap_zp_" + b.id);
        if (opt_.mode == FlowMode::Qc && zq_u > 0.0) {
            VarRef zq = model_.add_var("zq_" + b.id, 0, zq_u);
            fs_.zq[i] = Entry::of(zq);
            model_.add_row(LinExpr{}.add(zq, 1.0).add(u, -zq_u), Sense::LessEq, 0.0,
                           "cap_zq_" + b.id);
            model_.add_row(LinExpr{}.add(zp, 1.0).add(zq, -2.0), Sense::GreaterEq, 0.0,
                           "zp_2zq_" + b.id);
        } else {
            fs_.zq[i] = Entry::constant(0.0);
        }
    }
    if (opt_.budget_cap) {
        LinearConstraint cap;
        cap.coef = cost.terms;
        cap.sense = Sense::LessEq;
        cap.rhs = *opt_.budget_cap - cost.constant;
        cap.tag = "budget_cap";
        model_.add_row(std::move(cap));
    }
    model_.set_objective(cost, /*minimize=*/true);
}

void MasterModel::build_first_stage_fixed(const DesignDecision& d) {
    const Network& net = *net_;
    const size_t nl = net.lines.size(), nb = net.buses.size();
    fs_.x.resize(nl);
    fs_.tau.resize(nl);
    fs_.t.resize(nl);
    fs_.delta.resize(nl);
    fs_.gamma.resize(nl);
    for (size_t i = 0; i < nl; ++i) {
        fs_.x[i] = Entry::constant(double(d.build_line[i]));
        fs_.tau[i] = Entry::constant(double(d.add_switch[i]));
        fs_.t[i] = Entry::constant(double(d.harden[i]));
        fs_.delta[i] = Entry::constant(opt_.devices ? double(d.facts[i]) : 0.0);
        fs_.gamma[i] = Entry::constant(opt_.devices ? double(d.pst[i]) : 0.0);
    }
    fs_.u.resize(nb);
    fs_.zp.resize(nb);
    fs_.zq.resize(nb);
    for (size_t i = 0; i < nb; ++i) {
        fs_.u[i] = Entry::constant(double(d.build_gen[i]));
        fs_.zp[i] = Entry::constant(d.gen_capacity_p[i] / base_);
        fs_.zq[i] = Entry::constant(d.gen_capacity_q[i] / base_);
    }
    model_.set_objective(LinExpr{}, true);  // replaced when slacks appear
}

/// On/off state of a line in scenario s: returns the x~ entry and fills
/// the xs/delta/gamma entries of the block line.
Entry MasterModel::line_state(Block& blk, const Scenario& s, int li,
                              const std::string& pre) {
    const Line& l = net_->lines[size_t(li)];
    LineVars& lv = blk.lines[size_t(li)];
    const bool damaged = l.exists && s.damages(l.id);
    lv.damaged = damaged;

    Entry xs, xt;
    if (damaged) {
        // x^s = t^s <= t; a switch adds nothing a zero t^s cannot do.
        const Entry& t = fs_.t[size_t(li)];
        if (!t.is_var && t.value == 0.0) {
            xs = xt = Entry::constant(0.0);
        } else {
            VarRef v = model_.add_var(pre + "xt_" + l.id, 0, 1, VarKind::Binary);
            if (t.is_var)
                model_.add_row(LinExpr{}.add(v, 1.0).add(t, -1.0), Sense::LessEq, 0.0,
                               pre + "hard_" + l.id);
            xs = xt = Entry::of(v);
        }
    } else {
        xs = fs_.x[size_t(li)];  // (2c): x^s = x off the damage set
        const Entry& tau = fs_.tau[size_t(li)];
        const bool can_switch = tau.is_var || tau.value > 0.0;
        if (!can_switch) {
            xt = xs;
        } else if (!xs.is_var && xs.value == 0.0) {
            xt = Entry::constant(0.0);
        } else {
            VarRef v = model_.add_var(pre + "xt_" + l.id, 0, 1, VarKind::Binary);
            xt = Entry::of(v);
            // x~ = x^s - tau^s with 0 <= tau^s <= tau
            if (xs.is_var)
                model_.add_row(LinExpr{}.add(v, 1.0).add(xs, -1.0), Sense::LessEq, 0.0,
                               pre + "xt_le_x_" + l.id);
            if (tau.is_var)
                model_.add_row(LinExpr{}.add(xs, 1.0).add(v, -1.0).add(tau, -1.0),
                               Sense::LessEq, 0.0, pre + "sw_" + l.id);
        }
    }
    lv.xs = xs;
    lv.xt = xt;

    const bool line_dead = !xt.is_var && xt.value == 0.0;
    auto usage = [&](const Entry& fsdev, const char* what) -> Entry {
        if (line_dead) return Entry::constant(0.0);
        if (!fsdev.is_var && fsdev.value == 0.0) return Entry::constant(0.0);
        VarRef v = model_.add_var(pre + what + "_" + l.id, 0, 1, VarKind::Binary);
        if (fsdev.is_var)
            model_.add_row(LinExpr{}.add(v, 1.0).add(fsdev, -1.0), Sense::LessEq, 0.0,
                           pre + what + "link_" + l.id);
        if (opt_.mode == FlowMode::Qc && xt.is_var)
            model_.add_row(LinExpr{}.add(v, 1.0).add(xt, -1.0), Sense::LessEq, 0.0,
                           pre + what + "top_" + l.id);
        return Entry::of(v);
    };
    lv.delta = usage(fs_.delta[size_t(li)], "fa");
    lv.gamma = usage(fs_.gamma[size_t(li)], "ps");
    return xt;
}

Entry MasterModel::bus_vhat(Block& blk, int bi, const std::string& pre) {
    BusVars& bv = blk.buses[size_t(bi)];
    if (bv.vhat.is_var || bv.vhat.value != 0.0) return bv.vhat;
    const Bus& b = net_->buses[size_t(bi)];
    VarRef vh = model_.add_var(pre + "vhat_" + b.id, b.v_min * b.v_min,
                               b.v_max * b.v_max);
    bv.vhat = Entry::of(vh);
    model_.add(mccormick_q(vh, bv.v, model_.one(), pre + "vhat_" + b.id));
    return bv.vhat;
}

void MasterModel::add_scenario(const Scenario& s) {
    for (const auto& lid : s.damaged_lines) {
        const int li = net_->line_index(lid);
        if (li < 0) throw NetworkError("scenario", "unknown line id '" + lid + "'");
        if (!net_->lines[size_t(li)].exists)
            throw NetworkError("scenario", "candidate line '" + lid + "' in damage set");
    }
    Block blk;
    blk.scenario_id = s.id;
    blk.first_row = model_.num_rows();
    blk.first_atom = int(model_.atoms().size());
    blk.lines.resize(net_->lines.size());
    blk.buses.resize(net_->buses.size());
    if (opt_.mode == FlowMode::Qc)
        add_qc_block(blk, s);
    else
        add_dc_block(blk, s);
    blk.last_row = model_.num_rows();
    blk.last_atom = int(model_.atoms().size());
    blocks_.push_back(std::move(blk));

    if (slack_mode_) {
        LinExpr obj;
        for (const Block& b : blocks_)
            for (const Entry& sl : b.slack)
                if (sl.is_var) obj.add(sl, 1.0);
        model_.set_objective(obj, true);
    }
}

void MasterModel::add_qc_block(Block& blk, const Scenario& s) {
    const Network& net = *net_;
    const std::string pre = "s" + std::to_string(s.id) + "_";
    const double tu = theta_u_;
    const double tm = net.params.theta_m;
    const double phi_u = net.params.phi_u;
    VarRef one = model_.one();
    VarAlloc alloc = [this](const std::string& n, double lb, double ub) {
        return model_.add_var(n, lb, ub);
    };

    // Bus-level voltage and angle variables.
    const double theta_box = double(net.buses.size()) * tm;
    for (size_t bi = 0; bi < net.buses.size(); ++bi) {
        const Bus& b = net.buses[bi];
        BusVars& bv = blk.buses[bi];
        bv.v = Entry::of(model_.add_var(pre + "v_" + b.id, b.v_min, b.v_max));
        bv.theta = bi == 0 ? Entry::of(model_.add_var(pre + "th_" + b.id, 0, 0))
                           : Entry::of(model_.add_var(pre + "th_" + b.id, -theta_box,
                                                      theta_box));
    }

    // Line blocks.
    std::vector<LinExpr> kp(net.buses.size()), kq(net.buses.size());
    for (size_t li = 0; li < net.lines.size(); ++li) {
        const Line& l = net.lines[li];
        LineVars& lv = blk.lines[li];
        Entry xt = line_state(blk, s, int(li), pre);
        if (!xt.is_var && xt.value == 0.0) {
            lv.p_ij = lv.p_ji = lv.q_ij = lv.q_ji = Entry::constant(0.0);
            lv.ell = Entry::constant(0.0);
            continue;  // line cannot operate in this scenario
        }
        const int bi = net.bus_index(l.from), bj = net.bus_index(l.to);
        const Bus& busi = net.buses[size_t(bi)];
        const Bus& busj = net.buses[size_t(bj)];
        auto [G, B] = admittance_of(l, false);
        auto [Gb, Bb] = admittance_of(l, true);
        const double T = l.thermal_limit / base_;

        // Angle difference and phase shift.
        VarRef th = model_.add_var(pre + "thd_" + l.id, -tm, tm);
        lv.theta = Entry::of(th);
        LinExpr thdef;
        thdef.add(th, 1.0).add(blk.buses[size_t(bi)].theta, -1.0)
            .add(blk.buses[size_t(bj)].theta, 1.0);
        if (lv.gamma.is_var || lv.gamma.value > 0.0) {
            VarRef phi = model_.add_var(pre + "phi_" + l.id, -phi_u, phi_u);
            lv.phi = Entry::of(phi);
            thdef.add(phi, -1.0);
            model_.add_row(LinExpr{}.add(phi, 1.0).add(lv.gamma, -phi_u),
                           Sense::LessEq, 0.0, pre + "phiu_" + l.id);
            model_.add_row(LinExpr{}.add(phi, 1.0).add(lv.gamma, phi_u),
                           Sense::GreaterEq, 0.0, pre + "phil_" + l.id);
        } else {
            lv.phi = Entry::constant(0.0);
        }
        model_.add_row(thdef, Sense::Equal, 0.0, pre + "thdef_" + l.id);

        // Angle-difference big-M (3p).
        if (xt.is_var) {
            model_.add_row(LinExpr{}.add(th, 1.0).add(xt, tm - tu), Sense::LessEq, tm,
                           pre + "angu_" + l.id);
            model_.add_row(LinExpr{}.add(th, 1.0).add(xt, tu - tm), Sense::GreaterEq,
                           -tm, pre + "angl_" + l.id);
        } else {
            model_.add_row(LinExpr{}.add(th, 1.0), Sense::LessEq, tu,
                           pre + "angu_" + l.id);
            model_.add_row(LinExpr{}.add(th, 1.0), Sense::GreaterEq, -tu,
                           pre + "angl_" + l.id);
        }

        // Voltage-product auxiliaries.
        Entry vh_i = bus_vhat(blk, bi, pre);
        Entry vh_j = bus_vhat(blk, bj, pre);
        const double wlo = busi.v_min * busj.v_min, whi = busi.v_max * busj.v_max;
        VarRef w = model_.add_var(pre + "w_" + l.id, wlo, whi);
        lv.w = Entry::of(w);
        model_.add(mccormick(w, blk.buses[size_t(bi)].v, blk.buses[size_t(bj)].v,
                             pre + "w_" + l.id));

        VarRef cs = model_.add_var(pre + "cs_" + l.id, 0.0, 1.0);
        lv.cs = Entry::of(cs);
        {
            const int before = int(model_.num_vars());
            model_.add(cos_envelope(cs, th, xt, tu, tm, one, alloc,
                                    pre + "cs_" + l.id));
            // cos_envelope allocates theta_sq right after `before`.
            if (model_.num_vars() > before) {
                const VarInfo& vi = model_.vars()[size_t(before)];
                lv.theta_sq = Entry::of(VarRef{before, vi.lb, vi.ub});
            }
        }
        const double snu = std::sin(tu);
        VarRef sn = model_.add_var(pre + "sn_" + l.id, -snu, snu);
        lv.sn = Entry::of(sn);
        model_.add(sin_envelope(sn, th, xt, tu, tm, pre + "sn_" + l.id));

        auto product = [&](const char* name, Entry a, Entry b) -> Entry {
            if (!a.is_var && a.value == 0.0) return Entry::constant(0.0);
            if (!a.is_var && a.value == 1.0) return b;
            if (!b.is_var && b.value == 0.0) return Entry::constant(0.0);
            if (!b.is_var && b.value == 1.0) return a;
            const double lo = interval_prod_lo(a.lb(), a.ub(), b.lb(), b.ub());
            const double hi = interval_prod_hi(a.lb(), a.ub(), b.lb(), b.ub());
            VarRef v = model_.add_var(pre + name + std::string("_") + l.id, lo, hi);
            model_.add(mccormick(v, a, b, pre + name + std::string("_") + l.id));
            return Entry::of(v);
        };

        lv.wc = product("wc", lv.w, lv.cs);
        lv.ws = product("ws", lv.w, lv.sn);
        lv.xv_i = product("xvi", xt, vh_i);
        lv.xv_j = product("xvj", xt, vh_j);

        const bool with_facts = lv.delta.is_var || lv.delta.value > 0.0;
        if (with_facts) {
            lv.dxv_i = product("dxvi", lv.delta, lv.xv_i);
            lv.dxv_j = product("dxvj", lv.delta, lv.xv_j);
            lv.dwc = product("dwc", lv.delta, lv.wc);
            lv.dws = product("dws", lv.delta, lv.ws);
        } else {
            lv.dxv_i = lv.dxv_j = lv.dwc = lv.dws = Entry::constant(0.0);
        }

        // Directed flows (p.u.).
        VarRef pij = model_.add_var(pre + "pij_" + l.id, -T, T);
        VarRef pji = model_.add_var(pre + "pji_" + l.id, -T, T);
        VarRef qij = model_.add_var(pre + "qij_" + l.id, -T, T);
        VarRef qji = model_.add_var(pre + "qji_" + l.id, -T, T);
        lv.p_ij = Entry::of(pij);
        lv.p_ji = Entry::of(pji);
        lv.q_ij = Entry::of(qij);
        lv.q_ji = Entry::of(qji);
        const double dG = Gb - G, dB = Bb - B;
        model_.add_row(LinExpr{}
                           .add(pij, 1.0)
                           .add(lv.dxv_i, -dG)
                           .add(lv.dwc, dG)
                           .add(lv.dws, dB)
                           .add(lv.xv_i, -G)
                           .add(lv.wc, G)
                           .add(lv.ws, B),
                       Sense::Equal, 0.0, pre + "pij_" + l.id);
        model_.add_row(LinExpr{}
                           .add(qij, 1.0)
                           .add(lv.dxv_i, dB)
                           .add(lv.dwc, -dB)
                           .add(lv.dws, dG)
                           .add(lv.xv_i, B)
                           .add(lv.wc, -B)
                           .add(lv.ws, G),
                       Sense::Equal, 0.0, pre + "qij_" + l.id);
        model_.add_row(LinExpr{}
                           .add(pji, 1.0)
                           .add(lv.dxv_j, -dG)
                           .add(lv.dwc, dG)
                           .add(lv.dws, -dB)
                           .add(lv.xv_j, -G)
                           .add(lv.wc, G)
                           .add(lv.ws, -B),
                       Sense::Equal, 0.0, pre + "pji_" + l.id);
        model_.add_row(LinExpr{}
                           .add(qji, 1.0)
                           .add(lv.dxv_j, dB)
                           .add(lv.dwc, -dB)
                           .add(lv.dws, -dG)
                           .add(lv.xv_j, B)
                           .add(lv.wc, -B)
                           .add(lv.ws, -G),
                       Sense::Equal, 0.0, pre + "qji_" + l.id);

        // Losses + current magnitude (3i)-(3k).
        const double ell_hi = (T * T) / (busi.v_min * busi.v_min);
        VarRef ell = model_.add_var(pre + "l_" + l.id, 0.0, ell_hi);
        lv.ell = Entry::of(ell);
        lv.dl = with_facts ? product("dl", lv.delta, lv.ell) : Entry::constant(0.0);
        model_.add_row(
            LinExpr{}.add(pij, 1.0).add(pji, 1.0).add(ell, -l.resistance),
            Sense::Equal, 0.0, pre + "lossp_" + l.id);
        model_.add_row(LinExpr{}
                           .add(qij, 1.0)
                           .add(qji, 1.0)
                           .add(ell, -l.reactance)
                           .add(lv.dl, -(l.reduced_reactance - l.reactance)),
                       Sense::Equal, 0.0, pre + "lossq_" + l.id);
        SocAtom cone;
        cone.x = {pij.id, qij.id};
        cone.y = ell.id;
        cone.z = vh_i.var.id;
        cone.tag = pre + "cone_" + l.id;
        model_.add_atom(std::move(cone));

        // Thermal limits (3n)-(3o) as cone atoms against x~ T^2.
        VarRef cap = xt.is_var
                         ? model_.add_var(pre + "cap_" + l.id, 0.0, T * T)
                         : model_.add_var(pre + "cap_" + l.id, T * T, T * T);
        lv.cap_ij = lv.cap_ji = Entry::of(cap);
        if (xt.is_var)
            model_.add_row(LinExpr{}.add(cap, 1.0).add(xt, -T * T), Sense::Equal, 0.0,
                           pre + "capdef_" + l.id);
        SocAtom tij, tji;
        tij.x = {pij.id, qij.id};
        tij.y = cap.id;
        tij.z = one.id;
        tij.tag = pre + "thij_" + l.id;
        tji.x = {pji.id, qji.id};
        tji.y = cap.id;
        tji.z = one.id;
        tji.tag = pre + "thji_" + l.id;
        model_.add_atom(std::move(tij));
        model_.add_atom(std::move(tji));

        kp[size_t(bi)].add(lv.p_ij, 1.0);
        kq[size_t(bi)].add(lv.q_ij, 1.0);
        kp[size_t(bj)].add(lv.p_ji, 1.0);
        kq[size_t(bj)].add(lv.q_ji, 1.0);
    }

    // Buses: generation, load service, balance.
    for (size_t bi = 0; bi < net.buses.size(); ++bi) {
        const Bus& b = net.buses[bi];
        BusVars& bv = blk.buses[bi];
        const double gp_u = b.existing_gen_p_max / base_;
        const double gq_l = b.existing_gen_q_min / base_;
        const double gq_u = b.existing_gen_q_max / base_;
        const Entry& u = fs_.u[bi];
        const Entry& zp_fs = fs_.zp[bi];
        const Entry& zq_fs = fs_.zq[bi];
        const bool can_build = u.is_var || u.value > 0.0;
        const double zp_cap = can_build ? b.new_gen_p_cap / base_ : 0.0;
        const double zq_cap = can_build ? b.new_gen_q_cap / base_ : 0.0;

        if (zp_cap > 0.0) {
            VarRef zp = model_.add_var(pre + "zp_" + b.id, 0.0,
                                       std::min(zp_cap, zp_fs.ub()));
            bv.zp = Entry::of(zp);
            if (zp_fs.is_var)
                model_.add_row(LinExpr{}.add(zp, 1.0).add(zp_fs, -1.0), Sense::LessEq,
                               0.0, pre + "zplink_" + b.id);
            if (u.is_var)
                model_.add_row(LinExpr{}.add(zp, 1.0).add(u, -zp_cap), Sense::LessEq,
                               0.0, pre + "zpu_" + b.id);
        } else {
            bv.zp = Entry::constant(0.0);
        }
        if (zq_cap > 0.0) {
            VarRef zq = model_.add_var(pre + "zq_" + b.id, 0.0,
                                       std::min(zq_cap, zq_fs.ub()));
            bv.zq = Entry::of(zq);
            if (zq_fs.is_var)
                model_.add_row(LinExpr{}.add(zq, 1.0).add(zq_fs, -1.0), Sense::LessEq,
                               0.0, pre + "zqlink_" + b.id);
            if (u.is_var)
                model_.add_row(LinExpr{}.add(zq, 1.0).add(u, -zq_cap), Sense::LessEq,
                               0.0, pre + "zqu_" + b.id);
            model_.add_row(LinExpr{}.add(bv.zp, 1.0).add(zq, -2.0), Sense::GreaterEq,
                           0.0, pre + "zp2zq_" + b.id);
        } else {
            bv.zq = Entry::constant(0.0);
        }

        // gp in [0, gp_u + zp^s]; gq in [gq_l - zq^s, gq_u + zq^s].
        const double gp_hi = gp_u + bv.zp.ub();
        if (gp_hi > 0.0) {
            VarRef gp = model_.add_var(pre + "gp_" + b.id, 0.0, gp_hi);
            bv.gp = Entry::of(gp);
            if (bv.zp.is_var)
                model_.add_row(LinExpr{}.add(gp, 1.0).add(bv.zp, -1.0), Sense::LessEq,
                               gp_u, pre + "gpcap_" + b.id);
        } else {
            bv.gp = Entry::constant(0.0);
        }
        const double gq_lo = gq_l - bv.zq.ub(), gq_hi = gq_u + bv.zq.ub();
        if (gq_lo != 0.0 || gq_hi != 0.0) {
            VarRef gq = model_.add_var(pre + "gq_" + b.id, gq_lo, gq_hi);
            bv.gq = Entry::of(gq);
            if (bv.zq.is_var) {
                model_.add_row(LinExpr{}.add(gq, 1.0).add(bv.zq, -1.0), Sense::LessEq,
                               gq_u, pre + "gqcap_" + b.id);
                model_.add_row(LinExpr{}.add(gq, 1.0).add(bv.zq, 1.0), Sense::GreaterEq,
                               gq_l, pre + "gqlo_" + b.id);
            }
        } else {
            bv.gq = Entry::constant(0.0);
        }

        const double dp = b.demand_p * opt_.load_scale / base_;
        const double dq = b.demand_q * opt_.load_scale / base_;
        bv.yp = dp > 0.0 ? Entry::of(model_.add_var(pre + "yp_" + b.id, 0, 1))
                         : Entry::constant(1.0);
        bv.yq = dq > 0.0 ? Entry::of(model_.add_var(pre + "yq_" + b.id, 0, 1))
                         : Entry::constant(1.0);

        LinExpr kclp = kp[bi];
        kclp.add(bv.gp, -1.0).add(bv.yp, dp);
        model_.add_row(kclp, Sense::Equal, 0.0, pre + "kclp_" + b.id);
        LinExpr kclq = kq[bi];
        kclq.add(bv.gq, -1.0).add(bv.yq, dq);
        model_.add_row(kclq, Sense::Equal, 0.0, pre + "kclq_" + b.id);
    }

    // Resilience constraints (per class, real and reactive).
    auto resilience = [&](bool critical, bool reactive, double frac, int slack_idx) {
        double total = 0.0;
        LinExpr served;
        for (size_t bi = 0; bi < net.buses.size(); ++bi) {
            const Bus& b = net.buses[bi];
            if (b.is_critical != critical) continue;
            const double d =
                (reactive ? b.demand_q : b.demand_p) * opt_.load_scale / base_;
            if (d <= 0.0) continue;
            total += d;
            served.add(reactive ? blk.buses[bi].yq : blk.buses[bi].yp, d);
        }
        if (total <= 0.0) return;
        const char* names[4] = {"res_p_cr", "res_q_cr", "res_p_ncr", "res_q_ncr"};
        if (slack_mode_) {
            VarRef sl = model_.add_var(pre + "lam_" + names[size_t(slack_idx)], 0.0,
                                       frac * total);
            blk.slack[size_t(slack_idx)] = Entry::of(sl);
            served.add(sl, 1.0);
        }
        model_.add_row(served, Sense::GreaterEq, frac * total,
                       pre + names[size_t(slack_idx)]);
    };
    resilience(true, false, net.params.lp_cr, 0);
    resilience(true, true, net.params.lq_cr, 1);
    resilience(false, false, net.params.lp_ncr, 2);
    resilience(false, true, net.params.lq_ncr, 3);
}

void MasterModel::add_dc_block(Block& blk, const Scenario& s) {
    const Network& net = *net_;
    const std::string pre = "s" + std::to_string(s.id) + "_";
    const double tu = theta_u_;
    const double tm = net.params.theta_m;
    const double phi_u = net.params.phi_u;

    const double theta_box = double(net.buses.size()) * tm;
    for (size_t bi = 0; bi < net.buses.size(); ++bi) {
        const Bus& b = net.buses[bi];
        blk.buses[bi].theta =
            bi == 0 ? Entry::of(model_.add_var(pre + "th_" + b.id, 0, 0))
                    : Entry::of(
                          model_.add_var(pre + "th_" + b.id, -theta_box, theta_box));
        blk.buses[bi].v = Entry::constant(1.0);
    }

    std::vector<LinExpr> kp(net.buses.size());
    for (size_t li = 0; li < net.lines.size(); ++li) {
        const Line& l = net.lines[li];
        LineVars& lv = blk.lines[li];
        Entry xt = line_state(blk, s, int(li), pre);
        if (!xt.is_var && xt.value == 0.0) {
            lv.p_ij = lv.p_ji = Entry::constant(0.0);
            continue;
        }
        const int bi = net.bus_index(l.from), bj = net.bus_index(l.to);
        auto [G, B] = admittance_of(l, false);
        auto [Gb, Bb] = admittance_of(l, true);
        (void)G;
        (void)Gb;
        const double T = l.thermal_limit / base_;
        const double bigM = std::abs(Bb) * tm;  // valid in both device states

        VarRef th = model_.add_var(pre + "thd_" + l.id, -tm, tm);
        lv.theta = Entry::of(th);
        LinExpr thdef;
        thdef.add(th, 1.0)
            .add(blk.buses[size_t(bi)].theta, -1.0)
            .add(blk.buses[size_t(bj)].theta, 1.0);
        if (lv.gamma.is_var || lv.gamma.value > 0.0) {
            VarRef phi = model_.add_var(pre + "phi_" + l.id, -phi_u, phi_u);
            lv.phi = Entry::of(phi);
            thdef.add(phi, -1.0);
            model_.add_row(LinExpr{}.add(phi, 1.0).add(lv.gamma, -phi_u),
                           Sense::LessEq, 0.0, pre + "phiu_" + l.id);
            model_.add_row(LinExpr{}.add(phi, 1.0).add(lv.gamma, phi_u),
                           Sense::GreaterEq, 0.0, pre + "phil_" + l.id);
        } else {
            lv.phi = Entry::constant(0.0);
        }
        model_.add_row(thdef, Sense::Equal, 0.0, pre + "thdef_" + l.id);

        VarRef p = model_.add_var(pre + "p_" + l.id, -T, T);
        lv.p_ij = Entry::of(p);
        lv.p_ji = Entry::constant(0.0);  // p_ji = -p_ij, folded into KCL

        const bool with_facts = lv.delta.is_var || lv.delta.value > 0.0;
        if (with_facts) {
            const double lo = interval_prod_lo(0, 1, -tm, tm);
            const double hi = interval_prod_hi(0, 1, -tm, tm);
            VarRef dth = model_.add_var(pre + "dth_" + l.id, lo, hi);
            lv.dtheta = Entry::of(dth);
            model_.add(mccormick(dth, lv.delta, Entry::of(th), pre + "dth_" + l.id));
        } else {
            lv.dtheta = Entry::constant(0.0);
        }
        // p = -B th - (Bb-B) dth within +-|Bb| theta_m (1 - x~)   (7a)-(7b)
        LinExpr flow;
        flow.add(p, 1.0).add(th, B).add(lv.dtheta, Bb - B);
        if (xt.is_var) {
            LinExpr up = flow, dn = flow;
            up.add(xt, bigM);
            model_.add_row(up, Sense::LessEq, bigM, pre + "dcfu_" + l.id);
            dn.add(xt, -bigM);
            model_.add_row(dn, Sense::GreaterEq, -bigM, pre + "dcfl_" + l.id);
            model_.add_row(LinExpr{}.add(p, 1.0).add(xt, -T), Sense::LessEq, 0.0,
                           pre + "dccapu_" + l.id);
            model_.add_row(LinExpr{}.add(p, 1.0).add(xt, T), Sense::GreaterEq, 0.0,
                           pre + "dccapl_" + l.id);
            model_.add_row(LinExpr{}.add(th, 1.0).add(xt, tm - tu), Sense::LessEq, tm,
                           pre + "angu_" + l.id);
            model_.add_row(LinExpr{}.add(th, 1.0).add(xt, tu - tm), Sense::GreaterEq,
                           -tm, pre + "angl_" + l.id);
        } else {
            model_.add_row(flow, Sense::Equal, 0.0, pre + "dcf_" + l.id);
            model_.add_row(LinExpr{}.add(th, 1.0), Sense::LessEq, tu,
                           pre + "angu_" + l.id);
            model_.add_row(LinExpr{}.add(th, 1.0), Sense::GreaterEq, -tu,
                           pre + "angl_" + l.id);
        }
        kp[size_t(bi)].add(p, 1.0);
        kp[size_t(bj)].add(p, -1.0);
    }

    for (size_t bi = 0; bi < net.buses.size(); ++bi) {
        const Bus& b = net.buses[bi];
        BusVars& bv = blk.buses[bi];
        const double gp_u = b.existing_gen_p_max / base_;
        const Entry& u = fs_.u[bi];
        const Entry& zp_fs = fs_.zp[bi];
        const bool can_build = u.is_var || u.value > 0.0;
        const double zp_cap = can_build ? b.new_gen_p_cap / base_ : 0.0;
        if (zp_cap > 0.0) {
            VarRef zp = model_.add_var(pre + "zp_" + b.id, 0.0,
                                       std::min(zp_cap, zp_fs.ub()));
            bv.zp = Entry::of(zp);
            if (zp_fs.is_var)
                model_.add_row(LinExpr{}.add(zp, 1.0).add(zp_fs, -1.0), Sense::LessEq,
                               0.0, pre + "zplink_" + b.id);
            if (u.is_var)
                model_.add_row(LinExpr{}.add(zp, 1.0).add(u, -zp_cap), Sense::LessEq,
                               0.0, pre + "zpu_" + b.id);
        } else {
            bv.zp = Entry::constant(0.0);
        }
        const double gp_hi = gp_u + bv.zp.ub();
        if (gp_hi > 0.0) {
            VarRef gp = model_.add_var(pre + "gp_" + b.id, 0.0, gp_hi);
            bv.gp = Entry::of(gp);
            if (bv.zp.is_var)
                model_.add_row(LinExpr{}.add(gp, 1.0).add(bv.zp, -1.0), Sense::LessEq,
                               gp_u, pre + "gpcap_" + b.id);
        } else {
            bv.gp = Entry::constant(0.0);
        }
        const double dp = b.demand_p * opt_.load_scale / base_;
        bv.yp = dp > 0.0 ? Entry::of(model_.add_var(pre + "yp_" + b.id, 0, 1))
                         : Entry::constant(1.0);
        bv.yq = Entry::constant(1.0);
        bv.gq = Entry::constant(0.0);
        bv.zq = Entry::constant(0.0);
        bv.v = Entry::constant(1.0);

        LinExpr kcl = kp[bi];
        kcl.add(bv.gp, -1.0).add(bv.yp, dp);
        model_.add_row(kcl, Sense::Equal, 0.0, pre + "kclp_" + b.id);
    }

    auto resilience = [&](bool critical, double frac, int slack_idx) {
        double total = 0.0;
        LinExpr served;
        for (size_t bi = 0; bi < net.buses.size(); ++bi) {
            const Bus& b = net.buses[bi];
            if (b.is_critical != critical) continue;
            const double d = b.demand_p * opt_.load_scale / base_;
            if (d <= 0.0) continue;
            total += d;
            served.add(blk.buses[bi].yp, d);
        }
        if (total <= 0.0) return;
        const char* names[4] = {"res_p_cr", "res_q_cr", "res_p_ncr", "res_q_ncr"};
        if (slack_mode_) {
            VarRef sl = model_.add_var(pre + "lam_" + names[size_t(slack_idx)], 0.0,
                                       frac * total);
            blk.slack[size_t(slack_idx)] = Entry::of(sl);
            served.add(sl, 1.0);
        }
        model_.add_row(served, Sense::GreaterEq, frac * total,
                       pre + names[size_t(slack_idx)]);
    };
    resilience(true, net.params.lp_cr, 0);
    resilience(false, net.params.lp_ncr, 2);
}

DesignDecision MasterModel::extract_design(const SolveResult& r,
                                           std::vector<std::string>* warnings) const {
    DesignDecision d = DesignDecision::zeros(*net_);
    for (size_t i = 0; i < net_->lines.size(); ++i) {
        const std::string id = net_->lines[i].id;
        d.build_line[i] = net_->lines[i].exists
                              ? 1
                              : uint8_t(round_binary(r.value(fs_.x[i]), "x_" + id,
                                                     warnings));
        d.add_switch[i] =
            uint8_t(round_binary(r.value(fs_.tau[i]), "tau_" + id, warnings));
        d.harden[i] = uint8_t(round_binary(r.value(fs_.t[i]), "t_" + id, warnings));
        d.facts[i] =
            uint8_t(round_binary(r.value(fs_.delta[i]), "facts_" + id, warnings));
        d.pst[i] = uint8_t(round_binary(r.value(fs_.gamma[i]), "pst_" + id, warnings));
    }
    for (size_t i = 0; i < net_->buses.size(); ++i) {
        const std::string id = net_->buses[i].id;
        d.build_gen[i] = uint8_t(round_binary(r.value(fs_.u[i]), "u_" + id, warnings));
        d.gen_capacity_p[i] = std::max(0.0, r.value(fs_.zp[i])) * base_;
        d.gen_capacity_q[i] = std::max(0.0, r.value(fs_.zq[i])) * base_;
    }
    d.validate(*net_);
    return d;
}

ScenarioOperation MasterModel::extract_operation(const SolveResult& r,
                                                 int block) const {
    const Block& blk = blocks_[size_t(block)];
    ScenarioOperation op;
    op.scenario_id = blk.scenario_id;
    op.lines.resize(net_->lines.size());
    op.buses.resize(net_->buses.size());
    for (size_t li = 0; li < net_->lines.size(); ++li) {
        const LineVars& lv = blk.lines[li];
        LineOperation& lo = op.lines[li];
        lo.active = round_binary(r.value(lv.xt), "xt", nullptr);
        lo.in_service = round_binary(r.value(lv.xs), "xs", nullptr);
        lo.switch_open = lo.in_service - lo.active;
        lo.hardened_used = lv.damaged ? lo.in_service : 0;
        lo.facts_on = round_binary(r.value(lv.delta), "delta", nullptr);
        lo.pst_on = round_binary(r.value(lv.gamma), "gamma", nullptr);
        lo.p_from = r.value(lv.p_ij) * base_;
        lo.q_from = r.value(lv.q_ij) * base_;
        if (opt_.mode == FlowMode::Dc) {
            lo.p_to = -lo.p_from;
            lo.q_to = 0.0;
        } else {
            lo.p_to = r.value(lv.p_ji) * base_;
            lo.q_to = r.value(lv.q_ji) * base_;
        }
        lo.current_sq = r.value(lv.ell);
        lo.angle_diff = lv.theta.is_var
                            ? r.value(lv.theta)
                            : r.value(blk.buses[size_t(net_->bus_index(
                                  net_->lines[li].from))].theta) -
                                  r.value(blk.buses[size_t(net_->bus_index(
                                      net_->lines[li].to))].theta);
        lo.phase_shift = r.value(lv.phi);
    }
    for (size_t bi = 0; bi < net_->buses.size(); ++bi) {
        const BusVars& bv = blk.buses[bi];
        BusOperation& bo = op.buses[bi];
        bo.angle = r.value(bv.theta);
        bo.voltage = r.value(bv.v);
        bo.gen_p = r.value(bv.gp) * base_;
        bo.gen_q = r.value(bv.gq) * base_;
        bo.cap_p = r.value(bv.zp) * base_;
        bo.cap_q = r.value(bv.zq) * base_;
        bo.served_frac_p = r.value(bv.yp);
        bo.served_frac_q = r.value(bv.yq);
        const Bus& b = net_->buses[bi];
        bo.served_p = bo.served_frac_p * b.demand_p * opt_.load_scale;
        bo.served_q = bo.served_frac_q * b.demand_q * opt_.load_scale;
    }
    return op;
}

double MasterModel::slack_value(const SolveResult& r, int block) const {
    const Block& blk = blocks_[size_t(block)];
    double s = 0.0;
    for (const Entry& sl : blk.slack)
        if (sl.is_var) s += r.value(sl);
    return s;
}

bool MasterModel::lift_point(int block, const AcPoint& pt,
                             std::vector<double>& x) const {
    const Network& net = *net_;
    const Block& blk = blocks_[size_t(block)];
    auto set = [&](const Entry& e, double v) {
        if (e.is_var)
            x[size_t(e.var.id)] = v;
        else if (std::abs(e.value - v) > 1e-7)
            return false;
        return true;
    };
    bool ok = true;
    if (model_.num_vars() > int(x.size())) x.resize(size_t(model_.num_vars()), 0.0);
    x[size_t(const_cast<MilpModel&>(model_).one().id)] = 1.0;
    for (size_t bi = 0; bi < net.buses.size(); ++bi) {
        const BusVars& bv = blk.buses[bi];
        ok &= set(bv.v, pt.v[bi]);
        ok &= set(bv.theta, pt.theta[bi]);
        if (bv.vhat.is_var) x[size_t(bv.vhat.var.id)] = pt.v[bi] * pt.v[bi];
        ok &= set(bv.gp, pt.gp[bi]);
        ok &= set(bv.gq, pt.gq[bi]);
        ok &= set(bv.yp, pt.yp[bi]);
        ok &= set(bv.yq, pt.yq[bi]);
        if (bv.zp.is_var) x[size_t(bv.zp.var.id)] = bv.zp.var.ub;
        if (bv.zq.is_var) x[size_t(bv.zq.var.id)] = bv.zq.var.ub;
    }
    for (size_t li = 0; li < net.lines.size(); ++li) {
        const LineVars& lv = blk.lines[li];
        const Line& l = net.lines[li];
        const int active = pt.active[li];
        const int xs_v = pt.in_service.empty() ? active : pt.in_service[li];
        ok &= set(lv.xt, double(active));
        ok &= set(lv.xs, double(xs_v));
        ok &= set(lv.delta, double(pt.facts_on[li]));
        ok &= set(lv.gamma, double(pt.pst_on[li]));
        const int bi = net.bus_index(l.from), bj = net.bus_index(l.to);
        const double vi = pt.v[size_t(bi)], vj = pt.v[size_t(bj)];
        const double phi = pt.phi[li];
        const double th = pt.theta[size_t(bi)] - pt.theta[size_t(bj)] + phi;
        ok &= set(lv.phi, phi);
        ok &= set(lv.theta, th);
        auto [G, B] = admittance_of(l, pt.facts_on[li] != 0);
        const double a = active;
        const double pij = a * (G * vi * vi - G * vi * vj * std::cos(th) -
                                B * vi * vj * std::sin(th));
        const double qij = a * (-B * vi * vi + B * vi * vj * std::cos(th) -
                                G * vi * vj * std::sin(th));
        const double pji = a * (G * vj * vj - G * vi * vj * std::cos(th) +
                                B * vi * vj * std::sin(th));
        const double qji = a * (-B * vj * vj + B * vi * vj * std::cos(th) +
                                G * vi * vj * std::sin(th));
        ok &= set(lv.p_ij, pij);
        ok &= set(lv.q_ij, qij);
        ok &= set(lv.p_ji, pji);
        ok &= set(lv.q_ji, qji);
        const double ell = a > 0 ? (pij * pij + qij * qij) / (vi * vi) : 0.0;
        ok &= set(lv.ell, ell);
        auto setaux = [&](const Entry& e, double v) {
            if (e.is_var) x[size_t(e.var.id)] = v;
        };
        setaux(lv.w, vi * vj);
        setaux(lv.cs, a * std::cos(th));
        setaux(lv.sn, a * std::sin(th));
        setaux(lv.wc, vi * vj * a * std::cos(th));
        setaux(lv.ws, vi * vj * a * std::sin(th));
        setaux(lv.xv_i, a * vi * vi);
        setaux(lv.xv_j, a * vj * vj);
        setaux(lv.theta_sq, th * th);
        const double dv = pt.facts_on[li];
        setaux(lv.dxv_i, dv * a * vi * vi);
        setaux(lv.dxv_j, dv * a * vj * vj);
        setaux(lv.dwc, dv * vi * vj * a * std::cos(th));
        setaux(lv.dws, dv * vi * vj * a * std::sin(th));
        setaux(lv.dl, dv * ell);
        setaux(lv.cap_ij, a * (l.thermal_limit / base_) * (l.thermal_limit / base_));
    }
    return ok;
}

double MasterModel::block_violation(int block, const std::vector<double>& x) const {
    const Block& blk = blocks_[size_t(block)];
    double worst = 0.0;
    const auto& rows = model_.rows();
    for (int r = blk.first_row; r < blk.last_row; ++r) {
        double lhs = 0.0;
        for (const auto& [id, c] : rows[size_t(r)].coef) lhs += c * x[size_t(id)];
        switch (rows[size_t(r)].sense) {
            case Sense::LessEq: worst = std::max(worst, lhs - rows[size_t(r)].rhs); break;
            case Sense::GreaterEq:
                worst = std::max(worst, rows[size_t(r)].rhs - lhs);
                break;
            case Sense::Equal:
                worst = std::max(worst, std::abs(lhs - rows[size_t(r)].rhs));
                break;
        }
    }
    const auto& atoms = model_.atoms();
    for (int a = blk.first_atom; a < blk.last_atom; ++a) {
        double xx = 0.0;
        for (int xi : atoms[size_t(a)].x) xx += x[size_t(xi)] * x[size_t(xi)];
        worst = std::max(worst,
                         xx - x[size_t(atoms[size_t(a)].y)] * x[size_t(atoms[size_t(a)].z)]);
    }
    return worst;
}

}  // namespace resgrid
