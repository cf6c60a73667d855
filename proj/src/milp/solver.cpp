#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include "resgrid/milp/model.hpp"
#include "resgrid/milp/simplex.hpp"

namespace resgrid {

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
    double bound;
    long id;
    // Accumulated bound overrides along the path from the root.
    std::vector<std::tuple<int, double, double>> fixes;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.id < b.id;
    }
};

class BranchAndBound {
public:
    BranchAndBound(const MilpModel& model, const MilpOptions& opt)
        : model_(model), opt_(opt), solver_(model) {
        root_lb_.reserve(size_t(model.num_vars()));
        root_ub_.reserve(size_t(model.num_vars()));
        for (const VarInfo& v : model.vars()) {
            root_lb_.push_back(v.lb);
            root_ub_.push_back(v.ub);
        }
        for (int j = 0; j < model.num_vars(); ++j)
            if (model.vars()[size_t(j)].is_integral()) int_vars_.push_back(j);
    }

    SolveResult run() {
        const auto t0 = Clock::now();
        SolveResult out;
        double incumbent = std::numeric_limits<double>::infinity();
        std::vector<double> inc_x;
        double pruned_bound = std::numeric_limits<double>::infinity();
        std::set<Node, NodeOrder> open;
        long next_id = 0;
        long nodes = 0;

        std::vector<double> lb = root_lb_, ub = root_ub_;
        LpResult root = solver_.solve(lb, ub);
        if (root.status == LpStatus::Infeasible) {
            out.status = SolveStatus::Infeasible;
            out.bound = (model_.minimize() ? 1.0 : -1.0) *
                        std::numeric_limits<double>::infinity();
            return out;
        }
        if (root.status != LpStatus::Optimal) {
            out.status = SolveStatus::Error;
            out.message = "root LP: " + root.message;
            return out;
        }
        double global_bound = root.objective;

        auto accept_if_integral = [&](const LpResult& lp) -> bool {
            if (lp.status != LpStatus::Optimal) return false;
            const auto& x = solver_.solution();
            if (frac_var(x) >= 0) return false;
            if (lp.objective < incumbent) {
                incumbent = lp.objective;
                inc_x = x;
            }
            return true;
        };

        auto gap_cut = [&]() {
            return incumbent - opt_.rel_gap * std::max(1.0, std::abs(incumbent));
        };

        if (!accept_if_integral(root)) {
            dive(lb, ub, incumbent, inc_x);
            Node n0;
            n0.bound = root.objective;
            n0.id = next_id++;
            open.insert(std::move(n0));
        }

        while (!open.empty()) {
            if (nodes >= opt_.max_nodes ||
                std::chrono::duration<double>(Clock::now() - t0).count() >
                    opt_.time_limit_s) {
                out.status = SolveStatus::Limit;
                out.message = "node or time limit";
                break;
            }
            Node node = *open.begin();
            open.erase(open.begin());
            global_bound = node.bound;
            if (node.bound >= gap_cut()) {
                pruned_bound = std::min(pruned_bound, node.bound);
                // Everything else in the best-first queue is at least as bad.
                for (const Node& rest : open)
                    pruned_bound = std::min(pruned_bound, rest.bound);
                open.clear();
                break;
            }
            ++nodes;
            apply_fixes(node, lb, ub);
            LpResult lp = solver_.solve(lb, ub);
            if (lp.status == LpStatus::Infeasible) {
                restore(lb, ub);
                continue;
            }
            if (lp.status != LpStatus::Optimal) {
                out.status = SolveStatus::Error;
                out.message = "node LP: " + lp.message;
                restore(lb, ub);
                return out;
            }
            if (lp.objective >= gap_cut()) {
                pruned_bound = std::min(pruned_bound, lp.objective);
                restore(lb, ub);
                continue;
            }
            if (accept_if_integral(lp)) {
                restore(lb, ub);
                continue;
            }
            const std::vector<double> x = solver_.solution();
            if (nodes % 64 == 0) dive(lb, ub, incumbent, inc_x);
            const int bv = frac_var(x);
            const double xv = x[size_t(bv)];
            Node down = node, up = node;
            down.id = next_id++;
            up.id = next_id++;
            down.bound = up.bound = lp.objective;
            down.fixes.emplace_back(bv, root_lb_[size_t(bv)], std::floor(xv));
            up.fixes.emplace_back(bv, std::ceil(xv), root_ub_[size_t(bv)]);
            // Explore the LP-suggested side first (lower id wins ties).
            if (xv - std::floor(xv) > 0.5) std::swap(down.id, up.id);
            open.insert(std::move(down));
            open.insert(std::move(up));
            restore(lb, ub);
        }

        out.nodes = nodes;
        const double sign = model_.minimize() ? 1.0 : -1.0;
        if (!inc_x.empty()) {
            const double proven =
                open.empty() ? std::min(pruned_bound, incumbent)
                             : std::min(open.begin()->bound, pruned_bound);
            out.bound = sign * std::min(proven, incumbent);
            out.objective = sign * incumbent;
            out.values = std::move(inc_x);
            if (out.status != SolveStatus::Limit) out.status = SolveStatus::Optimal;
        } else if (out.status == SolveStatus::Limit) {
            out.bound = sign * global_bound;
        } else {
            // No integral point exists (every leaf infeasible).
            out.status = SolveStatus::Infeasible;
            out.bound = sign * std::numeric_limits<double>::infinity();
        }
        return out;
    }

private:
    int frac_var(const std::vector<double>& x) const {
        int best = -1;
        double best_score = -1.0;
        int best_prio = std::numeric_limits<int>::min();
        for (int j : int_vars_) {
            const double v = x[size_t(j)];
            const double f = v - std::floor(v);
            const double score = std::min(f, 1.0 - f);
            if (score <= opt_.int_tol) continue;
            const int prio = model_.vars()[size_t(j)].branch_priority;
            if (prio > best_prio ||
                (prio == best_prio && score > best_score + 1e-12)) {
                best = j;
                best_score = score;
                best_prio = prio;
            }
        }
        return best;
    }

    void apply_fixes(const Node& n, std::vector<double>& lb,
                     std::vector<double>& ub) {
        touched_.clear();
        for (const auto& [j, l, u] : n.fixes) {
            lb[size_t(j)] = std::max(lb[size_t(j)], l);
            ub[size_t(j)] = std::min(ub[size_t(j)], u);
            touched_.push_back(j);
        }
    }

    void restore(std::vector<double>& lb, std::vector<double>& ub) {
        for (int j : touched_) {
            lb[size_t(j)] = root_lb_[size_t(j)];
            ub[size_t(j)] = root_ub_[size_t(j)];
        }
        touched_.clear();
    }

    /// Round-and-fix dive from the current LP point; updates the incumbent
    /// when it lands on a feasible integral solution.
    void dive(std::vector<double>& lb, std::vector<double>& ub, double& incumbent,
              std::vector<double>& inc_x) {
        std::vector<std::tuple<int, double, double>> saved;
        bool ok = true;
        for (size_t step = 0; step < int_vars_.size() + 1; ++step) {
            const auto& x = solver_.solution();
            const int j = frac_var(x);
            if (j < 0) break;
            const double r = std::round(x[size_t(j)]);
            saved.emplace_back(j, lb[size_t(j)], ub[size_t(j)]);
            lb[size_t(j)] = r;
            ub[size_t(j)] = r;
            LpResult lp = solver_.solve(lb, ub);
            if (lp.status != LpStatus::Optimal || lp.objective >= incumbent) {
                ok = false;
                break;
            }
        }
        if (ok) {
            LpResult lp = solver_.solve(lb, ub);
            if (lp.status == LpStatus::Optimal) {
                const auto& x = solver_.solution();
                if (frac_var(x) < 0 && lp.objective < incumbent) {
                    incumbent = lp.objective;
                    inc_x = x;
                }
            }
        }
        for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
            lb[size_t(std::get<0>(*it))] = std::get<1>(*it);
            ub[size_t(std::get<0>(*it))] = std::get<2>(*it);
        }
    }

    const MilpModel& model_;
    const MilpOptions& opt_;
    SimplexSolver solver_;
    std::vector<double> root_lb_, root_ub_;
    std::vector<int> int_vars_;
    std::vector<int> touched_;
};

}  // namespace

SolveResult SimplexBackend::solve(const MilpModel& model, const MilpOptions& opt) {
    BranchAndBound bb(model, opt);
    return bb.run();
}

MilpBackend& default_backend() {
    static SimplexBackend backend;
    return backend;
}

SolveResult solve_milp(const MilpModel& model, const MilpOptions& opt,
                       MilpBackend* backend) {
    if (!model.atoms().empty())
        throw std::invalid_argument(
            "solve_milp: model has rotated-SOC atoms; use solve_with_cuts");
    return (backend ? *backend : default_backend()).solve(model, opt);
}

LinearConstraint gradient_cut(const SocAtom& atom, const std::vector<double>& point,
                              double y_floor) {
    const double yhat = std::max(point[size_t(atom.y)], y_floor);
    double xx = 0.0;
    LinearConstraint cut;
    cut.tag = "soc_cut";
    for (int xi : atom.x) {
        const double xv = point[size_t(xi)];
        xx += xv * xv;
        if (xv != 0.0) cut.coef.emplace_back(xi, 2.0 * xv / yhat);
    }
    cut.coef.emplace_back(atom.y, -xx / (yhat * yhat));
    cut.coef.emplace_back(atom.z, -1.0);
    cut.sense = Sense::LessEq;
    cut.rhs = 0.0;
    return cut;
}

double max_soc_violation(const MilpModel& model, const std::vector<double>& x) {
    double worst = 0.0;
    for (const SocAtom& a : model.atoms()) {
        double xx = 0.0;
        for (int xi : a.x) xx += x[size_t(xi)] * x[size_t(xi)];
        worst = std::max(worst, xx - x[size_t(a.y)] * x[size_t(a.z)]);
    }
    return worst;
}

SolveResult solve_with_cuts(MilpModel& model, const MilpOptions& opt,
                            MilpBackend* backend) {
    MilpBackend& eng = backend ? *backend : default_backend();
    SolveResult res;
    int cuts_added = 0;
    for (int round = 1; round <= opt.max_cut_rounds; ++round) {
        res = eng.solve(model, opt);
        res.cut_rounds = round;
        res.cuts_added = cuts_added;
        if (res.status != SolveStatus::Optimal) return res;
        bool any = false;
        for (const SocAtom& a : model.atoms()) {
            double xx = 0.0;
            for (int xi : a.x) xx += res.values[size_t(xi)] * res.values[size_t(xi)];
            const double yz = res.values[size_t(a.y)] * res.values[size_t(a.z)];
            const double tol =
                opt.cut_tol >= 0.0 ? opt.cut_tol : 1e-6 * std::max(1.0, std::abs(yz));
            if (xx > yz + tol) {
                model.add_row(gradient_cut(a, res.values, opt.y_floor));
                ++cuts_added;
                any = true;
            }
        }
        if (!any) {
            res.cuts_added = cuts_added;
            return res;
        }
    }
    res.status = SolveStatus::Limit;
    res.message = "cut round cap reached";
    res.cuts_added = cuts_added;
    return res;
}

}  // namespace resgrid
