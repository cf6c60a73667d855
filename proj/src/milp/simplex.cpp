#include "resgrid/milp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace resgrid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-7;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-7;
constexpr double kZeroTol = 1e-11;
constexpr int kRefactorEvery = 256;
}  // namespace

enum Status : uint8_t { AtLB = 0, AtUB = 1, Basic = 2 };

struct SimplexSolver::Impl {
    // problem data (row-scaled)
    int n = 0;  // structural
    int m = 0;  // rows (slack vars n..n+m-1)
    std::vector<std::vector<std::pair<int, double>>> cols;  // structural columns
    std::vector<double> b;                                  // scaled rhs
    std::vector<Sense> sense;
    std::vector<double> cost;  // scaled structural costs (minimization)
    double cost_scale = 1.0;
    double obj_sign = 1.0;  // -1 when the model maximizes
    double obj_const = 0.0;

    // bounds over all vars (structural part refreshed per solve)
    std::vector<double> lb, ub;

    // basis state
    std::vector<int> basic;       // row -> var
    std::vector<uint8_t> status;  // var -> Status
    Eigen::MatrixXd binvT;        // transpose of B^-1
    std::vector<double> x;        // all vars
    long pivots_since_refactor = 0;
    bool basis_ready = false;

    const MilpModel* model = nullptr;

    void build(const MilpModel& mdl);
    void append_rows(size_t first_row);
    void refactor();
    void compute_basics();
    LpResult run(const std::vector<double>& slb, const std::vector<double>& sub);

    double lbv(int j) const { return lb[size_t(j)]; }
    double ubv(int j) const { return ub[size_t(j)]; }

    // w = B^-1 * A_j
    void ftran(int j, Eigen::VectorXd& w) const {
        w.setZero();
        if (j < n) {
            for (const auto& [r, a] : cols[size_t(j)]) w += a * binvT.row(r).transpose();
        } else {
            w = binvT.row(j - n).transpose();
        }
    }
    double col_dot(int j, const Eigen::VectorXd& y) const {
        if (j < n) {
            double s = 0.0;
            for (const auto& [r, a] : cols[size_t(j)]) s += a * y[r];
            return s;
        }
        return y[j - n];
    }
};

void SimplexSolver::Impl::build(const MilpModel& mdl) {
    model = &mdl;
    n = mdl.num_vars();
    m = 0;
    cols.assign(size_t(n), {});
    b.clear();
    sense.clear();
    cost.assign(size_t(n), 0.0);
    obj_sign = mdl.minimize() ? 1.0 : -1.0;
    obj_const = mdl.objective().constant;
    double cmax = 1.0;
    for (const auto& [id, c] : mdl.objective().terms) cmax = std::max(cmax, std::abs(c));
    cost_scale = cmax;
    for (const auto& [id, c] : mdl.objective().terms)
        cost[size_t(id)] += obj_sign * c / cost_scale;
    append_rows(0);
    lb.assign(size_t(n + m), 0.0);
    ub.assign(size_t(n + m), 0.0);
    basis_ready = false;
}

void SimplexSolver::Impl::append_rows(size_t first_row) {
    const auto& rows = model->rows();
    for (size_t r = first_row; r < rows.size(); ++r) {
        double scale = 0.0;
        for (const auto& [id, c] : rows[r].coef) scale = std::max(scale, std::abs(c));
        if (scale <= 0.0) scale = 1.0;
        const double inv = 1.0 / scale;
        for (const auto& [id, c] : rows[r].coef)
            cols[size_t(id)].emplace_back(int(r), c * inv);
        b.push_back(rows[r].rhs * inv);
        sense.push_back(rows[r].sense);
        ++m;
    }
}

void SimplexSolver::sync_rows() {
    const size_t have = size_t(impl_->m);
    if (model_->rows().size() == have && model_->num_vars() == impl_->n) return;
    if (model_->num_vars() != impl_->n) {
        // Variable space changed: full rebuild.
        impl_->build(*model_);
        n_ = impl_->n;
        m_ = impl_->m;
        return;
    }
    const int old_m = impl_->m;
    impl_->append_rows(have);
    m_ = impl_->m;
    impl_->lb.resize(size_t(impl_->n + impl_->m));
    impl_->ub.resize(size_t(impl_->n + impl_->m));
    if (impl_->basis_ready) {
        // New slacks enter basic; basis inverse grows by an identity block
        // only if the new rows' basic columns are slacks (they are).
        Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(impl_->m, impl_->m);
        grown.topLeftCorner(old_m, old_m) = impl_->binvT;
        for (int r = old_m; r < impl_->m; ++r) grown(r, r) = 1.0;
        // Off-diagonal coupling: new rows may involve variables basic in the
        // old rows; B is then block lower-triangular and the clean fix is a
        // refactor. Mark for refactor instead of updating incrementally.
        impl_->binvT = std::move(grown);
        impl_->basic.resize(size_t(impl_->m));
        impl_->status.resize(size_t(impl_->n + impl_->m), AtLB);
        impl_->x.resize(size_t(impl_->n + impl_->m), 0.0);
        for (int r = old_m; r < impl_->m; ++r) {
            impl_->basic[size_t(r)] = impl_->n + r;
            impl_->status[size_t(impl_->n + r)] = Basic;
        }
        impl_->refactor();
    }
}

void SimplexSolver::Impl::refactor() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    for (int r = 0; r < m; ++r) {
        const int j = basic[size_t(r)];
        if (j < n) {
            for (const auto& [ri, a] : cols[size_t(j)]) B(ri, r) = a;
        } else {
            B(j - n, r) = 1.0;
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    // Guard against a numerically singular basis: fall back to slacks.
    const Eigen::MatrixXd inv = lu.solve(Eigen::MatrixXd::Identity(m, m));
    if (!inv.allFinite()) {
        for (int r = 0; r < m; ++r) {
            const int j = basic[size_t(r)];
            if (status[size_t(j)] == Basic) {
                const double l = lbv(j), u = ubv(j);
                status[size_t(j)] = (std::isfinite(l) && (std::abs(l) <= std::abs(u)))
                                        ? AtLB
                                        : (std::isfinite(u) ? AtUB : AtLB);
            }
            basic[size_t(r)] = n + r;
            status[size_t(n + r)] = Basic;
        }
        binvT = Eigen::MatrixXd::Identity(m, m);
    } else {
        binvT = inv.transpose();
    }
    pivots_since_refactor = 0;
}

void SimplexSolver::Impl::compute_basics() {
    Eigen::VectorXd rhs(m);
    for (int r = 0; r < m; ++r) rhs[r] = b[size_t(r)];
    for (int j = 0; j < n; ++j) {
        if (status[size_t(j)] == Basic) continue;
        const double v = status[size_t(j)] == AtUB ? ubv(j) : lbv(j);
        x[size_t(j)] = v;
        if (v != 0.0)
            for (const auto& [r, a] : cols[size_t(j)]) rhs[r] -= a * v;
    }
    for (int r = 0; r < m; ++r) {
        const int j = n + r;
        if (status[size_t(j)] == Basic) continue;
        const double v = status[size_t(j)] == AtUB ? ubv(j) : lbv(j);
        x[size_t(j)] = v;
        if (v != 0.0) rhs[r] -= v;
    }
    Eigen::VectorXd xb = binvT.transpose() * rhs;
    for (int r = 0; r < m; ++r) x[size_t(basic[size_t(r)])] = xb[r];
}

LpResult SimplexSolver::Impl::run(const std::vector<double>& slb,
                                  const std::vector<double>& sub) {
    LpResult res;
    // Refresh bounds.
    for (int j = 0; j < n; ++j) {
        lb[size_t(j)] = slb[size_t(j)];
        ub[size_t(j)] = sub[size_t(j)];
        if (lb[size_t(j)] > ub[size_t(j)]) {
            res.status = LpStatus::Infeasible;
            return res;
        }
    }
    for (int r = 0; r < m; ++r) {
        const int j = n + r;
        switch (sense[size_t(r)]) {
            case Sense::LessEq:
                lb[size_t(j)] = 0.0;
                ub[size_t(j)] = kInf;
                break;
            case Sense::GreaterEq:
                lb[size_t(j)] = -kInf;
                ub[size_t(j)] = 0.0;
                break;
            case Sense::Equal:
                lb[size_t(j)] = 0.0;
                ub[size_t(j)] = 0.0;
                break;
        }
    }
    if (m == 0) {
        // Pure box problem.
        x.assign(size_t(n), 0.0);
        for (int j = 0; j < n; ++j)
            x[size_t(j)] = cost[size_t(j)] >= 0.0 ? lbv(j) : ubv(j);
        double obj = obj_sign * obj_const;
        for (int j = 0; j < n; ++j)
            if (cost[size_t(j)] != 0.0)
                obj += cost[size_t(j)] * cost_scale * x[size_t(j)];
        res.status = LpStatus::Optimal;
        res.objective = obj;
        return res;
    }

    if (!basis_ready) {
        basic.resize(size_t(m));
        status.assign(size_t(n + m), AtLB);
        x.assign(size_t(n + m), 0.0);
        for (int j = 0; j < n; ++j) {
            const double l = lbv(j), u = ubv(j);
            status[size_t(j)] = std::abs(l) <= std::abs(u) ? AtLB : AtUB;
        }
        for (int r = 0; r < m; ++r) {
            basic[size_t(r)] = n + r;
            status[size_t(n + r)] = Basic;
        }
        binvT = Eigen::MatrixXd::Identity(m, m);
        pivots_since_refactor = 0;
        basis_ready = true;
    } else {
        // Nonbasic values may sit at stale bounds; snap them.
        for (int j = 0; j < n + m; ++j) {
            if (status[size_t(j)] == Basic) continue;
            if (status[size_t(j)] == AtUB && !std::isfinite(ubv(j)))
                status[size_t(j)] = AtLB;
            if (status[size_t(j)] == AtLB && !std::isfinite(lbv(j)))
                status[size_t(j)] = AtUB;
        }
    }
    compute_basics();

    const long iter_cap = 20000 + 60L * (n + m);
    bool bland = false;
    int degenerate_run = 0;
    Eigen::VectorXd w(m), y(m), c1(m);
    int phase = 1;
    int feas_restarts = 0;

    for (long iter = 0; iter < iter_cap; ++iter) {
        ++res.iterations;
        if (pivots_since_refactor >= kRefactorEvery) {
            refactor();
            compute_basics();
        }

        // Classify basic feasibility.
        double infeas = 0.0;
        for (int r = 0; r < m; ++r) {
            const int j = basic[size_t(r)];
            const double v = x[size_t(j)];
            if (v < lbv(j) - kFeasTol)
                infeas += lbv(j) - v;
            else if (v > ubv(j) + kFeasTol)
                infeas += v - ubv(j);
        }
        phase = infeas > 0.0 ? 1 : 2;

        // Pricing vector.
        if (phase == 1) {
            for (int r = 0; r < m; ++r) {
                const int j = basic[size_t(r)];
                const double v = x[size_t(j)];
                c1[r] = v < lbv(j) - kFeasTol ? -1.0 : (v > ubv(j) + kFeasTol ? 1.0 : 0.0);
            }
        } else {
            for (int r = 0; r < m; ++r) {
                const int j = basic[size_t(r)];
                c1[r] = j < n ? cost[size_t(j)] : 0.0;
            }
        }
        y = binvT * c1;

        // Select entering variable.
        int enter = -1;
        double best = 0.0;
        int dir = +1;
        for (int j = 0; j < n + m; ++j) {
            if (status[size_t(j)] == Basic) continue;
            if (lbv(j) == ubv(j)) continue;  // fixed
            const double cj = (phase == 2 && j < n) ? cost[size_t(j)] : 0.0;
            const double d = cj - col_dot(j, y);
            const uint8_t st = status[size_t(j)];
            double score = 0.0;
            int sd = 0;
            if (st == AtLB && d < -kDualTol) {
                score = -d;
                sd = +1;
            } else if (st == AtUB && d > kDualTol) {
                score = d;
                sd = -1;
            }
            if (sd == 0) continue;
            if (bland) {
                enter = j;
                dir = sd;
                break;
            }
            if (score > best + 1e-15) {
                best = score;
                enter = j;
                dir = sd;
            }
        }

        if (enter < 0) {
            // Re-verify on fresh factors before concluding; eta drift can
            // fake both optimality and infeasibility.
            if (pivots_since_refactor > 0 && feas_restarts < 3) {
                ++feas_restarts;
                refactor();
                compute_basics();
                continue;
            }
            if (phase == 1) {
                res.status = LpStatus::Infeasible;
                return res;
            }
            double obj = obj_sign * obj_const;
            for (int j = 0; j < n; ++j)
                if (cost[size_t(j)] != 0.0)
                    obj += cost[size_t(j)] * cost_scale * x[size_t(j)];
            res.status = LpStatus::Optimal;
            res.objective = obj;
            return res;
        }

        ftran(enter, w);

        // Ratio test. Entering moves by t >= 0 in direction `dir`.
        double t_best = kInf;
        int leave_slot = -1;
        double leave_to = 0.0;  // bound the leaving variable lands on
        double best_piv = 0.0;
        const bool p1 = phase == 1;
        for (int r = 0; r < m; ++r) {
            const double wr = w[r];
            if (std::abs(wr) < 1e-10) continue;
            const int k = basic[size_t(r)];
            const double rate = -dir * wr;  // dx_k/dt
            const double v = x[size_t(k)];
            double t = kInf, to = 0.0;
            if (p1 && v < lbv(k) - kFeasTol) {
                if (rate > 0.0) {
                    t = (lbv(k) - v) / rate;
                    to = lbv(k);
                }
            } else if (p1 && v > ubv(k) + kFeasTol) {
                if (rate < 0.0) {
                    t = (ubv(k) - v) / rate;
                    to = ubv(k);
                }
            } else {
                if (rate > 0.0 && std::isfinite(ubv(k))) {
                    t = (ubv(k) - v) / rate;
                    to = ubv(k);
                } else if (rate < 0.0 && std::isfinite(lbv(k))) {
                    t = (lbv(k) - v) / rate;
                    to = lbv(k);
                }
            }
            if (t == kInf) continue;
            t = std::max(t, 0.0);
            if (t < t_best - 1e-12 ||
                (t < t_best + 1e-12 &&
                 (bland ? basic[size_t(r)] < (leave_slot >= 0
                                                  ? basic[size_t(leave_slot)]
                                                  : std::numeric_limits<int>::max())
                        : std::abs(wr) > best_piv))) {
                t_best = t;
                leave_slot = r;
                leave_to = to;
                best_piv = std::abs(wr);
            }
        }
        const double range = ubv(enter) - lbv(enter);
        const bool flip = std::isfinite(range) && range <= t_best + 1e-12;

        if (!flip && leave_slot < 0) {
            // No finite step: unbounded phase-2 objective (cannot occur with
            // bounded structurals) or numerical stall in phase 1.
            if (pivots_since_refactor > 0) {
                refactor();
                compute_basics();
                continue;
            }
            res.status = p1 ? LpStatus::Infeasible : LpStatus::Error;
            res.message = p1 ? "phase-1 stall" : "unbounded direction";
            return res;
        }

        const double t = flip ? range : t_best;
        if (t <= kZeroTol) {
            if (++degenerate_run > 120) bland = true;
        } else {
            degenerate_run = 0;
            bland = false;
        }

        // Apply the step.
        if (t != 0.0) {
            for (int r = 0; r < m; ++r) {
                if (w[r] == 0.0) continue;
                const int k = basic[size_t(r)];
                x[size_t(k)] -= dir * t * w[r];
            }
            x[size_t(enter)] =
                (status[size_t(enter)] == AtLB ? lbv(enter) : ubv(enter)) + dir * t;
        }
        if (flip) {
            status[size_t(enter)] = status[size_t(enter)] == AtLB ? AtUB : AtLB;
            x[size_t(enter)] = status[size_t(enter)] == AtLB ? lbv(enter) : ubv(enter);
            continue;
        }

        // Pivot.
        const int leave = basic[size_t(leave_slot)];
        const double piv = w[leave_slot];
        if (std::abs(piv) < kPivotTol) {
            if (pivots_since_refactor > 0) {
                refactor();
                compute_basics();
                continue;
            }
            res.status = LpStatus::Error;
            res.message = "tiny pivot after refactor";
            return res;
        }
        x[size_t(leave)] = leave_to;
        status[size_t(leave)] = leave_to == ubv(leave) ? AtUB : AtLB;
        status[size_t(enter)] = Basic;
        basic[size_t(leave_slot)] = enter;
        // binvT column update (rows of B^-1).
        Eigen::VectorXd pivcol = binvT.col(leave_slot) / piv;
        binvT.col(leave_slot) = pivcol;
        for (int r = 0; r < m; ++r) {
            if (r == leave_slot) continue;
            const double wr = w[r];
            if (wr != 0.0) binvT.col(r) -= wr * pivcol;
        }
        ++pivots_since_refactor;
    }

    res.status = LpStatus::IterLimit;
    res.message = "simplex iteration cap";
    return res;
}

SimplexSolver::SimplexSolver(const MilpModel& model)
    : impl_(std::make_shared<Impl>()), model_(&model) {
    impl_->build(model);
    n_ = impl_->n;
    m_ = impl_->m;
    xs_.assign(size_t(n_), 0.0);
}

LpResult SimplexSolver::solve(const std::vector<double>& lb,
                              const std::vector<double>& ub) {
    LpResult r = impl_->run(lb, ub);
    if (r.status == LpStatus::Optimal)
        for (int j = 0; j < n_; ++j) xs_[size_t(j)] = impl_->x[size_t(j)];
    return r;
}

}  // namespace resgrid
