#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "resgrid/envelope.hpp"
#include "resgrid/linear.hpp"

namespace resgrid {

enum class VarKind : uint8_t { Continuous, Binary, Integer };

struct VarInfo {
    std::string name;
    double lb = 0.0;
    double ub = 0.0;
    VarKind kind = VarKind::Continuous;
    int branch_priority = 0;  // higher branches first

    bool is_integral() const { return kind != VarKind::Continuous; }
};

enum class SolveStatus : uint8_t { Optimal, Infeasible, Limit, Error };

struct SolveResult {
    SolveStatus status = SolveStatus::Error;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double bound = -std::numeric_limits<double>::infinity();
    std::vector<double> values;
    long nodes = 0;
    int cut_rounds = 0;
    int cuts_added = 0;
    std::string message;

    bool optimal() const { return status == SolveStatus::Optimal; }
    double value(const VarRef& v) const { return values[size_t(v.id)]; }
    double value(const Entry& e) const { return e.is_var ? values[size_t(e.var.id)] : e.value; }
};

/// Mixed-integer linear model plus a registry of rotated-SOC atoms awaiting
/// outer-approximation cuts. Rows accumulate; cuts added by the cutting-plane
/// driver stay valid for the lifetime of the variable space.
class MilpModel {
public:
    VarRef add_var(std::string name, double lb, double ub,
                   VarKind kind = VarKind::Continuous, int branch_priority = 0);
    /// Lazily-created variable fixed to 1 (z operand of quadratic atoms).
    VarRef one();

    /// Returns the row index, or -1 when the row folded away as trivially
    /// true. Throws on a trivially violated empty row.
    int add_row(LinearConstraint row);
    int add_row(const LinExpr& e, Sense s, double rhs, std::string tag = {});
    void add(EnvelopeResult r);
    void add_atom(SocAtom a);

    void set_objective(LinExpr e, bool minimize = true);
    /// Adds (or updates) an objective floor row: objective expr >= floor.
    void set_objective_floor(double floor);
    void set_row_rhs(int row, double rhs);
    void set_var_bounds(const VarRef& v, double lb, double ub);

    int num_vars() const { return int(vars_.size()); }
    int num_rows() const { return int(rows_.size()); }
    const std::vector<VarInfo>& vars() const { return vars_; }
    const std::vector<LinearConstraint>& rows() const { return rows_; }
    const std::vector<SocAtom>& atoms() const { return atoms_; }
    const LinExpr& objective() const { return objective_; }
    bool minimize() const { return minimize_; }

    double objective_value(const std::vector<double>& x) const;

    /// Plain-text dump (debugging aid, not a stability guarantee):
    ///   min: <terms> + <const>
    ///   r<k>[tag]: <terms> <= | >= | = <rhs>
    ///   soc: [x...] <= y z
    ///   <name> in [lb, ub] (bin|int)
    std::string dump_lp() const;

private:
    std::vector<VarInfo> vars_;
    std::vector<LinearConstraint> rows_;
    std::vector<SocAtom> atoms_;
    LinExpr objective_;
    bool minimize_ = true;
    int one_ = -1;
    int objective_floor_row_ = -1;
};

struct MilpOptions {
    double rel_gap = 1e-3;         // MILP optimality gap (paper setting 0.1%)
    double int_tol = 1e-7;
    double cut_tol = -1.0;         // <0: auto 1e-6 * max(1, |y*z|)
    int max_cut_rounds = 500;
    long max_nodes = 2000000;
    double time_limit_s = std::numeric_limits<double>::infinity();
    double y_floor = 1e-6;         // epsilon clamp for x'x/y linearization
    bool log = false;
};

/// Narrow engine contract: any MILP solver that can take the linear part of
/// a MilpModel and return values. The bundled reference adapter is the
/// simplex + branch-and-bound engine in this repo.
class MilpBackend {
public:
    virtual ~MilpBackend() = default;
    virtual SolveResult solve(const MilpModel& model, const MilpOptions& opt) = 0;
    virtual bool reentrant() const = 0;
    virtual std::string name() const = 0;
};

/// Reference adapter. Stateless across calls; safe to share between threads.
class SimplexBackend final : public MilpBackend {
public:
    SolveResult solve(const MilpModel& model, const MilpOptions& opt) override;
    bool reentrant() const override { return true; }
    std::string name() const override { return "bounded-simplex-bb"; }
};

MilpBackend& default_backend();

/// Solves the linear part. Throws std::invalid_argument if the model holds
/// SOC atoms (use solve_with_cuts for those).
SolveResult solve_milp(const MilpModel& model, const MilpOptions& opt = {},
                       MilpBackend* backend = nullptr);

/// First-order underestimator cut of f(x,y)=x'x/y at the given point,
/// valid for the whole rotated cone {x'x <= yz, y >= 0}. The linearization
/// point's y is clamped below by y_floor.
LinearConstraint gradient_cut(const SocAtom& atom, const std::vector<double>& point,
                              double y_floor);

/// Algorithm: solve MILP, add gradient cuts for violated atoms, repeat.
/// Cuts are appended to the model and persist across calls.
SolveResult solve_with_cuts(MilpModel& model, const MilpOptions& opt = {},
                            MilpBackend* backend = nullptr);

/// Worst violation x'x - y*z over the model's atoms at `x` (0 if none).
double max_soc_violation(const MilpModel& model, const std::vector<double>& x);

}  // namespace resgrid
