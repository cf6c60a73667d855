#include "resgrid/milp/model.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace resgrid {

VarRef MilpModel::add_var(std::string name, double lb, double ub, VarKind kind,
                          int branch_priority) {
    if (!(lb <= ub))
        throw std::invalid_argument("variable '" + name + "': lb > ub");
    if (!std::isfinite(lb) || !std::isfinite(ub))
        throw std::invalid_argument("variable '" + name + "': bounds must be finite");
    VarInfo v;
    v.name = std::move(name);
    v.lb = lb;
    v.ub = ub;
    v.kind = kind;
    v.branch_priority = branch_priority;
    vars_.push_back(std::move(v));
    return VarRef{int(vars_.size()) - 1, lb, ub};
}

VarRef MilpModel::one() {
    if (one_ < 0) one_ = add_var("__one", 1.0, 1.0).id;
    return VarRef{one_, 1.0, 1.0};
}

int MilpModel::add_row(LinearConstraint row) {
    // Merge duplicate columns, drop zeros.
    std::sort(row.coef.begin(), row.coef.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<int, double>> merged;
    for (const auto& [id, c] : row.coef) {
        if (id < 0 || id >= int(vars_.size()))
            throw std::invalid_argument("row references undeclared variable");
        if (!merged.empty() && merged.back().first == id)
            merged.back().second += c;
        else
            merged.emplace_back(id, c);
    }
    std::erase_if(merged, [](const auto& t) { return t.second == 0.0; });
    row.coef = std::move(merged);
    if (row.coef.empty()) {
        const bool ok = (row.sense == Sense::LessEq && 0.0 <= row.rhs + 1e-12) ||
                        (row.sense == Sense::GreaterEq && 0.0 >= row.rhs - 1e-12) ||
                        (row.sense == Sense::Equal && std::abs(row.rhs) <= 1e-12);
        if (!ok)
            throw std::invalid_argument("row '" + row.tag +
                                        "' folded to a violated constant");
        return -1;
    }
    rows_.push_back(std::move(row));
    return int(rows_.size()) - 1;
}

int MilpModel::add_row(const LinExpr& e, Sense s, double rhs, std::string tag) {
    return add_row(e.row(s, rhs, std::move(tag)));
}

void MilpModel::add(EnvelopeResult r) {
    for (auto& row : r.rows) add_row(std::move(row));
    for (auto& a : r.atoms) add_atom(std::move(a));
}

void MilpModel::add_atom(SocAtom a) {
    if (a.y < 0 || a.z < 0 || a.y >= int(vars_.size()) || a.z >= int(vars_.size()))
        throw std::invalid_argument("soc atom references undeclared variable");
    if (vars_[size_t(a.y)].lb < 0.0 || vars_[size_t(a.z)].lb < 0.0)
        throw std::invalid_argument("soc atom needs y, z with nonnegative lower bounds");
    atoms_.push_back(std::move(a));
}

void MilpModel::set_objective(LinExpr e, bool minimize) {
    objective_ = std::move(e);
    minimize_ = minimize;
}

void MilpModel::set_objective_floor(double floor) {
    if (objective_floor_row_ >= 0) {
        rows_[size_t(objective_floor_row_)].rhs = floor - objective_.constant;
        return;
    }
    LinearConstraint c;
    c.coef = objective_.terms;
    c.sense = minimize_ ? Sense::GreaterEq : Sense::LessEq;
    c.rhs = floor - objective_.constant;
    c.tag = "objective_floor";
    objective_floor_row_ = add_row(std::move(c));
}

void MilpModel::set_row_rhs(int row, double rhs) { rows_[size_t(row)].rhs = rhs; }

void MilpModel::set_var_bounds(const VarRef& v, double lb, double ub) {
    vars_[size_t(v.id)].lb = lb;
    vars_[size_t(v.id)].ub = ub;
}

double MilpModel::objective_value(const std::vector<double>& x) const {
    double s = objective_.constant;
    for (const auto& [id, c] : objective_.terms) s += c * x[size_t(id)];
    return s;
}

namespace {
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}
}  // namespace

std::string MilpModel::dump_lp() const {
    std::ostringstream os;
    os << (minimize_ ? "min:" : "max:");
    for (const auto& [id, c] : objective_.terms)
        os << " " << (c >= 0 ? "+" : "") << num(c) << " " << vars_[size_t(id)].name;
    if (objective_.constant != 0.0) os << " + " << num(objective_.constant);
    os << "\n";
    for (size_t r = 0; r < rows_.size(); ++r) {
        os << "r" << r;
        if (!rows_[r].tag.empty()) os << "[" << rows_[r].tag << "]";
        os << ":";
        for (const auto& [id, c] : rows_[r].coef)
            os << " " << (c >= 0 ? "+" : "") << num(c) << " " << vars_[size_t(id)].name;
        os << (rows_[r].sense == Sense::LessEq    ? " <= "
               : rows_[r].sense == Sense::GreaterEq ? " >= "
                                                    : " = ")
           << num(rows_[r].rhs) << "\n";
    }
    for (const SocAtom& a : atoms_) {
        os << "soc:";
        for (int xi : a.x) os << " " << vars_[size_t(xi)].name;
        os << " | " << vars_[size_t(a.y)].name << " " << vars_[size_t(a.z)].name << "\n";
    }
    for (const VarInfo& v : vars_) {
        os << v.name << " in [" << num(v.lb) << ", " << num(v.ub) << "]";
        if (v.kind == VarKind::Binary) os << " bin";
        if (v.kind == VarKind::Integer) os << " int";
        os << "\n";
    }
    return os.str();
}

}  // namespace resgrid
