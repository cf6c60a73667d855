#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "resgrid/envelope.hpp"
#include "resgrid/linear.hpp"

namespace resgrid::testutil {

/// Interval of `target` values admitted by the emitted rows/atoms once all
/// other variables are pinned to `vals`. Starts from the variable's own box.
struct Admitted {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool feasible = true;

    double width() const { return hi - lo; }
};

inline Admitted admitted_interval(const EnvelopeResult& er, const VarRef& target,
                                  const std::map<int, double>& vals) {
    Admitted box;
    box.lo = target.lb;
    box.hi = target.ub;
    for (const LinearConstraint& row : er.rows) {
        double ct = 0.0;
        double rest = 0.0;
        for (const auto& [id, c] : row.coef) {
            if (id == target.id)
                ct += c;
            else
                rest += c * vals.at(id);
        }
        if (ct == 0.0) {
            const double lhs = rest;
            const bool ok = row.sense == Sense::LessEq      ? lhs <= row.rhs + 1e-9
                            : row.sense == Sense::GreaterEq ? lhs >= row.rhs - 1e-9
                                                            : std::abs(lhs - row.rhs) <= 1e-9;
            if (!ok) box.feasible = false;
            continue;
        }
        const double b = (row.rhs - rest) / ct;
        switch (row.sense) {
            case Sense::LessEq:
                if (ct > 0)
                    box.hi = std::min(box.hi, b);
                else
                    box.lo = std::max(box.lo, b);
                break;
            case Sense::GreaterEq:
                if (ct > 0)
                    box.lo = std::max(box.lo, b);
                else
                    box.hi = std::min(box.hi, b);
                break;
            case Sense::Equal:
                box.lo = std::max(box.lo, b);
                box.hi = std::min(box.hi, b);
                break;
        }
    }
    for (const SocAtom& a : er.atoms) {
        // Only the y >= sum x^2 / z pattern appears in envelope results.
        if (a.y == target.id) {
            double xx = 0.0;
            for (int xi : a.x) xx += vals.at(xi) * vals.at(xi);
            const double z = vals.count(a.z) ? vals.at(a.z) : 1.0;
            if (z > 0) box.lo = std::max(box.lo, xx / z);
        }
    }
    if (box.lo > box.hi + 1e-9) box.feasible = false;
    return box;
}

/// Max violation of the rows/atoms at a full assignment (true-point check).
inline double max_violation(const EnvelopeResult& er, const std::map<int, double>& vals) {
    double worst = 0.0;
    for (const LinearConstraint& row : er.rows) {
        double lhs = 0.0;
        for (const auto& [id, c] : row.coef) lhs += c * vals.at(id);
        double v = 0.0;
        switch (row.sense) {
            case Sense::LessEq: v = lhs - row.rhs; break;
            case Sense::GreaterEq: v = row.rhs - lhs; break;
            case Sense::Equal: v = std::abs(lhs - row.rhs); break;
        }
        worst = std::fmax(worst, v);
    }
    for (const SocAtom& a : er.atoms) {
        double xx = 0.0;
        for (int xi : a.x) xx += vals.at(xi) * vals.at(xi);
        worst = std::fmax(worst, xx - vals.at(a.y) * vals.at(a.z));
    }
    return worst;
}

/// Trivial allocator for standalone envelope tests.
class FreshVars {
public:
    VarRef make(const std::string&, double lb, double ub) {
        created.push_back(VarRef{next_++, lb, ub});
        return created.back();
    }
    VarAlloc alloc() {
        return [this](const std::string& n, double lb, double ub) {
            return make(n, lb, ub);
        };
    }
    int reserve_id() { return next_++; }

    std::vector<VarRef> created;

private:
    int next_ = 0;
};

}  // namespace resgrid::testutil
