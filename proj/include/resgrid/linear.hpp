#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace resgrid {

/// Handle to a model variable. Bounds ride along so constraint factories
/// (envelopes) can be used without a back-pointer to the model.
struct VarRef {
    int id = -1;
    double lb = 0.0;
    double ub = 0.0;

    bool valid() const { return id >= 0; }
    bool is_binary_box() const { return lb == 0.0 && ub == 1.0; }
};

enum class Sense : uint8_t { LessEq, GreaterEq, Equal };

/// Sparse linear constraint: sum coef_k * var_k  (sense)  rhs.
struct LinearConstraint {
    std::vector<std::pair<int, double>> coef;
    Sense sense = Sense::LessEq;
    double rhs = 0.0;
    std::string tag;  // diagnostic label, not semantic
};

/// Rotated second-order cone atom: x'x <= y*z with y,z >= 0.
struct SocAtom {
    std::vector<int> x;
    int y = -1;
    int z = -1;
    std::string tag;
};

/// A model quantity that is either a live variable or a decided constant.
/// Builders fold constants into rows, which is how fixed first-stage
/// decisions shrink scenario blocks.
struct Entry {
    VarRef var;      // valid iff is_var
    double value = 0.0;
    bool is_var = false;

    static Entry of(VarRef v) { return Entry{v, 0.0, true}; }
    static Entry constant(double c) { return Entry{{}, c, false}; }

    double lb() const { return is_var ? var.lb : value; }
    double ub() const { return is_var ? var.ub : value; }
};

/// Incremental builder for one row: collects terms, folds Entry constants
/// into the constant part (moved to the rhs on emission).
struct LinExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    LinExpr& add(const VarRef& v, double c) {
        if (c != 0.0) terms.emplace_back(v.id, c);
        return *this;
    }
    LinExpr& add(const Entry& e, double c) {
        if (c == 0.0) return *this;
        if (e.is_var)
            terms.emplace_back(e.var.id, c);
        else
            constant += c * e.value;
        return *this;
    }
    LinExpr& add(double c) {
        constant += c;
        return *this;
    }

    LinearConstraint row(Sense s, double rhs, std::string tag = {}) const {
        LinearConstraint c;
        c.coef = terms;
        c.sense = s;
        c.rhs = rhs - constant;
        c.tag = std::move(tag);
        return c;
    }
};

inline double interval_prod_lo(double al, double au, double bl, double bu) {
    return std::fmin(std::fmin(al * bl, al * bu), std::fmin(au * bl, au * bu));
}
inline double interval_prod_hi(double al, double au, double bl, double bu) {
    return std::fmax(std::fmax(al * bl, al * bu), std::fmax(au * bl, au * bu));
}

}  // namespace resgrid
