#include "resgrid/envelope.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace resgrid {

constexpr double kHalfPi = std::numbers::pi / 2.0;

namespace {

void check_bounded(const Entry& e, const char* role) {
    if (!std::isfinite(e.lb()) || !std::isfinite(e.ub()))
        throw std::invalid_argument(std::string("envelope operand '") + role +
                                    "' must have finite bounds");
}

LinearConstraint row2(VarRef xhat, Entry x, Entry y, double cx, double cy, double c0,
                      Sense s, const std::string& tag) {
    // xhat (s) cx*x + cy*y + c0
    LinExpr e;
    e.add(xhat, 1.0).add(x, -cx).add(y, -cy);
    return e.row(s, c0, tag);
}

}  // namespace

EnvelopeResult mccormick(VarRef xhat, Entry x, Entry y, const std::string& tag) {
    check_bounded(x, "x");
    check_bounded(y, "y");
    EnvelopeResult out;
    if (!x.is_var && !y.is_var) {
        LinExpr e;
        e.add(xhat, 1.0);
        out.rows.push_back(e.row(Sense::Equal, x.value * y.value, tag));
        return out;
    }
    if (!x.is_var || !y.is_var) {
        // Constant factor: the product is linear, emit it exactly.
        const double c = x.is_var ? y.value : x.value;
        const Entry& v = x.is_var ? x : y;
        LinExpr e;
        e.add(xhat, 1.0).add(v, -c);
        out.rows.push_back(e.row(Sense::Equal, 0.0, tag));
        return out;
    }
    const double xl = x.lb(), xu = x.ub(), yl = y.lb(), yu = y.ub();
    out.rows.push_back(row2(xhat, x, y, yl, xl, -xl * yl, Sense::GreaterEq, tag));
    out.rows.push_back(row2(xhat, x, y, yu, xu, -xu * yu, Sense::GreaterEq, tag));
    out.rows.push_back(row2(xhat, x, y, yu, xl, -xl * yu, Sense::LessEq, tag));
    out.rows.push_back(row2(xhat, x, y, yl, xu, -xu * yl, Sense::LessEq, tag));
    return out;
}

EnvelopeResult mccormick_q(VarRef xhat, Entry x, VarRef one, const std::string& tag) {
    check_bounded(x, "x");
    EnvelopeResult out;
    if (!x.is_var) {
        LinExpr e;
        e.add(xhat, 1.0);
        out.rows.push_back(e.row(Sense::Equal, x.value * x.value, tag));
        return out;
    }
    const double xl = x.lb(), xu = x.ub();
    // Secant: xhat <= (xl+xu)x - xl*xu.
    LinExpr sec;
    sec.add(xhat, 1.0).add(x, -(xl + xu));
    out.rows.push_back(sec.row(Sense::LessEq, -xl * xu, tag));
    SocAtom atom;
    atom.x = {x.var.id};
    atom.y = xhat.id;
    atom.z = one.id;
    atom.tag = tag;
    out.atoms.push_back(std::move(atom));
    return out;
}

EnvelopeResult cos_envelope(VarRef cs, VarRef theta, Entry x_on, double theta_u,
                            double theta_m, VarRef one, VarAlloc alloc,
                            const std::string& tag) {
    if (!(theta_u > 0.0) || theta_u > kHalfPi)
        throw std::invalid_argument("cos_envelope: need 0 < theta_u <= pi/2");
    if (theta_m < theta_u)
        throw std::invalid_argument("cos_envelope: need theta_m >= theta_u");
    EnvelopeResult out;
    const double k = (1.0 - std::cos(theta_u)) / (theta_u * theta_u);
    const double cu = std::cos(theta_u);

    if (!x_on.is_var && x_on.value == 0.0) {
        LinExpr z;
        z.add(cs, 1.0);
        out.rows.push_back(z.row(Sense::Equal, 0.0, tag));
        return out;
    }

    VarRef theta_sq = alloc(tag.empty() ? "theta_sq" : tag + ".theta_sq", 0.0,
                            theta_m * theta_m);
    out.append(mccormick_q(theta_sq, Entry::of(theta), one, tag));

    // cs <= x_on - k*(theta_sq + (x_on - 1)*theta_m^2)
    LinExpr quad;
    quad.add(cs, 1.0).add(theta_sq, k).add(x_on, k * theta_m * theta_m - 1.0);
    out.rows.push_back(quad.row(Sense::LessEq, k * theta_m * theta_m, tag));
    // x_on*cos(theta_u) <= cs <= x_on
    LinExpr lo, hi;
    lo.add(cs, 1.0).add(x_on, -cu);
    out.rows.push_back(lo.row(Sense::GreaterEq, 0.0, tag));
    hi.add(cs, 1.0).add(x_on, -1.0);
    out.rows.push_back(hi.row(Sense::LessEq, 0.0, tag));
    return out;
}

EnvelopeResult sin_envelope(VarRef sn, VarRef theta, Entry x_on, double theta_u,
                            double theta_m, const std::string& tag) {
    if (!(theta_u > 0.0) || theta_u > kHalfPi)
        throw std::invalid_argument("sin_envelope: need 0 < theta_u <= pi/2");
    if (theta_m < theta_u)
        throw std::invalid_argument("sin_envelope: need theta_m >= theta_u");
    EnvelopeResult out;
    if (!x_on.is_var && x_on.value == 0.0) {
        LinExpr z;
        z.add(sn, 1.0);
        out.rows.push_back(z.row(Sense::Equal, 0.0, tag));
        return out;
    }
    const double a = std::cos(theta_u / 2.0);
    const double b = std::sin(theta_u / 2.0) - (theta_u / 2.0) * std::cos(theta_u / 2.0);
    const double off = a * theta_m + 1.0;  // slack when the line is open
    const double su = std::sin(theta_u);

    // sn <= a*theta + b*x_on + off*(1 - x_on)
    LinExpr up;
    up.add(sn, 1.0).add(theta, -a).add(x_on, off - b);
    out.rows.push_back(up.row(Sense::LessEq, off, tag));
    // sn >= a*theta - b*x_on - off*(1 - x_on)
    LinExpr dn;
    dn.add(sn, 1.0).add(theta, -a).add(x_on, b - off);
    out.rows.push_back(dn.row(Sense::GreaterEq, -off, tag));
    // -sin(theta_u)*x_on <= sn <= sin(theta_u)*x_on
    LinExpr lo, hi;
    lo.add(sn, 1.0).add(x_on, su);
    out.rows.push_back(lo.row(Sense::GreaterEq, 0.0, tag));
    hi.add(sn, 1.0).add(x_on, -su);
    out.rows.push_back(hi.row(Sense::LessEq, 0.0, tag));
    return out;
}

std::pair<double, double> product_chain_bounds(std::span<const Entry> vars) {
    double lo = vars[0].lb(), hi = vars[0].ub();
    for (size_t i = 1; i < vars.size(); ++i) {
        const double l2 = vars[i].lb(), u2 = vars[i].ub();
        const double nl = interval_prod_lo(lo, hi, l2, u2);
        const double nh = interval_prod_hi(lo, hi, l2, u2);
        lo = nl;
        hi = nh;
    }
    return {lo, hi};
}

EnvelopeResult relax_product_chain(std::span<const Entry> vars, VarRef target,
                                   VarAlloc alloc, const std::string& tag) {
    if (vars.size() < 2)
        throw std::invalid_argument("relax_product_chain: need at least two operands");
    for (const Entry& e : vars) check_bounded(e, "chain");
    EnvelopeResult out;
    Entry acc = vars[0];
    for (size_t i = 1; i < vars.size(); ++i) {
        const bool last = (i + 1 == vars.size());
        if (!acc.is_var && !vars[i].is_var) {
            acc = Entry::constant(acc.value * vars[i].value);
            if (last) {
                LinExpr e;
                e.add(target, 1.0);
                out.rows.push_back(e.row(Sense::Equal, acc.value, tag));
            }
            continue;
        }
        VarRef stage;
        if (last) {
            stage = target;
        } else {
            auto [lo, hi] = product_chain_bounds(vars.subspan(0, i + 1));
            if (!std::isfinite(lo) || !std::isfinite(hi))
                throw std::invalid_argument("relax_product_chain: unbounded intermediate");
            stage = alloc(tag + ".chain" + std::to_string(i), lo, hi);
        }
        out.append(mccormick(stage, acc, vars[i], tag));
        acc = Entry::of(stage);
    }
    return out;
}

}  // namespace resgrid
