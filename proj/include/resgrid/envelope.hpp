#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "resgrid/linear.hpp"

namespace resgrid {

/// Rows and cone atoms emitted by an envelope factory. Purely symbolic;
/// the same kernel feeds the QC scenario blocks and any other relaxation.
struct EnvelopeResult {
    std::vector<LinearConstraint> rows;
    std::vector<SocAtom> atoms;

    void append(EnvelopeResult other) {
        for (auto& r : other.rows) rows.push_back(std::move(r));
        for (auto& a : other.atoms) atoms.push_back(std::move(a));
    }
};

/// Allocator for fresh intermediate variables (chained products, theta^2).
using VarAlloc = std::function<VarRef(const std::string& name, double lb, double ub)>;

/// McCormick envelope of xhat = x*y over the operand boxes. Constant
/// operands fold to a single exact equality row. Exact when one operand is
/// binary and integral.
EnvelopeResult mccormick(VarRef xhat, Entry x, Entry y, const std::string& tag = {});

/// xhat >= x^2 as a rotated-SOC atom (y=xhat, z=one) plus the secant upper
/// cut xhat <= (lb+ub)x - lb*ub.
EnvelopeResult mccormick_q(VarRef xhat, Entry x, VarRef one, const std::string& tag = {});

/// On/off quadratic upper envelope of cs = x_on*cos(theta) over
/// [-theta_u, theta_u], zero-forcing when x_on = 0. Allocates theta_sq.
EnvelopeResult cos_envelope(VarRef cs, VarRef theta, Entry x_on, double theta_u,
                            double theta_m, VarRef one, VarAlloc alloc,
                            const std::string& tag = {});

/// On/off tangent pair plus box for sn = x_on*sin(theta).
EnvelopeResult sin_envelope(VarRef sn, VarRef theta, Entry x_on, double theta_u,
                            double theta_m, const std::string& tag = {});

/// Sequential bilinear relaxation of the product of `vars`, written into
/// `target`. Intermediates get interval-arithmetic bounds. Two operands
/// degenerate to a single McCormick.
EnvelopeResult relax_product_chain(std::span<const Entry> vars, VarRef target,
                                   VarAlloc alloc, const std::string& tag = {});

/// Interval bounds of the product chain (what relax_product_chain assigns
/// to its final intermediate).
std::pair<double, double> product_chain_bounds(std::span<const Entry> vars);

}  // namespace resgrid
