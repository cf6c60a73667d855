#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace resgrid::testutil {

/// Small rotated-SOC program: minimize c.(x, y, z) over a box subject to
/// x'x <= y z, y, z >= 0. Used as an independent oracle for the
/// cutting-plane solver.
struct SocProgram {
    std::vector<double> cx, xlb, xub;  // |x| in {1, 2}
    double cy = 0, ylb = 0, yub = 1;
    double cz = 0, zlb = 0, zub = 1;
};

/// Multi-resolution grid search. For fixed (x, y) the best z is at a box
/// edge or the cone boundary, so the search is only over (x, y).
inline double soc_grid_oracle(const SocProgram& p, int grid = 48, int passes = 4) {
    const size_t k = p.cx.size();
    std::vector<double> lo = p.xlb, hi = p.xub;
    double ylo = p.ylb, yhi = p.yub;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> bx(k, 0.0);
    double by = 0.0;

    auto eval = [&](const std::vector<double>& xv, double yv) {
        double xx = 0.0, obj = 0.0;
        for (size_t i = 0; i < k; ++i) {
            xx += xv[i] * xv[i];
            obj += p.cx[i] * xv[i];
        }
        obj += p.cy * yv;
        // Feasible z choices: [max(zlb, xx/y), zub] (empty if cone violated).
        double zmin = p.zlb;
        if (xx > yv * p.zlb) {
            if (yv <= 0.0) return;  // x'x > 0 with y = 0 is infeasible
            zmin = xx / yv;
        }
        if (zmin > p.zub + 1e-15) return;
        const double zv = p.cz >= 0.0 ? zmin : p.zub;
        obj += p.cz * zv;
        if (obj < best) {
            best = obj;
            bx = xv;
            by = yv;
        }
    };

    for (int pass = 0; pass < passes; ++pass) {
        std::vector<double> xv(k, 0.0);
        const int gy = grid;
        for (int iy = 0; iy <= gy; ++iy) {
            const double yv = ylo + (yhi - ylo) * iy / gy;
            if (k == 1) {
                for (int i0 = 0; i0 <= grid; ++i0) {
                    xv[0] = lo[0] + (hi[0] - lo[0]) * i0 / grid;
                    eval(xv, yv);
                }
            } else {
                for (int i0 = 0; i0 <= grid; ++i0) {
                    xv[0] = lo[0] + (hi[0] - lo[0]) * i0 / grid;
                    for (int i1 = 0; i1 <= grid; ++i1) {
                        xv[1] = lo[1] + (hi[1] - lo[1]) * i1 / grid;
                        eval(xv, yv);
                    }
                }
            }
        }
        // Shrink the window around the incumbent for the next pass.
        if (!std::isfinite(best)) break;
        for (size_t i = 0; i < k; ++i) {
            const double h = (hi[i] - lo[i]) * 2.0 / grid;
            lo[i] = std::max(p.xlb[i], bx[i] - h);
            hi[i] = std::min(p.xub[i], bx[i] + h);
        }
        const double hy = (yhi - ylo) * 2.0 / grid;
        ylo = std::max(p.ylb, by - hy);
        yhi = std::min(p.yub, by + hy);
    }
    return best;
}

}  // namespace resgrid::testutil
