#include "pilecast/avalanche.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pilecast {

void SoilParams::validate() const {
    if (density <= 0.0) throw std::invalid_argument("soil: density must be > 0");
    if (!(repose_deg > 0.0 && repose_deg <= 45.0))
        throw std::invalid_argument("soil: repose_deg must be in (0, 45]");
    if (!(flow_step_fraction > 0.0 && flow_step_fraction <= 0.5))
        throw std::invalid_argument("soil: flow_step_fraction must be in (0, 0.5]");
}

double SoilParams::repose_tan() const {
    return std::tan(repose_deg * 3.14159265358979323846 / 180.0);
}

RelaxResult relax(const GlobalHeightmap& H, const SoilParams& soil, int max_sweeps) {
    soil.validate();
    if (max_sweeps < 1) throw std::invalid_argument("relax: max_sweeps must be >= 1");
    const double limit = H.cell_size * soil.repose_tan();
    const double z_plus = soil.flow_step_fraction * H.cell_size;
    const double tol = 1e-6;
    const int nx = H.nx, ny = H.ny;

    RelaxResult res;
    res.pile = H;

    // Active bounding box: flows only ever start at a violating cell, so the
    // box grows by at most one cell per sweep.
    int x0 = nx, x1 = -1, y0 = ny, y1 = -1;
    double worst = 0.0;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double hc = res.pile.at(ix, iy);
            double v = 0.0;
            if (ix > 0) v = std::max(v, hc - res.pile.at(ix - 1, iy) - limit);
            if (ix < nx - 1) v = std::max(v, hc - res.pile.at(ix + 1, iy) - limit);
            if (iy > 0) v = std::max(v, hc - res.pile.at(ix, iy - 1) - limit);
            if (iy < ny - 1) v = std::max(v, hc - res.pile.at(ix, iy + 1) - limit);
            if (v > tol) {
                worst = std::max(worst, v);
                x0 = std::min(x0, ix);
                x1 = std::max(x1, ix);
                y0 = std::min(y0, iy);
                y1 = std::max(y1, iy);
            }
        }
    if (x1 < 0) {
        res.max_violation = worst;
        return res;  // already a fixed point
    }

    std::vector<double> next = res.pile.heights;
    const int dx[4] = {-1, 1, 0, 0};
    const int dy[4] = {0, 0, -1, 1};
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        // Violations can spread two cells past the previous sweep's bbox (a
        // neighbor of a changed cell), so scan with that margin.
        const int gx0 = std::max(0, x0 - 2), gx1 = std::min(nx - 1, x1 + 2);
        const int gy0 = std::max(0, y0 - 2), gy1 = std::min(ny - 1, y1 + 2);
        worst = 0.0;
        int vx0 = nx, vx1 = -1, vy0 = ny, vy1 = -1;
        for (int iy = gy0; iy <= gy1; ++iy) {
            for (int ix = gx0; ix <= gx1; ++ix) {
                const double hc = res.pile.at(ix, iy);
                double flows[4];
                int nviol = 0;
                double vmax = 0.0;
                for (int d = 0; d < 4; ++d) {
                    const int jx = ix + dx[d], jy = iy + dy[d];
                    flows[d] = 0.0;
                    if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
                    const double excess = hc - res.pile.at(jx, jy) - limit;
                    if (excess > tol) {
                        flows[d] = std::min(z_plus, 0.5 * excess);
                        ++nviol;
                        vmax = std::max(vmax, excess);
                    }
                }
                if (nviol == 0) continue;
                worst = std::max(worst, vmax);
                vx0 = std::min(vx0, ix);
                vx1 = std::max(vx1, ix);
                vy0 = std::min(vy0, iy);
                vy1 = std::max(vy1, iy);
                const std::size_t kc = static_cast<std::size_t>(iy) * nx + ix;
                for (int d = 0; d < 4; ++d) {
                    if (flows[d] <= 0.0) continue;
                    const double q = flows[d] / nviol;
                    next[kc] -= q;
                    next[static_cast<std::size_t>(iy + dy[d]) * nx + (ix + dx[d])] += q;
                }
            }
        }
        res.sweeps = sweep + 1;
        // Commit the scan window plus the one-cell flow margin; outside it
        // next == pile already.
        const int cx0 = std::max(0, gx0 - 1), cx1 = std::min(nx - 1, gx1 + 1);
        const int cy0 = std::max(0, gy0 - 1), cy1 = std::min(ny - 1, gy1 + 1);
        for (int iy = cy0; iy <= cy1; ++iy)
            for (int ix = cx0; ix <= cx1; ++ix)
                res.pile.at(ix, iy) = next[static_cast<std::size_t>(iy) * nx + ix];
        if (vx1 < 0) {
            res.max_violation = 0.0;
            return res;
        }
        x0 = vx0;
        x1 = vx1;
        y0 = vy0;
        y1 = vy1;
    }

    // Sweeps exhausted; recompute the residual violation for the report.
    double residual = 0.0;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double hc = res.pile.at(ix, iy);
            if (ix < nx - 1) residual = std::max(residual, std::abs(hc - res.pile.at(ix + 1, iy)) - limit);
            if (iy < ny - 1) residual = std::max(residual, std::abs(hc - res.pile.at(ix, iy + 1)) - limit);
        }
    res.max_violation = std::max(0.0, residual);
    res.converged = res.max_violation <= tol;
    return res;
}

ExcavateResult excavate_strip(const GlobalHeightmap& H, const DigPose& pose, double mass,
                              const SoilParams& soil, double strip_width,
                              double strip_length) {
    soil.validate();
    pose.validate();
    if (mass < 0.0) throw std::invalid_argument("excavate_strip: mass must be >= 0");

    ExcavateResult res;
    res.pile = H;
    if (mass == 0.0) return res;

    const double cell_area = H.cell_size * H.cell_size;
    double volume_left = mass / soil.density;

    // Strip cells sorted front-to-back along the heading (lateral offset and
    // index break ties so the order is deterministic).
    struct StripCell {
        double s;
        double q;
        std::size_t k;
    };
    std::vector<StripCell> cells;
    for (int iy = 0; iy < H.ny; ++iy)
        for (int ix = 0; ix < H.nx; ++ix) {
            const double rx = H.world_x(ix) - pose.x;
            const double ry = H.world_y(iy) - pose.y;
            const double s = rx * pose.tx + ry * pose.ty;
            const double q = -rx * pose.ty + ry * pose.tx;
            if (s < 0.0 || s > strip_length) continue;
            if (std::abs(q) > 0.5 * strip_width) continue;
            cells.push_back({s, q, static_cast<std::size_t>(iy) * H.nx + ix});
        }
    std::sort(cells.begin(), cells.end(), [](const StripCell& a, const StripCell& b) {
        if (a.s != b.s) return a.s < b.s;
        if (a.q != b.q) return a.q < b.q;
        return a.k < b.k;
    });

    const double pass_depth = 0.05;  // m removed per pass, level bucket floor
    bool any_removed = true;
    while (volume_left > 1e-12 && any_removed) {
        any_removed = false;
        for (const StripCell& c : cells) {
            if (volume_left <= 1e-12) break;
            double& h = res.pile.heights[c.k];
            if (h <= 0.0) continue;
            const double d = std::min({pass_depth, h, volume_left / cell_area});
            if (d <= 0.0) continue;
            h -= d;
            volume_left -= d * cell_area;
            res.removed_volume += d * cell_area;
            any_removed = true;
        }
    }
    res.shortfall = std::max(0.0, volume_left);
    return res;
}

ReplaceCaResult replace_ca(const GlobalHeightmap& H, double mass_kg, const DigPose& pose,
                           const SoilParams& soil, double strip_width, double strip_length,
                           int max_sweeps) {
    ReplaceCaResult out;
    ExcavateResult ex = excavate_strip(H, pose, mass_kg, soil, strip_width, strip_length);
    out.shortfall = ex.shortfall;
    RelaxResult rr = relax(ex.pile, soil, max_sweeps);
    out.pile = std::move(rr.pile);
    out.sweeps = rr.sweeps;
    out.max_violation = rr.max_violation;
    out.converged = rr.converged;
    return out;
}

}  // namespace pilecast
