#include "pilecast/seed_pile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pilecast {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kWedgeAspect = 1.6;

double footprint_inner_distance(PileKind kind, double extent, double x, double y) {
    switch (kind) {
        case PileKind::Conical: {
            const double R = 0.5 * extent;
            return R - std::hypot(x, y);
        }
        case PileKind::Wedged: {
            const double a = 0.5 * extent;
            const double b = 0.5 * kWedgeAspect * extent;
            return std::min(a - std::abs(x), b - std::abs(y));
        }
        case PileKind::Triangular: {
            // Equilateral triangle with side `extent`, one vertex on +y;
            // outward edge normals at -90, 30 and 150 degrees.
            const double r_in = extent / (2.0 * std::sqrt(3.0));
            const double n2x = std::cos(kPi / 6.0), n2y = std::sin(kPi / 6.0);
            double d = r_in + y;
            d = std::min(d, r_in - (n2x * x + n2y * y));
            d = std::min(d, r_in - (-n2x * x + n2y * y));
            return d;
        }
    }
    return 0.0;
}

// Two-pass chamfer lower envelope: h'(c) = min_d h(d) + L*dist(c,d).
// Guarantees no 4-neighbor height step above L*cell afterwards, and never
// raises a cell.
void limit_slope(GlobalHeightmap& H, double max_tan) {
    const double dl = H.cell_size;
    const double c1 = max_tan * dl;
    const double c2 = max_tan * dl * std::sqrt(2.0);
    auto relaxp = [&](int ix, int iy, int jx, int jy, double c) {
        const double v = H.at(jx, jy) + c;
        if (v < H.at(ix, iy)) H.at(ix, iy) = v;
    };
    for (int iy = 0; iy < H.ny; ++iy)
        for (int ix = 0; ix < H.nx; ++ix) {
            if (ix > 0) relaxp(ix, iy, ix - 1, iy, c1);
            if (iy > 0) relaxp(ix, iy, ix, iy - 1, c1);
            if (ix > 0 && iy > 0) relaxp(ix, iy, ix - 1, iy - 1, c2);
            if (ix < H.nx - 1 && iy > 0) relaxp(ix, iy, ix + 1, iy - 1, c2);
        }
    for (int iy = H.ny - 1; iy >= 0; --iy)
        for (int ix = H.nx - 1; ix >= 0; --ix) {
            if (ix < H.nx - 1) relaxp(ix, iy, ix + 1, iy, c1);
            if (iy < H.ny - 1) relaxp(ix, iy, ix, iy + 1, c1);
            if (ix < H.nx - 1 && iy < H.ny - 1) relaxp(ix, iy, ix + 1, iy + 1, c2);
            if (ix > 0 && iy < H.ny - 1) relaxp(ix, iy, ix - 1, iy + 1, c2);
        }
}

}  // namespace

PileKind pile_kind_from_string(const std::string& s) {
    if (s == "triangular") return PileKind::Triangular;
    if (s == "conical") return PileKind::Conical;
    if (s == "wedged") return PileKind::Wedged;
    throw std::invalid_argument("unknown pile kind: " + s);
}

std::string to_string(PileKind k) {
    switch (k) {
        case PileKind::Triangular: return "triangular";
        case PileKind::Conical: return "conical";
        case PileKind::Wedged: return "wedged";
    }
    return "?";
}

GlobalHeightmap make_seed_pile(PileKind kind, double slope_deg, double extent,
                               double height_cap, const PerlinParams& noise,
                               double cell_size, double apron) {
    if (!(slope_deg > 0.0 && slope_deg <= 45.0))
        throw std::invalid_argument("make_seed_pile: slope_deg must be in (0, 45]");
    if (extent <= 0.0) throw std::invalid_argument("make_seed_pile: extent must be > 0");
    if (height_cap <= 0.0) throw std::invalid_argument("make_seed_pile: height_cap must be > 0");
    if (noise.amplitude < 0.0) throw std::invalid_argument("make_seed_pile: amplitude must be >= 0");
    if (noise.frequency <= 0.0) throw std::invalid_argument("make_seed_pile: frequency must be > 0");
    if (cell_size <= 0.0) throw std::invalid_argument("make_seed_pile: cell_size must be > 0");

    const double width_x = (kind == PileKind::Wedged ? extent : extent) + 2.0 * apron;
    const double width_y =
        (kind == PileKind::Wedged ? kWedgeAspect * extent : extent) + 2.0 * apron;
    int nx = static_cast<int>(std::ceil(width_x / cell_size)) + 1;
    int ny = static_cast<int>(std::ceil(width_y / cell_size)) + 1;
    if (nx % 2 == 0) ++nx;  // keep a grid node at the pile center
    if (ny % 2 == 0) ++ny;

    GlobalHeightmap H = make_flat_map(nx, ny, cell_size,
                                      -0.5 * (nx - 1) * cell_size,
                                      -0.5 * (ny - 1) * cell_size);
    const double tan_slope = std::tan(slope_deg * kPi / 180.0);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double d = footprint_inner_distance(kind, extent, H.world_x(ix), H.world_y(iy));
            if (d > 0.0) H.at(ix, iy) = std::min(height_cap, tan_slope * d);
        }

    if (noise.amplitude > 0.0) {
        const PerlinNoise pn(noise.seed);
        // Taper keeps the surrounding ground untouched and avoids cliffs at
        // the pile edge.
        const double taper = std::max(2.0 * noise.amplitude, 0.3);
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                const double base = H.at(ix, iy);
                if (base <= 0.0) continue;
                const double t = std::min(1.0, base / taper);
                const double n = pn.fractal(H.world_x(ix) * noise.frequency,
                                            H.world_y(iy) * noise.frequency, noise.octaves);
                H.at(ix, iy) = std::max(0.0, base + t * noise.amplitude * n);
            }
        limit_slope(H, std::tan((slope_deg + 5.0) * kPi / 180.0));
    }

    H.validate();
    return H;
}

}  // namespace pilecast
