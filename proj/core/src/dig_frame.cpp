#include "pilecast/dig_frame.hpp"

#include <algorithm>
#include <cmath>

#include "pilecast/rng.hpp"

namespace pilecast {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void DigPose::validate() const {
    const double n = std::hypot(tx, ty);
    if (std::abs(n - 1.0) > 1e-12)
        throw std::invalid_argument("dig pose heading must be a unit vector");
}

DigPose make_pose(double x, double y, double heading_rad) {
    DigPose p;
    p.x = x;
    p.y = y;
    p.tx = std::cos(heading_rad);
    p.ty = std::sin(heading_rad);
    return p;
}

LocalHeightmap make_local(int I, int J, double cell_size, double displacement) {
    if (I < 1 || J < 2 || J % 2 != 0)
        throw std::invalid_argument("local heightmap needs I >= 1 and even J >= 2");
    LocalHeightmap h;
    h.I = I;
    h.J = J;
    h.cell_size = cell_size;
    h.displacement = displacement;
    h.heights.assign(static_cast<std::size_t>(I + 1) * (J + 1), 0.0);
    return h;
}

LocalHeightmap mirror_lateral(const LocalHeightmap& h) {
    LocalHeightmap m = h;
    for (int i = 0; i <= h.I; ++i)
        for (int j = -h.J / 2; j <= h.J / 2; ++j) m.at(i, j) = h.at(i, -j);
    return m;
}

LocalHeightmap cutout(const GlobalHeightmap& H, const DigPose& pose, int I, int J,
                      double displacement) {
    pose.validate();
    LocalHeightmap h = make_local(I, J, H.cell_size, displacement);
    const double ex_x = pose.tx, ex_y = pose.ty;
    const double ey_x = -pose.ty, ey_y = pose.tx;
    const double ax = pose.x - displacement * ex_x;
    const double ay = pose.y - displacement * ex_y;
    const double anchor = H.sample(ax, ay);
    const double dl = H.cell_size;
    for (int i = 0; i <= I; ++i) {
        for (int j = -J / 2; j <= J / 2; ++j) {
            const double wx = ax + i * dl * ex_x + j * dl * ey_x;
            const double wy = ay + i * dl * ex_y + j * dl * ey_y;
            h.at(i, j) = H.sample(wx, wy) - anchor;
        }
    }
    return h;
}

GlobalHeightmap replace(const GlobalHeightmap& H, const DigPose& pose,
                        const LocalHeightmap& h) {
    pose.validate();
    const double ex_x = pose.tx, ex_y = pose.ty;
    const double ey_x = -pose.ty, ey_y = pose.tx;
    const double ax = pose.x - h.displacement * ex_x;
    const double ay = pose.y - h.displacement * ex_y;
    const double anchor = H.sample(ax, ay);
    const double dl = H.cell_size;

    std::vector<double> num(H.heights.size(), 0.0);
    std::vector<double> den(H.heights.size(), 0.0);
    for (int i = 0; i <= h.I; ++i) {
        for (int j = -h.J / 2; j <= h.J / 2; ++j) {
            const double wx = ax + i * dl * ex_x + j * dl * ey_x;
            const double wy = ay + i * dl * ex_y + j * dl * ey_y;
            if (!H.contains(wx, wy))
                throw std::out_of_range("replace: footprint outside grid bounds");
            const double gx = (wx - H.origin_x) / dl;
            const double gy = (wy - H.origin_y) / dl;
            int ix = static_cast<int>(gx);
            int iy = static_cast<int>(gy);
            if (ix >= H.nx - 1) ix = H.nx - 2;
            if (iy >= H.ny - 1) iy = H.ny - 2;
            const double u = gx - ix;
            const double v = gy - iy;
            const double value = h.at(i, j) + anchor;
            const double w00 = (1.0 - u) * (1.0 - v);
            const double w10 = u * (1.0 - v);
            const double w01 = (1.0 - u) * v;
            const double w11 = u * v;
            const std::size_t k = static_cast<std::size_t>(iy) * H.nx + ix;
            num[k] += w00 * value;
            den[k] += w00;
            num[k + 1] += w10 * value;
            den[k + 1] += w10;
            num[k + H.nx] += w01 * value;
            den[k + H.nx] += w01;
            num[k + H.nx + 1] += w11 * value;
            den[k + H.nx + 1] += w11;
        }
    }

    GlobalHeightmap out = H;
    for (std::size_t k = 0; k < out.heights.size(); ++k)
        if (den[k] > 1e-12) out.heights[k] = num[k] / den[k];
    return out;
}

bool is_valid_dig_pose(const GlobalHeightmap& H, const DigPose& pose, double epsilon,
                       double depth, double width) {
    pose.validate();
    const double dl = H.cell_size;
    const int K = std::max(0, static_cast<int>(std::llround(depth / dl)));
    const int M = std::max(1, static_cast<int>(std::llround(width / dl)));
    double vol = 0.0;
    for (int k = 0; k < K; ++k) {
        const double s = (k + 0.5) * dl;  // distance behind x along -e_x
        for (int m = 0; m < M; ++m) {
            const double q = (m + 0.5 - 0.5 * M) * dl;
            const double wx = pose.x - s * pose.tx - q * pose.ty;
            const double wy = pose.y - s * pose.ty + q * pose.tx;
            vol += std::max(0.0, H.sample(wx, wy)) * dl * dl;
        }
    }
    return vol < epsilon;
}

namespace {

// Horizontal component of the mean surface normal in a small window around a
// grid cell. Points outward (downhill) on a pile face.
void mean_normal_xy(const GlobalHeightmap& H, int cx, int cy, double& nx_out,
                    double& ny_out) {
    const int w = std::max(2, static_cast<int>(std::llround(0.75 / H.cell_size)));
    double sx = 0.0, sy = 0.0;
    for (int iy = std::max(1, cy - w); iy <= std::min(H.ny - 2, cy + w); ++iy)
        for (int ix = std::max(1, cx - w); ix <= std::min(H.nx - 2, cx + w); ++ix) {
            const double gx = (H.at(ix + 1, iy) - H.at(ix - 1, iy)) / (2.0 * H.cell_size);
            const double gy = (H.at(ix, iy + 1) - H.at(ix, iy - 1)) / (2.0 * H.cell_size);
            const double inv = 1.0 / std::sqrt(gx * gx + gy * gy + 1.0);
            sx += -gx * inv;
            sy += -gy * inv;
        }
    nx_out = sx;
    ny_out = sy;
}

}  // namespace

std::vector<std::pair<int, int>> edge_cells(const GlobalHeightmap& H,
                                            const PoseSelectParams& params) {
    // Cells too close to the grid border are skipped so the validity strip
    // stays in bounds.
    const int margin = static_cast<int>(std::ceil(
        (std::max(params.valid_depth, 0.5 * params.valid_width) + 0.2) / H.cell_size));
    std::vector<std::pair<int, int>> candidates;
    for (int iy = margin; iy < H.ny - margin; ++iy)
        for (int ix = margin; ix < H.nx - margin; ++ix) {
            const double hc = H.at(ix, iy);
            if (hc <= params.edge_low || hc >= params.edge_high) continue;
            const bool at_edge = H.at(ix - 1, iy) < params.edge_low ||
                                 H.at(ix + 1, iy) < params.edge_low ||
                                 H.at(ix, iy - 1) < params.edge_low ||
                                 H.at(ix, iy + 1) < params.edge_low;
            if (at_edge) candidates.emplace_back(ix, iy);
        }
    return candidates;
}

bool inward_heading(const GlobalHeightmap& H, int ix, int iy, double& heading_rad) {
    double nx, ny;
    mean_normal_xy(H, ix, iy, nx, ny);
    const double n = std::hypot(nx, ny);
    if (n < 1e-9) return false;  // locally flat
    heading_rad = std::atan2(-ny / n, -nx / n);
    return true;
}

DigPose select_dig_pose(const GlobalHeightmap& H, std::uint64_t rng_seed,
                        const PoseSelectParams& params) {
    std::vector<std::pair<int, int>> candidates = edge_cells(H, params);
    if (candidates.empty()) throw PileExhausted{};

    Rng rng(rng_seed);
    rng.shuffle(candidates);
    const int jitter_tries = 4;
    for (const auto& [cx, cy] : candidates) {
        double inward;
        if (!inward_heading(H, cx, cy, inward)) continue;
        for (int t = 0; t < jitter_tries; ++t) {
            const double jitter =
                rng.uniform(-params.heading_jitter_deg, params.heading_jitter_deg) * kPi / 180.0;
            const DigPose pose = make_pose(H.world_x(cx), H.world_y(cy), inward + jitter);
            if (is_valid_dig_pose(H, pose, params.epsilon, params.valid_depth,
                                  params.valid_width))
                return pose;
        }
    }
    throw PileExhausted{};
}

}  // namespace pilecast
