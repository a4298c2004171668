#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pilecast/heightmap.hpp"

namespace pilecast {

// Dig location x plus unit heading t. The heading defines the local frame
// {e_x, e_y, e_z} with e_x aligned to the dig direction.
struct DigPose {
    double x = 0.0;
    double y = 0.0;
    double tx = 1.0;
    double ty = 0.0;

    // Throws unless |t| == 1 within 1e-12.
    void validate() const;
};

DigPose make_pose(double x, double y, double heading_rad);

// Rotated/cropped height grid in the dig frame. I x J grid cells means
// (I+1) x (J+1) node samples; sample (i, j) with i in [0, I] and
// j in [-J/2, J/2] sits at world x + (i*dl - displacement)*e_x + j*dl*e_y,
// and the value at the frame origin (i=0 row anchor) is subtracted out.
struct LocalHeightmap {
    int I = 0;
    int J = 0;                  // must be even
    double cell_size = 0.1;
    double displacement = 0.0;  // delta
    std::vector<double> heights;  // heights[i*(J+1) + (j + J/2)]

    double at(int i, int j) const {
        return heights[static_cast<std::size_t>(i) * (J + 1) + (j + J / 2)];
    }
    double& at(int i, int j) {
        return heights[static_cast<std::size_t>(i) * (J + 1) + (j + J / 2)];
    }
    int rows() const { return I + 1; }
    int cols() const { return J + 1; }
    double extent_x() const { return I * cell_size; }
    double extent_y() const { return J * cell_size; }
};

LocalHeightmap make_local(int I, int J, double cell_size, double displacement);

// Mirror about the heading axis (j -> -j).
LocalHeightmap mirror_lateral(const LocalHeightmap& h);

// h_ij = H(x - d*e_x + i*dl*e_x + j*dl*e_y) - H(x - d*e_x), bilinear off-grid.
// Throws std::out_of_range if any sample point leaves H.
LocalHeightmap cutout(const GlobalHeightmap& H, const DigPose& pose, int I, int J,
                      double displacement);

// Writes h back over the footprint by inverse bilinear scattering (adjoint of
// the cutout sampling, weight-normalized per cell); cells outside the
// footprint are unchanged. Exact inverse of cutout for grid-aligned poses.
GlobalHeightmap replace(const GlobalHeightmap& H, const DigPose& pose,
                        const LocalHeightmap& h);

// True iff the ground strip of the given width and depth in front of the dig
// location covers a volume strictly below epsilon.
bool is_valid_dig_pose(const GlobalHeightmap& H, const DigPose& pose, double epsilon,
                       double depth, double width);

struct PileExhausted : std::runtime_error {
    PileExhausted() : std::runtime_error("pile exhausted: no valid dig pose") {}
};

struct PoseSelectParams {
    double heading_jitter_deg = 10.0;
    double epsilon = 0.3;      // m^3, exterior-volume validity bound
    double valid_depth = 1.0;  // m, strip depth for the validity check
    double valid_width = 3.6;  // m, strip width for the validity check
    double edge_low = 0.05;    // m, edge band lower height threshold
    double edge_high = 0.3;    // m, edge band upper height threshold
};

// Samples a pile-edge cell uniformly at random, heads inward along the local
// mean normal plus jitter, and returns the first candidate that satisfies
// is_valid_dig_pose. Throws PileExhausted when no candidate works.
DigPose select_dig_pose(const GlobalHeightmap& H, std::uint64_t rng_seed,
                        const PoseSelectParams& params = {});

// Edge band cells: height inside (edge_low, edge_high) with a sub-threshold
// 4-neighbor, excluding a border margin wide enough for the validity strip.
std::vector<std::pair<int, int>> edge_cells(const GlobalHeightmap& H,
                                            const PoseSelectParams& params);

// Heading pointing into the pile at a cell (horizontal projection of the
// local mean normal, flipped). False when the neighborhood is flat.
bool inward_heading(const GlobalHeightmap& H, int ix, int iy, double& heading_rad);

}  // namespace pilecast
