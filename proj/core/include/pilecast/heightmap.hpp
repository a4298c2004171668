#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pilecast {

// Regular-grid height field H(x,y) over the pile plus surrounding ground.
// Heights are in meters relative to the ground plane z = 0; grid node (ix,iy)
// sits at world (origin_x + ix*cell_size, origin_y + iy*cell_size).
//
// Values are treated as immutable: every operation returns a new map.
struct GlobalHeightmap {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell_size = 0.1;
    int nx = 0;
    int ny = 0;
    std::vector<double> heights;  // heights[iy*nx + ix]

    double at(int ix, int iy) const { return heights[static_cast<std::size_t>(iy) * nx + ix]; }
    double& at(int ix, int iy) { return heights[static_cast<std::size_t>(iy) * nx + ix]; }

    double world_x(int ix) const { return origin_x + ix * cell_size; }
    double world_y(int iy) const { return origin_y + iy * cell_size; }
    double max_x() const { return origin_x + (nx - 1) * cell_size; }
    double max_y() const { return origin_y + (ny - 1) * cell_size; }

    bool contains(double wx, double wy) const;

    // Bilinear interpolation between the four surrounding grid nodes.
    // Throws std::out_of_range outside the grid (no silent clamping).
    double sample(double wx, double wy) const;

    // Checks finiteness, positive cell size and minimum extents.
    void validate() const;
};

GlobalHeightmap make_flat_map(int nx, int ny, double cell_size, double origin_x,
                              double origin_y);

// Sum over cells of max(height, 0) * cell_size^2.
double pile_volume(const GlobalHeightmap& H);

// FNV-1a over the raw height bytes plus grid metadata; used for chain
// provenance in datasets and for byte-level determinism checks.
std::uint64_t heightmap_hash(const GlobalHeightmap& H);

// Text format PILECAST-HM 1 (see README). Round-trips bit-exactly.
// Trailing '#' comment lines after the height rows are ignored on load;
// save() appends "# seed <n>" when a seed is supplied.
void save_heightmap(const GlobalHeightmap& H, const std::string& path,
                    const std::uint64_t* seed = nullptr);
GlobalHeightmap load_heightmap(const std::string& path);

std::string heightmap_to_string(const GlobalHeightmap& H, const std::uint64_t* seed = nullptr);
GlobalHeightmap heightmap_from_string(const std::string& text);

}  // namespace pilecast
