#pragma once

#include "pilecast/dig_frame.hpp"
#include "pilecast/heightmap.hpp"

namespace pilecast {

struct SoilParams {
    double density = 1727.0;        // kg/m^3
    double repose_deg = 32.0;       // angle of repose
    double flow_step_fraction = 0.2;  // z+ = fraction * cell_size per sweep

    void validate() const;
    double repose_tan() const;
};

struct RelaxResult {
    GlobalHeightmap pile;
    int sweeps = 0;
    double max_violation = 0.0;  // residual, m above the repose step limit
    bool converged = true;
};

// Mass-preserving cellular-automata relaxation. Synchronous sweeps; a cell
// exceeding a 4-neighbor by more than cell*tan(repose) sends
// min(z+, (excess - limit)/2) / n_violating to each violating neighbor.
// Stops when the largest violation is at most 1e-6 m or after max_sweeps.
RelaxResult relax(const GlobalHeightmap& H, const SoilParams& soil, int max_sweeps);

struct ExcavateResult {
    GlobalHeightmap pile;
    double removed_volume = 0.0;  // m^3
    double shortfall = 0.0;       // m^3 requested but not present in the strip
};

// Removes volume mass/density from the oriented strip starting at the pose
// and stretching along its heading, front-to-back in uniform-depth passes,
// never driving a cell below zero.
ExcavateResult excavate_strip(const GlobalHeightmap& H, const DigPose& pose, double mass,
                              const SoilParams& soil, double strip_width,
                              double strip_length);

struct ReplaceCaResult {
    GlobalHeightmap pile;
    double shortfall = 0.0;
    int sweeps = 0;
    double max_violation = 0.0;
    bool converged = true;
};

// The two-stage pile update: remove the loaded mass from the strip, then
// relax everything back under the angle of repose.
ReplaceCaResult replace_ca(const GlobalHeightmap& H, double mass_kg, const DigPose& pose,
                           const SoilParams& soil, double strip_width, double strip_length,
                           int max_sweeps = 20000);

}  // namespace pilecast
