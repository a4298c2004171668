#pragma once

#include <array>
#include <vector>

#include "pilecast/avalanche.hpp"
#include "pilecast/dig_frame.hpp"
#include "pilecast/heightmap.hpp"

namespace pilecast {

// Bucket-fill controller parameters: force thresholds and velocity gains for
// the boom and bucket cylinders.
struct Action {
    double delta_bm = 0.0;
    double k_bm = 0.0;
    double delta_bk = 0.0;
    double k_bk = 0.0;

    std::array<double, 4> as_array() const { return {delta_bm, k_bm, delta_bk, k_bk}; }
    static Action from_array(const std::array<double, 4>& a) {
        return {a[0], a[1], a[2], a[3]};
    }
};

struct Performance {
    double mass_t = 0.0;   // tonne
    double time_s = 0.0;   // s
    double work_kj = 0.0;  // kJ

    std::array<double, 3> as_array() const { return {mass_t, time_s, work_kj}; }
};

struct MachineParams {
    double bucket_width = 2.6;          // m
    double bucket_capacity = 3.0;       // m^3
    double v_bm_max = 0.25;             // m/s boom cylinder
    double v_bk_max = 0.35;             // m/s bucket cylinder
    double f_b0 = 150e3;                // N, normalizing boom force
    double drive_speed_target = 8.0 / 3.6;  // m/s (8 km/h)
    double max_penetration = 3.2;       // m
    double max_fill_time = 15.0;        // s
    double approach_distance = 5.0;     // m
    double timestep = 0.01;             // s

    void validate() const;
};

// Admittance ramp: v = clip(k*(f/f0 - delta), 0, 1) * v_max for each cylinder,
// both regulated by the measured boom force.
struct ControllerOutput {
    double v_bm = 0.0;
    double v_bk = 0.0;
};
ControllerOutput controller_step(double f_bm, const Action& a, const MachineParams& m);

struct LoadingPhases {
    double approach = 0.0;
    double fill = 0.0;
    double tilt_out = 0.0;
    double settle = 0.0;
    double retreat = 0.0;
};

struct TraceSample {
    double t = 0.0;
    double s = 0.0;      // horizontal tip advance past the dig location, m
    double z = 0.0;      // tip height (boom lift + lip curl), m
    double phi = 0.0;    // tilt angle, rad
    double depth = 0.0;  // lip depth below the initial surface, m
    double f_bm = 0.0;   // N
    double v_bm = 0.0;
    double v_bk = 0.0;
    double v_drive = 0.0;
};

struct LoadingOutcome {
    Performance perf;
    GlobalHeightmap pile;
    LoadingPhases phases;
    bool hit_time_cap = false;
    bool hit_penetration_cap = false;
    bool hit_tilt_end = false;
    bool broke_out = false;
    double shortfall = 0.0;  // m^3 the strip could not supply
};

// Fixed-step kinematic simulation of one bucket filling: approach, fill under
// the admittance controller (terminated by tilt end, max penetration,
// breakout through the initial surface, or the fill time cap), tilt-out,
// settle, and retreat. The resulting pile is the input minus the swept
// material, relaxed to the angle of repose.
//
// The boom force proxy grows with the engaged cross-section ahead of the
// bucket lip; it reproduces the qualitative force growth the controller
// needs, with no claim of DEM fidelity.
LoadingOutcome simulate_loading(const GlobalHeightmap& H, const DigPose& pose,
                                const Action& a, const MachineParams& m,
                                const SoilParams& soil,
                                std::vector<TraceSample>* trace = nullptr);

}  // namespace pilecast
