#include "pilecast/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pilecast {

namespace {

constexpr double kGravity = 9.80665;

// Invented machine/interaction constants. The paper relies on a multibody
// simulator here; these shape a kinematic stand-in.
constexpr double kBoomLiftGain = 2.0;        // m of lift per m of boom cylinder
constexpr double kTiltGain = 1.4;            // rad per m of bucket cylinder
constexpr double kTiltEnd = 1.1;             // rad, tilt end position
constexpr double kLipRadius = 1.2;           // m, lip rise = r*(1-cos(phi))
constexpr double kForceCoefficient = 3.0;    // boom force per rho*g*w*depth^2
constexpr double kLoadForceShare = 0.25;     // boom force share of carried load
constexpr double kBucketForceShare = 0.6;    // f_bk as a fraction of f_bm
constexpr double kDriveForceShare = 0.8;     // drive resistance vs f_bm
constexpr double kStallForceRatio = 1.5;     // f/f0 at which the drive stalls
constexpr double kMinDriveFraction = 0.02;
constexpr double kFillEfficiency = 0.45;     // share of the sheared column kept
constexpr double kMaxCutDepth = 1.2;         // m, soil above flows past the bucket
constexpr double kBreakoutMinPenetration = 0.5;  // m
constexpr double kSettleTime = 0.5;              // s
constexpr double kCarryLiftHeight = 1.0;         // m raised during retreat
constexpr double kOverfillFactor = 1.1;

double lip_rise(double phi) { return kLipRadius * (1.0 - std::cos(phi)); }

}  // namespace

void MachineParams::validate() const {
    const double vals[] = {bucket_width, bucket_capacity, v_bm_max, v_bk_max, f_b0,
                           drive_speed_target, max_penetration, max_fill_time,
                           approach_distance, timestep};
    for (double v : vals)
        if (!(v > 0.0)) throw std::invalid_argument("machine params must all be positive");
}

ControllerOutput controller_step(double f_bm, const Action& a, const MachineParams& m) {
    if (f_bm < 0.0) throw std::invalid_argument("controller_step: f_bm must be >= 0");
    const double r = f_bm / m.f_b0;
    ControllerOutput out;
    out.v_bm = std::clamp(a.k_bm * (r - a.delta_bm), 0.0, 1.0) * m.v_bm_max;
    out.v_bk = std::clamp(a.k_bk * (r - a.delta_bk), 0.0, 1.0) * m.v_bk_max;
    return out;
}

LoadingOutcome simulate_loading(const GlobalHeightmap& H, const DigPose& pose,
                                const Action& a, const MachineParams& m,
                                const SoilParams& soil, std::vector<TraceSample>* trace) {
    m.validate();
    soil.validate();
    pose.validate();
    if (a.delta_bm < 0.0 || a.k_bm < 0.0 || a.delta_bk < 0.0 || a.k_bk < 0.0)
        throw std::invalid_argument("action parameters must be non-negative");

    // Initial surface profile along the strip center, symmetric lateral mean
    // so mirrored scenes produce bit-identical outcomes.
    const double dl = H.cell_size;
    const int rows = static_cast<int>(std::ceil((m.max_penetration + 1.0) / dl));
    int jcols = static_cast<int>(std::llround(m.bucket_width / dl));
    if (jcols % 2 != 0) ++jcols;
    LocalHeightmap strip;
    double anchor;
    try {
        strip = cutout(H, pose, rows, jcols, 0.0);
        anchor = H.sample(pose.x, pose.y);
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("simulate_loading: dig pose footprint out of bounds");
    }
    std::vector<double> profile(rows + 1);
    for (int i = 0; i <= rows; ++i) {
        double acc = strip.at(i, 0);
        for (int j = 1; j <= jcols / 2; ++j) acc += strip.at(i, j) + strip.at(i, -j);
        profile[i] = anchor + acc / (jcols + 1);
    }
    auto surface_at = [&](double s) {
        const double g = std::clamp(s / dl, 0.0, static_cast<double>(rows));
        const int k = std::min(static_cast<int>(g), rows - 1);
        const double u = g - k;
        return (1.0 - u) * profile[k] + u * profile[k + 1];
    };

    LoadingOutcome out;
    out.phases.approach = m.approach_distance / m.drive_speed_target;

    const double dt = m.timestep;
    const double volume_cap = kOverfillFactor * m.bucket_capacity;
    double s = 0.0;
    double z_boom = anchor;
    double phi = 0.0;
    double volume = 0.0;
    double work = 0.0;  // J
    double t_fill = 0.0;

    while (true) {
        const double tip_z = z_boom + lip_rise(phi);
        const double surf = surface_at(s);
        const double depth = std::max(surf - tip_z, 0.0);

        if (phi >= kTiltEnd) {
            out.hit_tilt_end = true;
            break;
        }
        if (s >= m.max_penetration) {
            out.hit_penetration_cap = true;
            break;
        }
        if (s >= kBreakoutMinPenetration && tip_z >= surf) {
            out.broke_out = true;
            break;
        }
        if (t_fill >= m.max_fill_time) {
            out.hit_time_cap = true;
            break;
        }

        const double mass = soil.density * volume;
        const double f_bm = kForceCoefficient * soil.density * kGravity * m.bucket_width *
                                depth * depth +
                            kLoadForceShare * mass * kGravity;
        const ControllerOutput c = controller_step(f_bm, a, m);
        const double v_drive =
            m.drive_speed_target *
            std::clamp(1.0 - (f_bm / m.f_b0) / kStallForceRatio, kMinDriveFraction, 1.0);

        if (trace)
            trace->push_back({t_fill, s, tip_z, phi, depth, f_bm, c.v_bm, c.v_bk, v_drive});

        const double ds = v_drive * dt;
        if (volume < volume_cap)
            volume = std::min(volume + kFillEfficiency * m.bucket_width *
                                           std::min(depth, kMaxCutDepth) * ds,
                              volume_cap);

        s += ds;
        z_boom += kBoomLiftGain * c.v_bm * dt;
        phi += kTiltGain * c.v_bk * dt;
        work += (f_bm * c.v_bm + kBucketForceShare * f_bm * c.v_bk +
                 kDriveForceShare * f_bm * v_drive) *
                dt;
        t_fill += dt;
    }
    out.phases.fill = t_fill;

    // Curl to the end position at full speed; the load rises with the lip.
    double mass = soil.density * volume;
    if (phi < kTiltEnd) {
        out.phases.tilt_out = (kTiltEnd - phi) / (kTiltGain * m.v_bk_max);
        work += mass * kGravity * (lip_rise(kTiltEnd) - lip_rise(phi));
    }
    out.phases.settle = kSettleTime;
    out.phases.retreat = m.approach_distance / m.drive_speed_target;

    // Remove the swept material from the pile and let it settle. The loaded
    // mass is whatever the strip actually supplied, keeping soil conserved
    // between bucket and pile exactly.
    ReplaceCaResult upd =
        replace_ca(H, mass, pose, soil, m.bucket_width, m.max_penetration);
    out.shortfall = upd.shortfall;
    if (upd.shortfall > 0.0) mass = std::max(0.0, mass - upd.shortfall * soil.density);
    out.pile = std::move(upd.pile);

    work += mass * kGravity * kCarryLiftHeight;  // raising to carry height

    out.perf.mass_t = mass / 1000.0;
    out.perf.time_s = out.phases.approach + out.phases.fill + out.phases.tilt_out +
                      out.phases.settle + out.phases.retreat;
    out.perf.work_kj = work / 1000.0;
    return out;
}

}  // namespace pilecast
