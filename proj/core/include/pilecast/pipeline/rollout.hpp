#pragma once

#include <functional>
#include <optional>

#include "pilecast/nn/model.hpp"
#include "pilecast/pipeline/dataset.hpp"

namespace pilecast::pipeline {

enum class RolloutMode { Oracle, High, Low };
RolloutMode rollout_mode_from_string(const std::string& s);
std::string to_string(RolloutMode m);

struct CycleEntry {
    DigPose pose;
    Action action;
    Performance gt;
    Performance pred;
    double gt_volume = 0.0;          // m^3 after this cycle
    double pred_volume = 0.0;
    double volume_abs_err = 0.0;     // |pred - gt| pile volume, m^3
    double pile_state_err = 0.0;     // sum |Hhat - H| * dl^2 over the grid, m^3
    double perf_err_accum = 0.0;     // running E^P (range-scaled 2-norms)
    bool pred_flat_patch = false;    // characterize failed on the model pile
};

struct RolloutConfig {
    MachineParams machine;
    SoilParams soil;
    PoseSelectParams pose;
    int perf_window_cells = 36;
    double perf_window_displacement = 0.0;
    std::uint64_t seed = 0;
    // Optional per-cycle sink: (cycle index, ground-truth pile, predicted pile).
    std::function<void(int, const GlobalHeightmap&, const GlobalHeightmap&)> snapshot;
};

struct RolloutReport {
    std::vector<CycleEntry> cycles;
    std::array<double, 3> accum_gt{};    // mass t, time s, work kJ
    std::array<double, 3> accum_pred{};
    double final_gt_volume = 0.0;
    double final_pred_volume = 0.0;
    double pile_state_err = 0.0;  // E^H at the final cycle
    double perf_err = 0.0;        // E^P accumulated over cycles
    int completed = 0;            // cycles actually executed
    bool exhausted = false;       // ended early on pile exhaustion
};

// Long-horizon prediction loop. The ground-truth leg runs the loading oracle
// with poses selected on its own pile evolution; model legs replay the
// identical pose/action sequence, predicting performance from their own pile
// state and updating it with the mass-removal + relaxation step. Oracle mode
// compares the oracle against itself (all errors zero).
RolloutReport rollout(const GlobalHeightmap& H1, int N, RolloutMode mode,
                      nn::PerformanceModel* model, const RolloutConfig& cfg);

// E^H (volume-difference norm of the final piles) and E^P (sum over cycles of
// the per-target range-scaled Euclidean norm of the performance error).
std::pair<double, double> accumulated_errors(const RolloutReport& report);

// Range-scaled performance error norm of a single cycle.
double perf_error_norm(const Performance& pred, const Performance& gt,
                       const std::array<double, 3>& target_ranges);

double volume_difference_norm(const GlobalHeightmap& A, const GlobalHeightmap& B);

// Builds the model's raw (denormalized) input row from a cutout window and an
// action: [theta, alpha, kx, ky, a] for the low model, [pixels, a] for high.
// Throws FlatPatchError for the low model on a flat window.
Eigen::RowVectorXd model_input_row(const nn::PerformanceModel& model,
                                   const LocalHeightmap& window, const Action& a);

}  // namespace pilecast::pipeline
