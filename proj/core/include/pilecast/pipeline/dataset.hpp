#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pilecast/avalanche.hpp"
#include "pilecast/dig_frame.hpp"
#include "pilecast/nn/model.hpp"
#include "pilecast/oracle.hpp"
#include "pilecast/seed_pile.hpp"

namespace pilecast::pipeline {

struct RecordMeta {
    int seed_index = 0;
    int repeat = 0;
    int cycle = 0;
    std::uint64_t pre_pile_hash = 0;   // global pile before this loading
    std::uint64_t post_pile_hash = 0;  // after
    bool capped = false;               // fill phase hit the time cap
};

struct DatasetRecord {
    LocalHeightmap h;        // performance window (36x36 cells, zero displacement)
    LocalHeightmap h_state;  // pile-state window before (52x52 cells, 1.0 m displacement)
    LocalHeightmap h_post;   // pile-state window after
    Action action;
    Performance perf;
    DigPose pose;
    RecordMeta meta;
};

struct Dataset {
    std::vector<DatasetRecord> records;
    bool mirror_augment = false;
    std::uint64_t seed = 0;
};

struct SeedPileSpec {
    PileKind kind = PileKind::Wedged;
    double slope_deg = 30.0;
    double extent = 24.0;
    double height_cap = 5.0;
};

struct CollectConfig {
    std::vector<SeedPileSpec> seeds;  // defaults to the six published shapes
    int repeats = 4;
    int cycles = 30;
    double cell_size = 0.1;
    double noise_amplitude = 0.15;
    double noise_frequency = 0.35;
    int noise_octaves = 3;
    MachineParams machine;
    SoilParams soil;
    PoseSelectParams pose;
    int perf_window_cells = 36;
    double perf_window_displacement = 0.0;
    int state_window_cells = 52;
    double state_window_displacement = 1.0;
    bool mirror_augment = false;
    std::uint64_t seed = 0;
    int jobs = 1;

    static std::vector<SeedPileSpec> default_seeds();
};

// Runs repeats x 30-cycle chains on each seed pile; every loading feeds the
// resulting pile into the next cycle. A chain whose pose selection fails ends
// early. Chains are independent given their RNG streams and may run in
// parallel; records are merged in (seed, repeat, cycle) order.
Dataset collect_dataset(const CollectConfig& cfg);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Flat training matrices (normalization happens later, on the training split).
// Rows of X: [theta, alpha, kappa_x, kappa_y, action(4)] for the low model;
// [pixels(32x32), action(4)] for the high model. Records whose window is flat
// (incidence undefined) are skipped for the low model.
void dataset_matrices_low(const Dataset& ds, nn::Matrix& X, nn::Matrix& Y,
                          std::vector<bool>* capped = nullptr);
void dataset_matrices_high(const Dataset& ds, int input_hw, nn::Matrix& X, nn::Matrix& Y,
                           std::vector<bool>* capped = nullptr, bool mirror_augment = false);

}  // namespace pilecast::pipeline
