#pragma once

#include "pilecast/characterize.hpp"
#include "pilecast/pipeline/rollout.hpp"

namespace pilecast::pipeline {

struct DigmapEntry {
    DigPose pose;
    PileCharacteristics ch;
    std::array<double, 3> pred{};  // mass t, time s, work kJ
};

struct DigmapResult {
    std::vector<DigmapEntry> entries;
    int requested = 0;
    double inference_seconds = 0.0;  // model time only
};

struct DigmapConfig {
    PoseSelectParams pose;  // edge band thresholds reused
    int perf_window_cells = 36;
    double perf_window_displacement = 0.0;
};

// Predicted performance under a fixed action at n locations spread evenly
// along the pile edge (ordered by polar angle around the pile centroid),
// heading along the inward local normal. Emits fewer entries when the edge
// has fewer usable cells than requested.
DigmapResult diggability_map(const GlobalHeightmap& H, const Action& a, int n_locations,
                             nn::PerformanceModel& model, const DigmapConfig& cfg = {});

}  // namespace pilecast::pipeline
