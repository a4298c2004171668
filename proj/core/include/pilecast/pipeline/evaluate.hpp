#pragma once

#include <array>
#include <memory>

#include "pilecast/nn/train.hpp"

namespace pilecast::pipeline {

struct EvalResult {
    std::array<double, 3> mre{};           // per-target mean relative error
    std::array<double, 3> mre_uncapped{};  // same, excluding time-capped cycles
    std::array<int, 3> n_used{};
    std::array<int, 3> n_floor_excluded{};
    int n_capped = 0;
    double mean_inference_ms = 0.0;  // mean over 1,000 single-sample calls
};

// MRE on denormalized values. Samples whose |target| falls below 1% of that
// target's training-set range are excluded from the mean (relative error is
// meaningless near zero). Pass measure_timing = false on deterministic
// artifact paths.
EvalResult evaluate(nn::PerformanceModel& model, const nn::Matrix& X_raw,
                    const nn::Matrix& Y_raw, const std::vector<bool>& capped,
                    bool measure_timing = true);

// Fits the min-max normalizers on the raw train+val matrices, trains, and
// returns the model holding its normalizers. The high model's heightmap
// pixels share one global (min, max).
std::unique_ptr<nn::PerformanceModel> fit_low(const nn::Matrix& X_raw,
                                              const nn::Matrix& Y_raw,
                                              const nn::MlpSpec& spec,
                                              const nn::TrainConfig& cfg,
                                              std::uint64_t init_seed,
                                              nn::TrainResult* result = nullptr);

std::unique_ptr<nn::PerformanceModel> fit_high(const nn::Matrix& X_raw,
                                               const nn::Matrix& Y_raw,
                                               const nn::ConvEncoderSpec& conv_spec,
                                               const nn::MlpSpec& head_spec,
                                               const nn::TrainConfig& cfg,
                                               std::uint64_t init_seed,
                                               nn::TrainResult* result = nullptr);

}  // namespace pilecast::pipeline
