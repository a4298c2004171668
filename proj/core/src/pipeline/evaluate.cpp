#include "pilecast/pipeline/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace pilecast::pipeline {

EvalResult evaluate(nn::PerformanceModel& model, const nn::Matrix& X_raw,
                    const nn::Matrix& Y_raw, const std::vector<bool>& capped,
                    bool measure_timing) {
    const Eigen::Index n = X_raw.rows();
    if (n == 0) throw std::invalid_argument("evaluate: empty test set");
    if (Y_raw.rows() != n) throw std::invalid_argument("evaluate: X/Y row mismatch");
    if (!capped.empty() && static_cast<Eigen::Index>(capped.size()) != n)
        throw std::invalid_argument("evaluate: capped flag size mismatch");

    const nn::Matrix pred_norm = model.forward(model.in_norm.apply(X_raw), false);
    const nn::Matrix pred = model.out_norm.invert(pred_norm);

    EvalResult res;
    std::array<double, 3> sum{}, sum_uncapped{};
    std::array<int, 3> n_uncapped{};
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool is_capped = !capped.empty() && capped[i];
        if (is_capped) ++res.n_capped;
        for (int t = 0; t < 3; ++t) {
            const double y = Y_raw(i, t);
            const double floor = 0.01 * model.out_norm.range(t);
            if (std::abs(y) < floor) {
                ++res.n_floor_excluded[t];
                continue;
            }
            const double rel = std::abs(pred(i, t) - y) / std::abs(y);
            sum[t] += rel;
            ++res.n_used[t];
            if (!is_capped) {
                sum_uncapped[t] += rel;
                ++n_uncapped[t];
            }
        }
    }
    res.n_capped = capped.empty() ? 0 : res.n_capped;
    for (int t = 0; t < 3; ++t) {
        res.mre[t] = res.n_used[t] > 0 ? sum[t] / res.n_used[t] : 0.0;
        res.mre_uncapped[t] = n_uncapped[t] > 0 ? sum_uncapped[t] / n_uncapped[t] : 0.0;
    }

    if (measure_timing) {
        const int reps = 1000;
        const Eigen::RowVectorXd row = model.in_norm.apply(X_raw.row(0));
        volatile double sink = 0.0;
        const auto t0 = std::chrono::steady_clock::now();
        for (int r = 0; r < reps; ++r) {
            const nn::Matrix y = model.forward(row, false);
            sink = sink + y(0, 0);
        }
        const auto t1 = std::chrono::steady_clock::now();
        res.mean_inference_ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
    }
    return res;
}

std::unique_ptr<nn::PerformanceModel> fit_low(const nn::Matrix& X_raw,
                                              const nn::Matrix& Y_raw,
                                              const nn::MlpSpec& spec,
                                              const nn::TrainConfig& cfg,
                                              std::uint64_t init_seed,
                                              nn::TrainResult* result) {
    auto model = std::make_unique<nn::PsiLow>(spec, init_seed);
    model->in_norm = nn::Normalizer::fit(X_raw);
    model->out_norm = nn::Normalizer::fit(Y_raw);
    nn::TrainResult r =
        nn::train(*model, model->in_norm.apply(X_raw), model->out_norm.apply(Y_raw), cfg);
    if (result) *result = std::move(r);
    return model;
}

std::unique_ptr<nn::PerformanceModel> fit_high(const nn::Matrix& X_raw,
                                               const nn::Matrix& Y_raw,
                                               const nn::ConvEncoderSpec& conv_spec,
                                               const nn::MlpSpec& head_spec,
                                               const nn::TrainConfig& cfg,
                                               std::uint64_t init_seed,
                                               nn::TrainResult* result) {
    auto model = std::make_unique<nn::PsiHigh>(conv_spec, head_spec, init_seed);
    const int pix = conv_spec.input_hw * conv_spec.input_hw;
    model->in_norm = nn::Normalizer::fit(X_raw, pix);
    model->out_norm = nn::Normalizer::fit(Y_raw);
    nn::TrainResult r =
        nn::train(*model, model->in_norm.apply(X_raw), model->out_norm.apply(Y_raw), cfg);
    if (result) *result = std::move(r);
    return model;
}

}  // namespace pilecast::pipeline
