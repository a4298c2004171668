#include "pilecast/pipeline/rollout.hpp"

#include <cmath>
#include <stdexcept>

#include "pilecast/characterize.hpp"
#include "pilecast/pipeline/lhs.hpp"
#include "pilecast/rng.hpp"

namespace pilecast::pipeline {

RolloutMode rollout_mode_from_string(const std::string& s) {
    if (s == "oracle") return RolloutMode::Oracle;
    if (s == "high") return RolloutMode::High;
    if (s == "low") return RolloutMode::Low;
    throw std::invalid_argument("unknown rollout mode: " + s);
}

std::string to_string(RolloutMode m) {
    switch (m) {
        case RolloutMode::Oracle: return "oracle";
        case RolloutMode::High: return "high";
        case RolloutMode::Low: return "low";
    }
    return "?";
}

double volume_difference_norm(const GlobalHeightmap& A, const GlobalHeightmap& B) {
    if (A.nx != B.nx || A.ny != B.ny)
        throw std::invalid_argument("volume_difference_norm: grid mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < A.heights.size(); ++k)
        sum += std::abs(A.heights[k] - B.heights[k]);
    return sum * A.cell_size * A.cell_size;
}

double perf_error_norm(const Performance& pred, const Performance& gt,
                       const std::array<double, 3>& ranges) {
    double acc = 0.0;
    const auto p = pred.as_array();
    const auto g = gt.as_array();
    for (int t = 0; t < 3; ++t) {
        const double r = ranges[t] > 0.0 ? ranges[t] : 1.0;
        const double d = (p[t] - g[t]) / r;
        acc += d * d;
    }
    return std::sqrt(acc);
}

Eigen::RowVectorXd model_input_row(const nn::PerformanceModel& model,
                                   const LocalHeightmap& window, const Action& a) {
    if (model.kind() == "low") {
        const PileCharacteristics ch = characterize(window);
        Eigen::RowVectorXd x(8);
        x << ch.theta, ch.alpha, ch.kappa_x, ch.kappa_y, a.delta_bm, a.k_bm, a.delta_bk,
            a.k_bk;
        return x;
    }
    const int hw = static_cast<int>(std::lround(std::sqrt(model.input_dim() - 4)));
    const Eigen::RowVectorXd pix = nn::local_heightmap_row(window, hw);
    Eigen::RowVectorXd x(pix.size() + 4);
    x << pix, a.delta_bm, a.k_bm, a.delta_bk, a.k_bk;
    return x;
}

RolloutReport rollout(const GlobalHeightmap& H1, int N, RolloutMode mode,
                      nn::PerformanceModel* model, const RolloutConfig& cfg) {
    if (N < 0) throw std::invalid_argument("rollout: N must be >= 0");
    if (mode != RolloutMode::Oracle && model == nullptr)
        throw std::invalid_argument("rollout: model modes need a trained model");

    RolloutReport rep;
    if (N == 0) {
        rep.final_gt_volume = rep.final_pred_volume = pile_volume(H1);
        return rep;
    }

    std::array<double, 3> ranges = {1.0, 1.0, 1.0};
    if (model)
        for (int t = 0; t < 3; ++t) ranges[t] = model->out_norm.range(t);

    const std::vector<Action> actions = lhs_actions(N, substream_seed(cfg.seed, "lhs"));
    GlobalHeightmap gt_pile = H1;
    GlobalHeightmap pred_pile = H1;
    double perf_err_accum = 0.0;

    for (int n = 0; n < N; ++n) {
        // Pose selected on the ground-truth pile evolution; both legs use the
        // identical pose/action sequence.
        DigPose pose;
        try {
            pose = select_dig_pose(gt_pile, substream_seed(cfg.seed, "pose", n), cfg.pose);
        } catch (const PileExhausted&) {
            rep.exhausted = true;
            break;
        }
        const Action action = actions[n];

        CycleEntry entry;
        entry.pose = pose;
        entry.action = action;

        LoadingOutcome gt_out;
        try {
            gt_out = simulate_loading(gt_pile, pose, action, cfg.machine, cfg.soil);
        } catch (const std::invalid_argument&) {
            rep.exhausted = true;
            break;
        }
        entry.gt = gt_out.perf;
        gt_pile = std::move(gt_out.pile);

        if (mode == RolloutMode::Oracle) {
            entry.pred = entry.gt;
            pred_pile = gt_pile;
        } else {
            try {
                const LocalHeightmap window =
                    cutout(pred_pile, pose, cfg.perf_window_cells, cfg.perf_window_cells,
                           cfg.perf_window_displacement);
                const Eigen::RowVectorXd row = model_input_row(*model, window, action);
                const auto pred = model->predict(row);
                entry.pred.mass_t = std::max(0.0, pred[0]);
                entry.pred.time_s = std::max(0.0, pred[1]);
                entry.pred.work_kj = std::max(0.0, pred[2]);
            } catch (const FlatPatchError&) {
                entry.pred = {};
                entry.pred_flat_patch = true;
            } catch (const std::out_of_range&) {
                rep.exhausted = true;
                break;
            }
            ReplaceCaResult upd =
                replace_ca(pred_pile, entry.pred.mass_t * 1000.0, pose, cfg.soil,
                           cfg.machine.bucket_width, cfg.machine.max_penetration);
            pred_pile = std::move(upd.pile);
        }

        entry.gt_volume = pile_volume(gt_pile);
        entry.pred_volume = pile_volume(pred_pile);
        entry.volume_abs_err = std::abs(entry.pred_volume - entry.gt_volume);
        entry.pile_state_err = mode == RolloutMode::Oracle
                                   ? 0.0
                                   : volume_difference_norm(pred_pile, gt_pile);
        perf_err_accum += perf_error_norm(entry.pred, entry.gt, ranges);
        entry.perf_err_accum = perf_err_accum;

        for (int t = 0; t < 3; ++t) {
            rep.accum_gt[t] += entry.gt.as_array()[t];
            rep.accum_pred[t] += entry.pred.as_array()[t];
        }
        if (cfg.snapshot) cfg.snapshot(n, gt_pile, pred_pile);
        rep.cycles.push_back(std::move(entry));
        ++rep.completed;
    }

    rep.final_gt_volume = pile_volume(gt_pile);
    rep.final_pred_volume = pile_volume(pred_pile);
    if (!rep.cycles.empty()) {
        rep.pile_state_err = rep.cycles.back().pile_state_err;
        rep.perf_err = rep.cycles.back().perf_err_accum;
    }
    return rep;
}

std::pair<double, double> accumulated_errors(const RolloutReport& report) {
    return {report.pile_state_err, report.perf_err};
}

}  // namespace pilecast::pipeline
