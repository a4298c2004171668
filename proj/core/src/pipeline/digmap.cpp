#include "pilecast/pipeline/digmap.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace pilecast::pipeline {

DigmapResult diggability_map(const GlobalHeightmap& H, const Action& a, int n_locations,
                             nn::PerformanceModel& model, const DigmapConfig& cfg) {
    DigmapResult res;
    res.requested = n_locations;
    if (n_locations < 1) return res;

    std::vector<std::pair<int, int>> cells = edge_cells(H, cfg.pose);
    if (cells.empty()) return res;

    // Height-weighted pile centroid for a stable angular ordering.
    double cx = 0.0, cy = 0.0, wsum = 0.0;
    for (int iy = 0; iy < H.ny; ++iy)
        for (int ix = 0; ix < H.nx; ++ix) {
            const double w = std::max(0.0, H.at(ix, iy));
            cx += w * H.world_x(ix);
            cy += w * H.world_y(iy);
            wsum += w;
        }
    if (wsum > 0.0) {
        cx /= wsum;
        cy /= wsum;
    }
    std::sort(cells.begin(), cells.end(), [&](const auto& A, const auto& B) {
        const double aa = std::atan2(H.world_y(A.second) - cy, H.world_x(A.first) - cx);
        const double ab = std::atan2(H.world_y(B.second) - cy, H.world_x(B.first) - cx);
        if (aa != ab) return aa < ab;
        return A < B;
    });

    const int m = static_cast<int>(cells.size());
    const int n = std::min(n_locations, m);
    for (int k = 0; k < n; ++k) {
        const auto [ix, iy] = cells[static_cast<std::size_t>(k) * m / n];
        double heading;
        if (!inward_heading(H, ix, iy, heading)) continue;
        const DigPose pose = make_pose(H.world_x(ix), H.world_y(iy), heading);

        DigmapEntry e;
        e.pose = pose;
        try {
            const LocalHeightmap window = cutout(H, pose, cfg.perf_window_cells,
                                                 cfg.perf_window_cells,
                                                 cfg.perf_window_displacement);
            e.ch = characterize(window);
            const Eigen::RowVectorXd row = model_input_row(model, window, a);
            const auto t0 = std::chrono::steady_clock::now();
            e.pred = model.predict(row);
            const auto t1 = std::chrono::steady_clock::now();
            res.inference_seconds += std::chrono::duration<double>(t1 - t0).count();
        } catch (const FlatPatchError&) {
            continue;
        } catch (const std::out_of_range&) {
            continue;
        }
        res.entries.push_back(std::move(e));
    }
    return res;
}

}  // namespace pilecast::pipeline
