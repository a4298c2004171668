#include "pilecast/pipeline/lhs.hpp"

#include <numeric>
#include <stdexcept>

#include "pilecast/rng.hpp"

namespace pilecast::pipeline {

std::vector<std::vector<double>> lhs_sample(int n,
                                            const std::vector<std::pair<double, double>>& ranges,
                                            std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("lhs_sample: n must be >= 1");
    Rng rng(seed);
    std::vector<std::vector<double>> out(n, std::vector<double>(ranges.size()));
    std::vector<int> strata(n);
    for (std::size_t d = 0; d < ranges.size(); ++d) {
        const auto [lo, hi] = ranges[d];
        if (!(hi >= lo)) throw std::invalid_argument("lhs_sample: bad range");
        std::iota(strata.begin(), strata.end(), 0);
        rng.shuffle(strata);
        const double w = (hi - lo) / n;
        for (int i = 0; i < n; ++i)
            out[i][d] = lo + (strata[i] + rng.uniform()) * w;
    }
    return out;
}

std::vector<Action> lhs_actions(int n, std::uint64_t seed) {
    const std::vector<std::pair<double, double>> ranges = {
        {0.0, 0.7}, {0.0, 5.0}, {0.0, 0.7}, {0.0, 5.0}};
    const auto rows = lhs_sample(n, ranges, seed);
    std::vector<Action> actions(n);
    for (int i = 0; i < n; ++i)
        actions[i] = {rows[i][0], rows[i][1], rows[i][2], rows[i][3]};
    return actions;
}

}  // namespace pilecast::pipeline
