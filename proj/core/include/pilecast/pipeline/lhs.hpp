#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pilecast/oracle.hpp"

namespace pilecast::pipeline {

// Latin Hypercube Sampling: per dimension, exactly one sample in each of n
// equal strata, with the stratum order randomly permuted per dimension and
// uniform jitter inside each stratum.
std::vector<std::vector<double>> lhs_sample(int n,
                                            const std::vector<std::pair<double, double>>& ranges,
                                            std::uint64_t seed);

// The action-space design with the published sampling ranges:
// delta in [0, 0.7], k in [0, 5].
std::vector<Action> lhs_actions(int n, std::uint64_t seed);

}  // namespace pilecast::pipeline
