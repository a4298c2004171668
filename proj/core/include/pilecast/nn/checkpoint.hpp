#pragma once

#include <memory>
#include <string>

#include "pilecast/nn/model.hpp"

namespace pilecast::nn {

// Text format PILECAST-NN 1: spec block, normalizers, then one line group per
// tensor (header line + one row-major data line per leading dimension).
// Round-trips bit-exactly.
void save_checkpoint(PerformanceModel& model, const std::string& path,
                     std::uint64_t seed);
std::unique_ptr<PerformanceModel> load_checkpoint(const std::string& path);

}  // namespace pilecast::nn
