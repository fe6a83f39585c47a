#pragma once

#include "asr/model.hpp"

#include <string>

namespace asr {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned JSON blob: policy kind, bang-bang scalars, network weights, the
// OCE scalar, optimizer state and training history. Doubles are written
// with shortest round-trip precision, so save/load is lossless.
void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

} // namespace asr
