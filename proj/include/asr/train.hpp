#pragma once

#include "asr/adam.hpp"
#include "asr/config.hpp"
#include "asr/model.hpp"
#include "asr/rollout.hpp"

#include <optional>
#include <string>

namespace asr {

// Minibatch gradient descent on the relaxed objective. Fresh training paths
// are simulated every epoch from a seed derived from (train_seed, epoch);
// the validation set is fixed. Returns the parameters of the best
// validation epoch. Sequential hedging trains (theta, w) with the execution
// parameters frozen and therefore needs `start` carrying a trained
// execution policy; joint/constrained runs may also warm-start from it.
TrainedModel train(const ExperimentConfig& cfg,
                   const std::optional<TrainedModel>& start = std::nullopt);

// epoch, train objective, validation objective, seconds per line.
void save_history_csv(const std::vector<EpochStats>& history, const std::string& path);

} // namespace asr
