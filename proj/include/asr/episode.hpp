#pragma once

#include "asr/config.hpp"
#include "asr/contract.hpp"
#include "asr/model.hpp"

#include <span>
#include <vector>

namespace asr {

// Plain-double episode evaluation, one path at a time. This is the serial
// reference for the tape kernel in rollout.hpp: same formulas, independent
// code path, no gradients. Used by evaluation, exports and tests.
//
// `prices` must carry n_max + 1 columns (day k at prices[k-1]).
EpisodeResult run_episode(std::span<const double> prices, const ExperimentConfig& cfg,
                          const TrainedModel& model);

// All paths of a set; OpenMP over paths, output order fixed.
std::vector<EpisodeResult> run_episodes(const PathSet& paths, const ExperimentConfig& cfg,
                                        const TrainedModel& model);

// Serial version of run_episodes, kept for the benchmark comparison.
std::vector<EpisodeResult> run_episodes_serial(const PathSet& paths, const ExperimentConfig& cfg,
                                               const TrainedModel& model);

// Sample the realized stop day for each episode: first day n in the
// exercise window with zeta(seed, path, n) <= p_n. Sets realized_stop.
void realized_stops(std::vector<EpisodeResult>& episodes, uint64_t zeta_seed);

// Single-draw variant used by tests.
int sample_stop(const EpisodeResult& episode, uint64_t zeta_seed, uint64_t path_index);

} // namespace asr
