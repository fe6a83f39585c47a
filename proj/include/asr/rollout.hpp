#pragma once

#include "asr/config.hpp"
#include "asr/episode.hpp"
#include "asr/model.hpp"
#include "asr/tape.hpp"

#include <array>
#include <vector>

namespace asr {

struct TrainableFlags {
    bool phi = true;   // execution parameters (bang-bang scalars and/or f_phi)
    bool theta = true; // hedging network
    bool w = true;     // OCE translation scalar
};

// Which parameters train in a given mode: sequential hedging freezes the
// execution side, everything else trains whatever the wiring uses.
TrainableFlags trainables_for(const ExperimentConfig& cfg);

struct BatchGrads {
    MlpGrads phi;
    MlpGrads theta;
    std::array<double, 4> bb{0.0, 0.0, 0.0, 0.0};
    double w = 0.0;

    void match(const TrainedModel& model);
    void zero();
};

struct BatchEval {
    double objective = 0.0;
    BatchGrads grads;
};

// Objective value and gradient of the relaxed control problem over paths
// [first, first+count). The batch is processed in fixed blocks of
// cfg.training.block lanes; per-block partial sums are reduced in block
// order, so the result is identical for any thread count, and the serial
// and OpenMP paths agree bit for bit.
BatchEval batch_objective_grad(const PathSet& paths, int first, int count,
                               const ExperimentConfig& cfg, const TrainedModel& model,
                               const TrainableFlags& flags, bool parallel);

// Forward-only objective (no gradient buffers, no backward sweep).
double batch_objective(const PathSet& paths, int first, int count, const ExperimentConfig& cfg,
                       const TrainedModel& model, bool parallel);

// Per-day tape values for one block, exposed for the reference cross-check.
struct BlockProbe {
    int lanes = 0;
    int n_days = 0;
    // [day][lane] flattened, day-major
    std::vector<double> b, h, w, q, p, p_tilde, pnl_norm, penalty;
    std::vector<double> objective; // per lane

    double at(const std::vector<double>& field, int day, int lane) const {
        return field[static_cast<size_t>(day) * lanes + lane];
    }
};

BlockProbe run_block_probe(const PathSet& paths, int first, int lanes,
                           const ExperimentConfig& cfg, const TrainedModel& model);

} // namespace asr
