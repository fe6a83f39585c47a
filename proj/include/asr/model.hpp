#pragma once

#include "asr/config.hpp"
#include "asr/mlp.hpp"
#include "asr/policy.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace asr {

enum class BoundsFamily { bangbang, network };

// Which component computes what. Derived from the policy kind; the four
// configurations each swap one ingredient of the baseline policy.
struct PolicyWiring {
    bool b_from_net = false;
    bool p_from_net = false;
    BoundsFamily bounds = BoundsFamily::bangbang;
    int net_outputs = 0; // 0, 1 (b or p alone) or 2 (b then p)
    int b_out_index = 0;
    int p_out_index = 0;
};

PolicyWiring build_configuration(PolicyKind kind);

struct EpochStats {
    int epoch = 0;
    double train_objective = 0.0;
    double val_objective = 0.0;
    double seconds = 0.0;
};

// Everything a trained run produces: the policy parameters, the OCE scalar,
// and the training history. Checkpoints round-trip this losslessly.
struct TrainedModel {
    PolicyKind kind = PolicyKind::bangbang;
    HedgeMode hedge_mode = HedgeMode::none;
    BangBangParams bb;
    Mlp f_phi;   // empty unless the wiring uses a network
    Mlp f_theta; // empty unless hedging
    double w = 0.0;
    uint64_t config_hash = 0;
    std::vector<EpochStats> history;
    bool improved = true; // false when validation never beat the init
    // Optimizer state, kept so checkpoints can resume exactly.
    std::vector<double> adam_m, adam_v;
    long adam_steps = 0;

    PolicyWiring wiring() const { return build_configuration(kind); }
    bool uses_net() const { return wiring().net_outputs > 0; }
    bool hedged() const { return hedge_mode != HedgeMode::none; }
};

// Fresh model for a config: wiring-sized networks, seeded initialization,
// zeroed output layers so training starts from the midpoint policy and a
// flat hedge.
TrainedModel init_model(const ExperimentConfig& cfg);

} // namespace asr
