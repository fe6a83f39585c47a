#pragma once

#include "asr/tape.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace asr {

// Fully connected network with per-layer activations. The execution network
// maps 3 inputs through three 128-wide rectifier layers to a 2-unit sigmoid
// output; the hedging network maps 3 inputs through five 150-wide rectifier
// layers to a 1-unit linear output.
struct Mlp {
    struct Layer {
        int in = 0;
        int out = 0;
        ad::Act act = ad::Act::None;
        std::vector<double> W; // row-major [out x in]
        std::vector<double> b; // [out]
    };

    std::vector<Layer> layers;

    static Mlp make(const std::vector<int>& widths, ad::Act hidden, ad::Act output);
    static Mlp execution_net(int outputs); // 3 -> 128x3 relu -> outputs sigmoid
    static Mlp hedging_net();              // 3 -> 150x5 relu -> 1 linear

    bool empty() const { return layers.empty(); }
    int input_width() const { return layers.empty() ? 0 : layers.front().in; }
    int output_width() const { return layers.empty() ? 0 : layers.back().out; }
    size_t param_count() const;

    // Uniform fan-in initialization, U(-1/sqrt(in), 1/sqrt(in)), keyed on
    // `seed` so runs reproduce. When zero_output is set the last layer's
    // weights and biases start at zero, which makes a sigmoid head emit 0.5
    // and a linear head emit 0 on the first step.
    void init_weights(uint64_t seed, bool zero_output);

    void forward(std::span<const double> in, std::span<double> out) const;

    std::vector<double> flatten() const;
    void unflatten(std::span<const double> flat);
};

// Gradient buffers shaped exactly like an Mlp's parameters.
struct MlpGrads {
    std::vector<std::vector<double>> dW, db;

    void match(const Mlp& net);
    void zero();
    void add(const MlpGrads& other);
};

// Records the network's forward pass on the tape. `in` must point at
// `input_width` consecutive tape rows. Per-layer gradient buffers come from
// `grads`; pass nullptr to freeze the network (values only).
ad::Var mlp_forward_tape(ad::Tape& tape, const Mlp& net, ad::Var in, MlpGrads* grads);

} // namespace asr
