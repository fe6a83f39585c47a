#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace asr {

struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A view over every trainable array of a model, paired with the matching
// gradient array. Order is fixed by the caller and must not change between
// steps: the moment accumulators below are indexed by flat position.
struct ParamView {
    std::vector<std::span<double>> params;
    std::vector<std::span<const double>> grads;

    void push(std::span<double> p, std::span<const double> g);
    size_t total() const;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adaptive-moment estimation over a flat parameter view.
struct AdamState {
    AdamConfig cfg;
    std::vector<double> m; // first moments
    std::vector<double> v; // second moments
    long step_count = 0;

    void init(size_t total, const AdamConfig& c);

    // One update. Throws TrainError naming the step if any gradient entry is
    // non-finite.
    void step(ParamView& view);
};

} // namespace asr
