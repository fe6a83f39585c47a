#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace asr {

struct MarketParams {
    double s0 = 45.0;      // spot at day 1, currency units
    double sigma = 0.21;   // annualized volatility
    double rate = 0.0;     // annual risk-free rate
    double dt = 1.0 / 252; // year fraction per grid step

    void validate() const;
};

enum class SplitTag { train, validation, test };

// Matrix of simulated daily prices, one row per path. For a contract with
// maturity day N_Max the matrix carries N_Max + 1 columns so the hedge
// increment S_{k+1} - S_k is defined on every held day.
struct PathSet {
    std::vector<double> prices; // row-major [n_paths x n_cols]
    int n_paths = 0;
    int n_cols = 0;
    uint64_t seed = 0;
    SplitTag split_tag = SplitTag::train;

    double at(int path, int col) const { return prices[static_cast<size_t>(path) * n_cols + col]; }
    const double* row(int path) const { return prices.data() + static_cast<size_t>(path) * n_cols; }
};

// Simulate geometric Brownian motion on the daily grid. Column 0 equals s0;
// each increment uses a normal draw keyed on (seed, path, step) so the
// result is independent of scheduling. n_cols >= 2.
PathSet simulate_gbm(const MarketParams& params, int n_paths, int n_cols, uint64_t seed,
                     SplitTag tag = SplitTag::train);

// Serial reference for the OpenMP simulator above; bit-identical output.
PathSet simulate_gbm_serial(const MarketParams& params, int n_paths, int n_cols, uint64_t seed,
                            SplitTag tag = SplitTag::train);

struct SeedTriple {
    uint64_t train;
    uint64_t validation;
    uint64_t test;
};

// Deterministic, pairwise-distinct seeds for the three disjoint path sets.
SeedTriple split_seeds(uint64_t base_seed);

// CSV dump for cross-implementation comparison. First line is a header
// carrying n_paths, n_cols and the seed; one row per path after it.
void save_pathset_csv(const PathSet& ps, const std::string& path);

struct ParameterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace asr
