#pragma once

#include "asr/config.hpp"
#include "asr/episode.hpp"
#include "asr/model.hpp"

#include <string>
#include <vector>

namespace asr {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All reported metrics. bps values are on the PnL / W_Min * 1e4 scale;
// risk values follow the loss convention (negative = profit).
struct MetricsReport {
    double es_bps = 0.0;           // ES_alpha with w re-minimized (exact)
    double mv_bps = 0.0;           // mean-variance closed form
    double delta_fair_bps = 0.0;
    double delta_ind_bps = 0.0;
    double gap_bps = 0.0;          // delta_fair - delta_ind
    double mean_pnl_asr_bps = 0.0; // relaxed-weighted mean of the ASR leg
    double mean_pnl_total_bps = 0.0;
    double w_window_violation_rate = 0.0; // penalty-path fraction
    double objective_trained_w = 0.0;     // OCE value at the checkpoint's w
    double trained_w = 0.0;
    bool ind_flagged = false; // position unacceptable at zero discount
    std::vector<long> stop_counts; // realized stop day histogram, day 1..n_max

    std::string to_json() const;
    std::string csv_header() const;
    std::string csv_row(const std::string& run_id) const;
};

// delta such that the relaxed-weighted expected ASR payoff is zero:
// 1 - E[sum p~ W] / E[sum p~ A Q]. Returns a fraction, not bps.
double fair_discount(const std::vector<EpisodeResult>& episodes);

struct IndifferenceResult {
    double delta = 0.0; // fraction
    bool flagged = false;
};

// delta such that rho(PnL(delta)) = 0, with PnL(delta) affine in delta
// pathwise and w re-minimized exactly at every candidate. Bisection to 1e-6.
IndifferenceResult indifference_discount(const std::vector<EpisodeResult>& episodes,
                                         const TermSheet& ts, const RiskSpec& risk);

// rho of the total PnL at a given discount (normalized scale), exact in w.
double risk_at_discount(const std::vector<EpisodeResult>& episodes, const TermSheet& ts,
                        const RiskSpec& risk, double delta);

// Simulates the test set from the test seed, runs every episode and fills
// the report. The hedge mode of the config governs: evaluating a jointly
// trained model under `capped` applies the turnover cap ex post.
MetricsReport evaluate_model(const ExperimentConfig& cfg, const TrainedModel& model);

// Same but reusing episodes the caller already computed.
MetricsReport compute_metrics(const ExperimentConfig& cfg, const TrainedModel& model,
                              std::vector<EpisodeResult>& episodes);

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<long> counts;   // bins
    std::vector<double> density;
};

Histogram make_histogram(std::span<const double> values, int bins);
void export_histogram(std::span<const double> values, int bins, const std::string& out_path);

// Realized per-path PnL in bps at the sampled stop; episodes must have
// realized_stop set.
std::vector<double> realized_pnl_bps(const std::vector<EpisodeResult>& episodes,
                                     const TermSheet& ts, bool asr_only);

// One row per (path, day): b, h, p, p_tilde, W, Q, A, plus a summary row per
// path.
void export_episodes_csv(const std::vector<EpisodeResult>& episodes, const std::string& path);

} // namespace asr
