#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace asr {

// Contract dates, notional range, discount and trading limits. The daily
// buyback bounds are constant in the reference contract; nu_hedge is the
// combined buyback-plus-hedge turnover cap and defaults to unlimited.
struct TermSheet {
    int n_min = 22;          // first exercise day
    int n_max = 63;          // maturity day
    double w_min = 810e6;    // lower notional bound (currency)
    double w_max = 990e6;    // upper notional bound (currency)
    double discount = 0.0;   // delta, fraction of the benchmark
    double nu_lower = 0.0;   // minimum shares per day
    double nu_upper = 1.5e6; // maximum shares per day
    double nu_hedge = std::numeric_limits<double>::infinity();

    void validate() const;
    bool hedge_capped() const { return std::isfinite(nu_hedge); }
};

// Accounting state at the start of day `day`: spot and running average are
// already updated for the day, the accumulators still hold yesterday's
// values.
struct ProgramState {
    int day = 1;        // n, 1-based
    double spot = 0.0;  // S_n
    double avg = 0.0;   // A_n
    double q_prev = 0.0; // Q_{n-1}, shares
    double w_prev = 0.0; // W_{n-1}, currency
    double h_prev = 0.0; // h_{n-1}, shares
};

// Advance the accumulators with today's purchase and roll to the next day.
ProgramState step_accumulators(const ProgramState& state, double b_n, double next_spot);

// (1 - delta) * avg * q - w
double pnl_asr(double avg, double q, double w, double discount);

// Sum of h_k * (S_{k+1} - S_k) for k = 1..stop with h_stop = 0; `spots` must
// carry at least stop+1 entries (1-based day k at spots[k-1]).
double pnl_hedge(std::span<const double> h, std::span<const double> spots, int stop);

// Quadratic shortfall penalty in W_Min-normalized units:
// ((max(w_min - w_final, 0)) / w_min)^2.
double penalty_min(double w_final, double w_min);

// Everything an episode produced, one entry per day (index 0 = day 1).
// p_tilde is nonzero only inside the exercise window; the hedge entry for a
// day is the position held from that day to the next.
struct EpisodeResult {
    std::vector<double> b, h, p, p_tilde;
    std::vector<double> w, q, a;          // accumulators after each day
    std::vector<double> pnl_asr;          // currency, at each candidate stop
    std::vector<double> pnl_hedge;        // currency, hedge prefix at each candidate stop
    std::vector<double> penalty;          // normalized, at each candidate stop
    int realized_stop = -1;               // set by realized_stops
    bool w_window_hit = false;            // W entered [W_Min, W_Max] in the window
    bool penalty_path = false;            // forced to maturity with W < W_Min

    int n_days() const { return static_cast<int>(b.size()); }
};

struct ConstraintViolation {
    int day = 0;        // 1-based
    std::string what;
    double value = 0.0;
    double bound = 0.0;
};

struct ConstraintReport {
    std::vector<ConstraintViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Verify the term-sheet constraints on a finished episode: buyback bounds,
// combined turnover bound, and the notional window on every day carrying
// stopping mass (penalty paths excepted at maturity).
ConstraintReport check_constraints(const EpisodeResult& episode, const TermSheet& ts);

} // namespace asr
