#pragma once

#include "asr/contract.hpp"
#include "asr/paths.hpp"

#include <span>
#include <utility>
#include <vector>

namespace asr {

// Four-scalar execution policy: a linear ramp in S/A between the repurchase
// regimes and a linear ramp in normalized W for the stopping probability.
struct BangBangParams {
    double eps_r = 0.0;
    double delta_r = 0.1;
    double eps_p = 0.0;
    double delta_p = 0.5;

    void validate() const;
};

struct PolicyOutput {
    double b_n = 0.0;
    double p_n = 0.0;
    double h_n = 0.0;
};

// Non-trainable scale for the hedging network output,
// (W_Min + W_Max) / (S_0 * (N_Min + N_Max)).
struct HedgeScale {
    double lambda = 0.0;

    static HedgeScale from(const TermSheet& ts, double s0);
};

enum class HedgeMode { none, sequential, joint, capped, constrained };

// Bounds targeting W_Min at maturity (even allocation) and W_Max at the
// first exercise day.
std::pair<double, double> bang_bang_bounds(const ProgramState& state, const TermSheet& ts);

// Linear interpolation between the regimes as a function of S/A, clamped.
double bang_bang_b(const ProgramState& state, const BangBangParams& params,
                   std::pair<double, double> bounds);

// Stopping ramp in W normalized to [-1, 1] over the greenshoe window.
// Returns 0 before the exercise window and 1 at maturity.
double bang_bang_p(double w_n, int day, const TermSheet& ts, const BangBangParams& params);

// Days needed to reach W_Min buying nu_upper shares at the worst-case spot
// projection s_star; d <= 0 maps to 0, nu_upper == 0 to INT_MAX.
struct DaysToWmin {
    int d_n = 0;
    double s_star = 0.0;
};
DaysToWmin days_to_wmin(const ProgramState& state, const TermSheet& ts,
                        const MarketParams& market, double gamma_star);

// Repurchase interval for the network policy. Both ends are clamped into
// [0, (W_Max - W_{n-1})/S_n] so the notional can never exceed W_Max, and
// into [nu_lower, nu_upper] so the daily trading limits always hold.
std::pair<double, double> network_bounds(const ProgramState& state, const TermSheet& ts,
                                         int d_n, double s_star);

// Retrospective mask and forced maturity: p goes to 0 on days whose W lies
// outside the greenshoe window, 1 at maturity; returns the unconditional
// stopping weights, which sum to 1 exactly.
std::vector<double> stopping_postprocess(std::span<const double> p_raw,
                                         std::span<const double> w_path, const TermSheet& ts);

// Cap a proposed hedge position into the feasible turnover interval
// [h_prev - room, h_prev + room] with room = nu_hedge - b_n.
double cap_hedge(double h_star, double h_prev, double b_n, double nu_hedge);

} // namespace asr
