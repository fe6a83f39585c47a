#include "asr/policy.hpp"

#include "asr/rng.hpp"

#include <algorithm>
#include <cassert>
#include <climits>
#include <cmath>

namespace asr {

void BangBangParams::validate() const {
    if (!(delta_r > 0.0))
        throw ParameterError("BangBangParams: delta_r must be positive");
    if (!(delta_p > 0.0))
        throw ParameterError("BangBangParams: delta_p must be positive");
}

HedgeScale HedgeScale::from(const TermSheet& ts, double s0) {
    HedgeScale scale;
    scale.lambda = (ts.w_min + ts.w_max) / (s0 * (ts.n_min + ts.n_max));
    return scale;
}

std::pair<double, double> bang_bang_bounds(const ProgramState& state, const TermSheet& ts) {
    const int n = state.day;
    assert(n >= 1 && n <= ts.n_max);
    const double shortfall = ts.w_min - state.w_prev;
    const double q_min =
        std::max(std::min(ts.nu_lower, std::max(shortfall, 0.0)),
                 shortfall / (state.spot * (ts.n_max - n + 1)));
    const double q_max =
        std::min(ts.nu_upper,
                 (ts.w_max - state.w_prev) / (state.spot * std::max(1, ts.n_min - n + 1)));
    return {q_min, q_max};
}

double bang_bang_b(const ProgramState& state, const BangBangParams& params,
                   std::pair<double, double> bounds) {
    params.validate();
    const auto [q_min, q_max] = bounds;
    const double ratio = state.spot / state.avg;
    const double b_star =
        q_max + (q_min - q_max) / params.delta_r *
                    (ratio - (1.0 + params.eps_r) + 0.5 * params.delta_r);
    return std::min(q_max, std::max(q_min, b_star));
}

double bang_bang_p(double w_n, int day, const TermSheet& ts, const BangBangParams& params) {
    params.validate();
    if (day < ts.n_min)
        return 0.0;
    if (day >= ts.n_max)
        return 1.0;
    const double mid = 0.5 * (ts.w_min + ts.w_max);
    const double half = 0.5 * (ts.w_max - ts.w_min);
    const double w_star = (w_n - mid) / half;
    const double ramp = (w_star - params.eps_p + 0.5 * params.delta_p) / params.delta_p;
    return std::clamp(ramp, 0.0, 1.0);
}

DaysToWmin days_to_wmin(const ProgramState& state, const TermSheet& ts,
                        const MarketParams& market, double gamma_star) {
    if (!(gamma_star > 0.0 && gamma_star < 1.0))
        throw ParameterError("days_to_wmin: gamma_star must lie in (0,1)");
    DaysToWmin out;
    out.s_star = state.spot * std::exp(-0.5 * market.sigma * market.sigma * market.dt +
                                       normal_icdf(gamma_star) * market.sigma *
                                           std::sqrt(market.dt));
    if (!(ts.nu_upper > 0.0)) {
        out.d_n = INT_MAX;
        return out;
    }
    const double d_star = (ts.w_min - state.w_prev) / (ts.nu_upper * out.s_star);
    out.d_n = d_star <= 0.0 ? 0 : static_cast<int>(std::ceil(d_star));
    return out;
}

std::pair<double, double> network_bounds(const ProgramState& state, const TermSheet& ts,
                                         int d_n, double s_star) {
    const int n = state.day;
    assert(n >= 1 && n <= ts.n_max);
    const double spot = state.spot;
    const double w_prev = state.w_prev;
    const int days_left = ts.n_max - n;

    double v_min;
    if (n == ts.n_max) {
        v_min = std::max(ts.nu_lower, (ts.w_min - w_prev) / spot);
    } else if (d_n < days_left) {
        v_min = ts.nu_lower;
    } else {
        v_min = std::min(ts.nu_upper,
                         (ts.w_min - w_prev - ts.nu_upper * days_left * s_star) / spot);
    }

    double v_max;
    if (n >= ts.n_min) {
        v_max = std::min(ts.nu_upper, (ts.w_max - w_prev) / spot);
    } else {
        const double ratio = (ts.w_max - w_prev) / (spot * (ts.n_min - n + 1));
        v_max = d_n < days_left ? std::min(ts.nu_upper, ratio) : std::max(v_min, ratio);
    }

    // Hard limits: daily trading bounds, then the W_Max ceiling.
    const double cap_w = std::max(0.0, (ts.w_max - w_prev) / spot);
    v_min = std::clamp(std::clamp(v_min, ts.nu_lower, ts.nu_upper), 0.0, cap_w);
    v_max = std::clamp(std::clamp(v_max, ts.nu_lower, ts.nu_upper), 0.0, cap_w);
    return {v_min, v_max};
}

std::vector<double> stopping_postprocess(std::span<const double> p_raw,
                                         std::span<const double> w_path, const TermSheet& ts) {
    const int n_days = static_cast<int>(p_raw.size());
    if (static_cast<int>(w_path.size()) != n_days)
        throw ParameterError("stopping_postprocess: p and W length mismatch");
    std::vector<double> p(p_raw.begin(), p_raw.end());
    for (int n = 1; n <= n_days; ++n) {
        if (n < ts.n_min)
            p[n - 1] = 0.0;
        else if (n == ts.n_max || n == n_days)
            p[n - 1] = 1.0;
        else if (w_path[n - 1] < ts.w_min || w_path[n - 1] > ts.w_max)
            p[n - 1] = 0.0;
    }
    // Emit mass day by day; subtracting the emitted mass from the survivor
    // makes the weights telescope to exactly 1 in floating point.
    std::vector<double> p_tilde(n_days, 0.0);
    double survivor = 1.0;
    for (int n = ts.n_min; n <= n_days; ++n) {
        const double mass = n == n_days ? survivor : survivor * p[n - 1];
        p_tilde[n - 1] = mass;
        survivor -= mass;
    }
    return p_tilde;
}

double cap_hedge(double h_star, double h_prev, double b_n, double nu_hedge) {
    const double room = nu_hedge - b_n;
    if (room < 0.0)
        throw ParameterError("cap_hedge: b exceeds nu_hedge, no feasible hedge move");
    return std::min(h_prev + room, std::max(h_prev - room, h_star));
}

} // namespace asr
