#include "asr/contract.hpp"

#include "asr/paths.hpp"
#include "asr/tape.hpp"

#include <cassert>
#include <cmath>

namespace asr {

void TermSheet::validate() const {
    if (n_min < 1 || n_min > n_max)
        throw ParameterError("TermSheet: need 1 <= n_min <= n_max");
    if (!(w_min >= 0.0 && w_min <= w_max))
        throw ParameterError("TermSheet: need 0 <= w_min <= w_max");
    if (!(nu_lower >= 0.0 && nu_lower <= nu_upper))
        throw ParameterError("TermSheet: need 0 <= nu_lower <= nu_upper");
    if (!(discount >= 0.0 && discount < 1.0))
        throw ParameterError("TermSheet: discount must lie in [0, 1)");
    if (!(nu_hedge >= nu_upper))
        throw ParameterError("TermSheet: nu_hedge must be >= nu_upper");
}

ProgramState step_accumulators(const ProgramState& state, double b_n, double next_spot) {
    assert(b_n >= 0.0);
    ProgramState next;
    next.day = state.day + 1;
    next.spot = next_spot;
    next.q_prev = state.q_prev + b_n;
    next.w_prev = state.w_prev + b_n * state.spot;
    // Incremental running mean over days 1..n.
    next.avg = state.avg + (next_spot - state.avg) / next.day;
    next.h_prev = state.h_prev;
    return next;
}

double pnl_asr(double avg, double q, double w, double discount) {
    return (1.0 - discount) * avg * q - w;
}

double pnl_hedge(std::span<const double> h, std::span<const double> spots, int stop) {
    if (static_cast<int>(spots.size()) < stop + 1)
        throw ad::ShapeError("pnl_hedge: spots shorter than stop+1");
    double acc = 0.0;
    for (int k = 1; k <= stop; ++k) {
        const double hk = k <= static_cast<int>(h.size()) ? h[k - 1] : 0.0;
        acc += hk * (spots[k] - spots[k - 1]);
    }
    return acc;
}

double penalty_min(double w_final, double w_min) {
    const double shortfall = std::max(w_min - w_final, 0.0);
    const double scaled = shortfall / w_min;
    return scaled * scaled;
}

ConstraintReport check_constraints(const EpisodeResult& episode, const TermSheet& ts) {
    ConstraintReport report;
    const int n_days = episode.n_days();
    // Share quantities are ~1e6; tolerate accumulated rounding.
    const double tol_b = 1e-6 * std::max(1.0, ts.nu_upper);
    const double tol_w = 1e-6 * std::max(1.0, ts.w_max);

    double h_prev = 0.0;
    for (int n = 1; n <= n_days; ++n) {
        const double b = episode.b[n - 1];
        if (b < ts.nu_lower - tol_b)
            report.violations.push_back({n, "b below nu_lower", b, ts.nu_lower});
        if (b > ts.nu_upper + tol_b)
            report.violations.push_back({n, "b above nu_upper", b, ts.nu_upper});
        if (ts.hedge_capped() && n < ts.n_max) {
            const double h = episode.h[n - 1];
            const double turnover = b + std::fabs(h - h_prev);
            if (turnover > ts.nu_hedge + tol_b)
                report.violations.push_back({n, "b + |dh| above nu_hedge", turnover, ts.nu_hedge});
        }
        if (n < ts.n_max)
            h_prev = episode.h.empty() ? 0.0 : episode.h[n - 1];

        const double w = episode.w[n - 1];
        if (w > ts.w_max + tol_w)
            report.violations.push_back({n, "W above w_max", w, ts.w_max});
        if (episode.p_tilde[n - 1] > 0.0) {
            const bool in_window = w >= ts.w_min - tol_w && w <= ts.w_max + tol_w;
            const bool forced_maturity = (n == ts.n_max);
            if (!in_window && !forced_maturity)
                report.violations.push_back({n, "stopping mass outside W window", w, ts.w_min});
        }
    }
    return report;
}

} // namespace asr
