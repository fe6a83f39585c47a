#pragma once

#include <span>
#include <vector>

namespace asr {

enum class RiskKind { oce_es, oce_mv };

struct RiskSpec {
    RiskKind kind = RiskKind::oce_es;
    double alpha = 0.75; // ES confidence level
    double gamma = 2.5e2; // MV risk aversion
    double w = 0.0;       // trainable translation scalar, normalized-PnL scale

    void validate() const;
};

// Loss applied to x = -w - PnL: hinge/(1-alpha) for expected shortfall,
// x + gamma*x^2/2 for mean-variance.
double oce_loss(double x, const RiskSpec& spec);

// w + mean over paths of sum_n p_tilde_n * (l(-w - pnl_n) + beta_min * penalty_n).
// pnl/p_tilde/penalty are [n_paths x n_days] row-major, aligned on the full
// day grid.
double oce_objective(std::span<const double> pnl, std::span<const double> p_tilde,
                     std::span<const double> penalty, int n_paths, int n_days,
                     const RiskSpec& spec, double beta_min);

// Negative mean of the worst (1-alpha) fraction of the sample, with the
// boundary atom fractionally weighted so the value is exact for every N.
// Loss convention: negative values mean profit.
double empirical_es(std::span<const double> pnl, double alpha);

// Same quantile computation on a weighted sample; weights need not be
// normalized.
double weighted_es(std::span<const double> values, std::span<const double> weights, double alpha);

// min over w of the OCE objective for a weighted sample, computed exactly:
// ES for the hinge loss, -mean + gamma*Var/2 for mean-variance (population
// variance).
double minimized_oce(std::span<const double> values, std::span<const double> weights,
                     const RiskSpec& spec);

// Golden-section 1-D minimization of w |-> w + sum_i q_i * l(-w - z_i),
// used as an independent check of the trained/exact values.
double minimize_w_golden(std::span<const double> values, std::span<const double> weights,
                         const RiskSpec& spec, double lo, double hi, double tol);

} // namespace asr
