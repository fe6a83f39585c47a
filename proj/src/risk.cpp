#include "asr/risk.hpp"

#include "asr/paths.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace asr {

void RiskSpec::validate() const {
    if (kind == RiskKind::oce_es && !(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("RiskSpec: alpha must lie in (0,1)");
    if (kind == RiskKind::oce_mv && !(gamma >= 0.0))
        throw ParameterError("RiskSpec: gamma must be non-negative");
}

double oce_loss(double x, const RiskSpec& spec) {
    spec.validate();
    switch (spec.kind) {
    case RiskKind::oce_es:
        return std::max(x, 0.0) / (1.0 - spec.alpha);
    case RiskKind::oce_mv:
        return x + 0.5 * spec.gamma * x * x;
    }
    return 0.0;
}

double oce_objective(std::span<const double> pnl, std::span<const double> p_tilde,
                     std::span<const double> penalty, int n_paths, int n_days,
                     const RiskSpec& spec, double beta_min) {
    spec.validate();
    const size_t total = static_cast<size_t>(n_paths) * n_days;
    if (pnl.size() != total || p_tilde.size() != total || penalty.size() != total)
        throw ParameterError("oce_objective: shape mismatch");
    double acc = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        const double* z = pnl.data() + static_cast<size_t>(p) * n_days;
        const double* q = p_tilde.data() + static_cast<size_t>(p) * n_days;
        const double* psi = penalty.data() + static_cast<size_t>(p) * n_days;
        double path_acc = 0.0;
        double mass = 0.0;
        for (int n = 0; n < n_days; ++n) {
            if (q[n] == 0.0)
                continue;
            mass += q[n];
            path_acc += q[n] * (oce_loss(-spec.w - z[n], spec) + beta_min * psi[n]);
        }
        if (std::fabs(mass - 1.0) > 1e-8)
            throw ParameterError("oce_objective: stopping weights do not sum to 1");
        acc += path_acc;
    }
    return spec.w + acc / n_paths;
}

namespace {

// Tail mean over the lowest `tail_mass` of the (value, weight) atoms,
// fractional at the boundary. Weights must be positive.
double lower_tail_mean(std::vector<std::pair<double, double>>& atoms, double tail_mass) {
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double remaining = tail_mass;
    double acc = 0.0;
    for (const auto& [value, weight] : atoms) {
        const double take = std::min(weight, remaining);
        acc += take * value;
        remaining -= take;
        if (remaining <= 0.0)
            break;
    }
    return acc / tail_mass;
}

} // namespace

double weighted_es(std::span<const double> values, std::span<const double> weights,
                   double alpha) {
    if (values.empty() || values.size() != weights.size())
        throw ParameterError("weighted_es: empty or mismatched sample");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("weighted_es: alpha must lie in (0,1)");
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(values.size());
    double mass = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        if (weights[i] < 0.0)
            throw ParameterError("weighted_es: negative weight");
        if (weights[i] == 0.0)
            continue;
        atoms.emplace_back(values[i], weights[i]);
        mass += weights[i];
    }
    if (atoms.empty())
        throw ParameterError("weighted_es: zero total weight");
    return -lower_tail_mean(atoms, (1.0 - alpha) * mass);
}

double empirical_es(std::span<const double> pnl, double alpha) {
    std::vector<double> w(pnl.size(), 1.0);
    return weighted_es(pnl, w, alpha);
}

double minimized_oce(std::span<const double> values, std::span<const double> weights,
                     const RiskSpec& spec) {
    spec.validate();
    if (values.empty() || values.size() != weights.size())
        throw ParameterError("minimized_oce: empty or mismatched sample");
    if (spec.kind == RiskKind::oce_es)
        return weighted_es(values, weights, spec.alpha);
    // Mean-variance: -E[Z] + gamma/2 * Var(Z), population variance.
    double mass = 0.0, mean = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        mass += weights[i];
        mean += weights[i] * values[i];
    }
    if (!(mass > 0.0))
        throw ParameterError("minimized_oce: zero total weight");
    mean /= mass;
    double var = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - mean;
        var += weights[i] * d * d;
    }
    var /= mass;
    return -mean + 0.5 * spec.gamma * var;
}

double minimize_w_golden(std::span<const double> values, std::span<const double> weights,
                         const RiskSpec& spec, double lo, double hi, double tol) {
    double mass = 0.0;
    for (double w : weights)
        mass += w;
    auto objective = [&](double w) {
        double acc = 0.0;
        for (size_t i = 0; i < values.size(); ++i)
            acc += weights[i] * oce_loss(-w - values[i], spec);
        return w + acc / mass;
    };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a);
            f2 = objective(x2);
        }
    }
    return objective(0.5 * (a + b));
}

} // namespace asr
