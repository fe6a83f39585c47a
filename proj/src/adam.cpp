#include "asr/adam.hpp"

#include <cmath>
#include <string>

namespace asr {

void ParamView::push(std::span<double> p, std::span<const double> g) {
    if (p.size() != g.size())
        throw TrainError("ParamView: param/grad size mismatch");
    params.push_back(p);
    grads.push_back(g);
}

size_t ParamView::total() const {
    size_t n = 0;
    for (const auto& p : params)
        n += p.size();
    return n;
}

void AdamState::init(size_t total, const AdamConfig& c) {
    cfg = c;
    m.assign(total, 0.0);
    v.assign(total, 0.0);
    step_count = 0;
}

void AdamState::step(ParamView& view) {
    if (view.total() != m.size())
        throw TrainError("AdamState: view size changed since init");
    ++step_count;
    const double b1t = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_count));
    const double b2t = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_count));
    size_t k = 0;
    for (size_t a = 0; a < view.params.size(); ++a) {
        std::span<double> p = view.params[a];
        std::span<const double> g = view.grads[a];
        for (size_t i = 0; i < p.size(); ++i, ++k) {
            const double gi = g[i];
            if (!std::isfinite(gi))
                throw TrainError("non-finite gradient at optimizer step " +
                                 std::to_string(step_count));
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gi;
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * gi * gi;
            const double mhat = m[k] / b1t;
            const double vhat = v[k] / b2t;
            p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

} // namespace asr
