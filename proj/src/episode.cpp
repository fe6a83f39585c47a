#include "asr/episode.hpp"

#include "asr/rng.hpp"

#include <algorithm>
#include <cmath>

namespace asr {

PolicyWiring build_configuration(PolicyKind kind) {
    PolicyWiring w;
    switch (kind) {
    case PolicyKind::bangbang:
        break;
    case PolicyKind::network:
        w = {true, true, BoundsFamily::network, 2, 0, 1};
        break;
    case PolicyKind::configA:
        w = {true, false, BoundsFamily::bangbang, 1, 0, 0};
        break;
    case PolicyKind::configB:
        w = {false, true, BoundsFamily::bangbang, 1, 0, 0};
        break;
    case PolicyKind::configC:
        w = {true, true, BoundsFamily::bangbang, 2, 0, 1};
        break;
    case PolicyKind::configD:
        w = {false, false, BoundsFamily::network, 0, 0, 0};
        break;
    }
    return w;
}

TrainedModel init_model(const ExperimentConfig& cfg) {
    TrainedModel model;
    model.kind = cfg.policy_kind;
    model.hedge_mode = cfg.hedge_mode;
    model.bb.eps_r = cfg.bangbang_init[0];
    model.bb.delta_r = cfg.bangbang_init[1];
    model.bb.eps_p = cfg.bangbang_init[2];
    model.bb.delta_p = cfg.bangbang_init[3];
    const PolicyWiring wiring = build_configuration(cfg.policy_kind);
    if (wiring.net_outputs > 0) {
        model.f_phi = Mlp::execution_net(wiring.net_outputs);
        model.f_phi.init_weights(cfg.seeds.init, /*zero_output=*/true);
    }
    if (cfg.hedge_mode != HedgeMode::none) {
        model.f_theta = Mlp::hedging_net();
        model.f_theta.init_weights(cfg.seeds.init + 1, /*zero_output=*/true);
    }
    model.w = 0.0;
    model.config_hash = cfg.hash();
    return model;
}

EpisodeResult run_episode(std::span<const double> prices, const ExperimentConfig& cfg,
                          const TrainedModel& model) {
    const TermSheet& ts = cfg.termsheet;
    const int n_max = ts.n_max;
    if (static_cast<int>(prices.size()) < n_max + 1)
        throw ParameterError("run_episode: prices need n_max + 1 columns");

    const PolicyWiring wiring = model.wiring();
    const HedgeScale scale = HedgeScale::from(ts, cfg.market.s0);
    const bool hedging = model.hedge_mode != HedgeMode::none;
    const bool cap_in_graph =
        model.hedge_mode == HedgeMode::capped || model.hedge_mode == HedgeMode::constrained;

    EpisodeResult ep;
    ep.b.resize(n_max);
    ep.h.assign(n_max, 0.0);
    ep.p.resize(n_max);
    ep.w.resize(n_max);
    ep.q.resize(n_max);
    ep.a.resize(n_max);
    ep.pnl_asr.resize(n_max);
    ep.pnl_hedge.resize(n_max);
    ep.penalty.resize(n_max);

    ProgramState state;
    state.day = 1;
    state.spot = prices[0];
    state.avg = prices[0];

    double hedge_prefix = 0.0; // sum of h_k * (S_{k+1} - S_k), k < n
    std::vector<double> net_in(3), net_out(std::max(1, wiring.net_outputs));

    for (int n = 1; n <= n_max; ++n) {
        const double spot = state.spot;
        const double ratio = spot / state.avg;

        std::pair<double, double> bounds;
        DaysToWmin dw{};
        if (wiring.bounds == BoundsFamily::network) {
            dw = days_to_wmin(state, ts, cfg.market, cfg.gamma_star);
            bounds = network_bounds(state, ts, dw.d_n, dw.s_star);
        } else {
            bounds = bang_bang_bounds(state, ts);
        }

        bool net_ran = false;
        if (wiring.net_outputs > 0 && (wiring.b_from_net || wiring.p_from_net)) {
            net_in[0] = static_cast<double>(n - ts.n_min) / ts.n_min;
            net_in[1] = ratio;
            net_in[2] = state.w_prev / ts.w_min;
            model.f_phi.forward(net_in, std::span<double>(net_out.data(), wiring.net_outputs));
            net_ran = true;
        }

        double b;
        if (wiring.b_from_net && net_ran) {
            const double b_star = net_out[wiring.b_out_index];
            b = bounds.second + (bounds.first - bounds.second) * b_star;
        } else {
            b = bang_bang_b(state, model.bb, bounds);
        }
        // Hard caps: daily limits, then the W_Max ceiling.
        b = std::clamp(b, ts.nu_lower, ts.nu_upper);
        b = std::clamp(b, 0.0, std::max(0.0, (ts.w_max - state.w_prev) / spot));

        const double w_n = state.w_prev + b * spot;
        const double q_n = state.q_prev + b;

        double p;
        if (n == n_max) {
            p = 1.0;
        } else if (n < ts.n_min) {
            p = 0.0;
        } else if (wiring.p_from_net && net_ran) {
            p = net_out[wiring.p_out_index];
        } else {
            p = bang_bang_p(w_n, n, ts, model.bb);
        }
        // Retrospective mask: no stopping mass outside the notional window.
        if (n < n_max && (w_n < ts.w_min || w_n > ts.w_max))
            p = 0.0;

        ep.b[n - 1] = b;
        ep.w[n - 1] = w_n;
        ep.q[n - 1] = q_n;
        ep.a[n - 1] = state.avg;
        ep.p[n - 1] = p;
        ep.pnl_asr[n - 1] = pnl_asr(state.avg, q_n, w_n, ts.discount);
        ep.pnl_hedge[n - 1] = hedge_prefix;
        ep.penalty[n - 1] = penalty_min(w_n, ts.w_min);

        if (hedging && n < n_max) {
            net_in[0] = static_cast<double>(n - ts.n_min) / ts.n_min;
            net_in[1] = ratio;
            net_in[2] = state.w_prev / ts.w_min;
            double h_out;
            model.f_theta.forward(net_in, std::span<double>(&h_out, 1));
            double h = scale.lambda * h_out;
            if (cap_in_graph && ts.hedge_capped())
                h = cap_hedge(h, state.h_prev, b, ts.nu_hedge);
            ep.h[n - 1] = h;
            hedge_prefix += h * (prices[n] - prices[n - 1]);
            state.h_prev = h;
        }

        if (n < n_max)
            state = step_accumulators(state, b, prices[n]);
    }

    ep.p_tilde = stopping_postprocess(ep.p, ep.w, ts);

    ep.w_window_hit = false;
    for (int n = ts.n_min; n <= n_max; ++n)
        if (ep.w[n - 1] >= ts.w_min && ep.w[n - 1] <= ts.w_max)
            ep.w_window_hit = true;
    ep.penalty_path = ep.w[n_max - 1] < ts.w_min;
    return ep;
}

namespace {

std::vector<EpisodeResult> run_all(const PathSet& paths, const ExperimentConfig& cfg,
                                   const TrainedModel& model, bool parallel) {
    std::vector<EpisodeResult> out(paths.n_paths);
#pragma omp parallel for schedule(static) if (parallel)
    for (int p = 0; p < paths.n_paths; ++p)
        out[p] = run_episode({paths.row(p), static_cast<size_t>(paths.n_cols)}, cfg, model);
    return out;
}

} // namespace

std::vector<EpisodeResult> run_episodes(const PathSet& paths, const ExperimentConfig& cfg,
                                        const TrainedModel& model) {
    return run_all(paths, cfg, model, true);
}

std::vector<EpisodeResult> run_episodes_serial(const PathSet& paths, const ExperimentConfig& cfg,
                                               const TrainedModel& model) {
    return run_all(paths, cfg, model, false);
}

int sample_stop(const EpisodeResult& episode, uint64_t zeta_seed, uint64_t path_index) {
    // p is already zero outside the exercise window and 1 at maturity.
    const int n_days = episode.n_days();
    for (int n = 1; n < n_days; ++n) {
        const double zeta = uniform_draw(zeta_seed, path_index, static_cast<uint64_t>(n));
        if (zeta <= episode.p[n - 1])
            return n;
    }
    return n_days;
}

void realized_stops(std::vector<EpisodeResult>& episodes, uint64_t zeta_seed) {
    for (size_t i = 0; i < episodes.size(); ++i)
        episodes[i].realized_stop = sample_stop(episodes[i], zeta_seed, i);
}

} // namespace asr
