#include "asr/rollout.hpp"

#include "asr/rng.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <memory>
#include <omp.h>

namespace asr {

using ad::Tape;
using ad::Var;

TrainableFlags trainables_for(const ExperimentConfig& cfg) {
    TrainableFlags f;
    f.phi = cfg.hedge_mode != HedgeMode::sequential;
    f.theta = cfg.hedge_mode != HedgeMode::none;
    f.w = true;
    return f;
}

void BatchGrads::match(const TrainedModel& model) {
    if (!model.f_phi.empty())
        phi.match(model.f_phi);
    if (!model.f_theta.empty())
        theta.match(model.f_theta);
    bb = {0.0, 0.0, 0.0, 0.0};
    w = 0.0;
}

void BatchGrads::zero() {
    phi.zero();
    theta.zero();
    bb = {0.0, 0.0, 0.0, 0.0};
    w = 0.0;
}

namespace {

// Per-block graph construction state. Lane l of the block is path
// `first + l` of the path set.
struct BlockCtx {
    Tape& tape;
    const PathSet& paths;
    int first;
    int lanes;
    const ExperimentConfig& cfg;
    const TrainedModel& model;
    // gradient sinks; null when frozen or when running forward-only
    MlpGrads* gphi;
    MlpGrads* gtheta;
    double* gbb; // [4]
    double* gw;
    BlockProbe* probe; // optional

    std::vector<double> scratch_a, scratch_b, scratch_c;
    std::vector<uint8_t> mask;

    double price(int lane, int col) const { return paths.at(first + lane, col); }
};

Var build_block(BlockCtx& ctx) {
    Tape& tape = ctx.tape;
    const int L = ctx.lanes;
    const TermSheet& ts = ctx.cfg.termsheet;
    const MarketParams& mkt = ctx.cfg.market;
    const RiskSpec& risk = ctx.cfg.risk;
    const PolicyWiring wiring = ctx.model.wiring();
    const int n_max = ts.n_max;
    const bool hedging = ctx.model.hedged();
    const bool cap_in_graph =
        ctx.model.hedge_mode == HedgeMode::capped || ctx.model.hedge_mode == HedgeMode::constrained;
    const HedgeScale scale = HedgeScale::from(ts, mkt.s0);
    const double sstar_coef = std::exp(-0.5 * mkt.sigma * mkt.sigma * mkt.dt +
                                       normal_icdf(ctx.cfg.gamma_star) * mkt.sigma *
                                           std::sqrt(mkt.dt));
    const bool use_bb = !wiring.b_from_net || !wiring.p_from_net;

    std::vector<double>& s_row = ctx.scratch_a;
    std::vector<double>& tmp = ctx.scratch_b;
    std::vector<double>& avg_row = ctx.scratch_c;
    s_row.resize(L);
    tmp.resize(L);
    avg_row.resize(L);
    ctx.mask.resize(L);

    // Trainable scalars as broadcast leaves.
    Var w_var = tape.param(&ctx.model.w, ctx.gw);
    Var eps_r, delta_r, eps_p, delta_p;
    if (use_bb) {
        eps_r = tape.param(&ctx.model.bb.eps_r, ctx.gbb ? ctx.gbb + 0 : nullptr);
        delta_r = tape.param(&ctx.model.bb.delta_r, ctx.gbb ? ctx.gbb + 1 : nullptr);
        eps_p = tape.param(&ctx.model.bb.eps_p, ctx.gbb ? ctx.gbb + 2 : nullptr);
        delta_p = tape.param(&ctx.model.bb.delta_p, ctx.gbb ? ctx.gbb + 3 : nullptr);
    }

    Var zero = tape.constant(0.0);
    Var one = tape.constant(1.0);
    Var nu_lo = tape.constant(ts.nu_lower);
    Var nu_hi = tape.constant(ts.nu_upper);

    Var W = zero, Q = zero, Hpre = zero, h_prev = zero;
    Var survivor = one;
    Var obj = w_var;

    for (int l = 0; l < L; ++l)
        avg_row[l] = ctx.price(l, 0);

    if (ctx.probe) {
        ctx.probe->lanes = L;
        ctx.probe->n_days = n_max;
        const size_t total = static_cast<size_t>(n_max) * L;
        ctx.probe->b.assign(total, 0.0);
        ctx.probe->h.assign(total, 0.0);
        ctx.probe->w.assign(total, 0.0);
        ctx.probe->q.assign(total, 0.0);
        ctx.probe->p.assign(total, 0.0);
        ctx.probe->p_tilde.assign(total, 0.0);
        ctx.probe->pnl_norm.assign(total, 0.0);
        ctx.probe->penalty.assign(total, 0.0);
        ctx.probe->objective.assign(L, 0.0);
    }

    for (int n = 1; n <= n_max; ++n) {
        for (int l = 0; l < L; ++l)
            s_row[l] = ctx.price(l, n - 1);
        if (n > 1) {
            // Running mean of S_1..S_n per lane (market data, not on tape).
            for (int l = 0; l < L; ++l)
                avg_row[l] += (s_row[l] - avg_row[l]) / n;
        }

        // headroom = W_Max - W_{n-1}; shortfall = W_Min - W_{n-1}
        Var headroom = tape.affine(W, -1.0, ts.w_max);
        Var shortfall = tape.affine(W, -1.0, ts.w_min);
        for (int l = 0; l < L; ++l)
            tmp[l] = 1.0 / s_row[l];
        Var cap_w = tape.relu(tape.mul_lane(headroom, tmp));

        Var lo, hi;
        if (wiring.bounds == BoundsFamily::bangbang) {
            for (int l = 0; l < L; ++l)
                tmp[l] = 1.0 / (s_row[l] * (n_max - n + 1));
            Var even_alloc = tape.mul_lane(shortfall, tmp);
            lo = tape.vmax(tape.vmin(nu_lo, tape.relu(shortfall)), even_alloc);
            for (int l = 0; l < L; ++l)
                tmp[l] = 1.0 / (s_row[l] * std::max(1, ts.n_min - n + 1));
            hi = tape.vmin(nu_hi, tape.mul_lane(headroom, tmp));
        } else {
            // Branch on the days needed to reach W_Min; the branch choice is
            // a detached discrete decision, both sides are built and a mask
            // selects per lane.
            const std::span<const double> w_vals = tape.values(W);
            const int days_left = n_max - n;
            for (int l = 0; l < L; ++l) {
                int d_n = INT_MAX;
                if (ts.nu_upper > 0.0) {
                    const double d_star = (ts.w_min - w_vals[l]) /
                                          (ts.nu_upper * (s_row[l] * sstar_coef));
                    d_n = d_star <= 0.0 ? 0 : static_cast<int>(std::ceil(d_star));
                }
                ctx.mask[l] = d_n < days_left ? 1 : 0;
            }
            if (n == n_max) {
                for (int l = 0; l < L; ++l)
                    tmp[l] = 1.0 / s_row[l];
                lo = tape.vmax(nu_lo, tape.mul_lane(shortfall, tmp));
            } else {
                for (int l = 0; l < L; ++l)
                    tmp[l] = -ts.nu_upper * days_left * (s_row[l] * sstar_coef);
                Var adj_short = tape.add_lane(shortfall, tmp);
                for (int l = 0; l < L; ++l)
                    tmp[l] = 1.0 / s_row[l];
                Var rescue = tape.vmin(nu_hi, tape.mul_lane(adj_short, tmp));
                lo = tape.select(ctx.mask, nu_lo, rescue);
            }
            if (n >= ts.n_min) {
                for (int l = 0; l < L; ++l)
                    tmp[l] = 1.0 / s_row[l];
                hi = tape.vmin(nu_hi, tape.mul_lane(headroom, tmp));
            } else {
                for (int l = 0; l < L; ++l)
                    tmp[l] = 1.0 / (s_row[l] * (ts.n_min - n + 1));
                Var ratio_b = tape.mul_lane(headroom, tmp);
                hi = tape.select(ctx.mask, tape.vmin(nu_hi, ratio_b), tape.vmax(lo, ratio_b));
            }
            lo = tape.vmin(tape.vmax(tape.vmin(tape.vmax(lo, nu_lo), nu_hi), zero), cap_w);
            hi = tape.vmin(tape.vmax(tape.vmin(tape.vmax(hi, nu_lo), nu_hi), zero), cap_w);
        }

        // Network inputs: (time, S/A, W/W_Min) as three consecutive rows so
        // the dense op can consume them as one block. Both nets share them.
        Var net_in;
        bool net_ran = false;
        const bool need_phi = wiring.net_outputs > 0;
        if (need_phi || (hedging && n < n_max)) {
            net_in = tape.constant(static_cast<double>(n - ts.n_min) / ts.n_min);
            for (int l = 0; l < L; ++l)
                tmp[l] = s_row[l] / avg_row[l];
            tape.lane_const(tmp);
            tape.affine(W, 1.0 / ts.w_min, 0.0);
        }
        Var net_head;
        if (need_phi) {
            net_head = mlp_forward_tape(tape, ctx.model.f_phi, net_in, ctx.gphi);
            net_ran = true;
        }

        Var b;
        if (wiring.b_from_net && net_ran) {
            Var b_star = tape.offset(net_head, wiring.b_out_index);
            b = hi + (lo - hi) * b_star;
        } else {
            for (int l = 0; l < L; ++l)
                tmp[l] = s_row[l] / avg_row[l] - 1.0;
            Var ratio_m1 = tape.lane_const(tmp);
            Var arg = ratio_m1 - eps_r + tape.affine(delta_r, 0.5, 0.0);
            Var b_star = hi + ((lo - hi) / delta_r) * arg;
            b = tape.vmin(hi, tape.vmax(lo, b_star));
        }
        b = tape.vmin(tape.vmax(b, nu_lo), nu_hi);
        b = tape.vmin(tape.vmax(b, zero), cap_w);

        Var W_next = W + tape.mul_lane(b, s_row);
        Var Q_next = Q + b;

        // PnL at this candidate stop, normalized by W_Min.
        for (int l = 0; l < L; ++l)
            tmp[l] = (1.0 - ts.discount) * avg_row[l];
        Var pnl = tape.affine(tape.mul_lane(Q_next, tmp) - W_next, 1.0 / ts.w_min, 0.0);
        if (hedging)
            pnl = pnl + tape.affine(Hpre, 1.0 / ts.w_min, 0.0);
        Var penalty = tape.square(tape.affine(tape.relu(tape.affine(W_next, -1.0, ts.w_min)),
                                              1.0 / ts.w_min, 0.0));

        Var p = zero;
        Var p_tilde_row;
        bool has_mass = false;
        if (n >= ts.n_min) {
            if (n < n_max) {
                if (wiring.p_from_net && net_ran) {
                    p = tape.offset(net_head, wiring.p_out_index);
                } else {
                    const double mid = 0.5 * (ts.w_min + ts.w_max);
                    const double half = 0.5 * (ts.w_max - ts.w_min);
                    Var w_star = tape.affine(W_next, 1.0 / half, -mid / half);
                    Var ramp = (w_star - eps_p + tape.affine(delta_p, 0.5, 0.0)) / delta_p;
                    p = tape.vmin(one, tape.vmax(zero, ramp));
                }
                // Retrospective mask, detached: stopping mass only where the
                // notional sits inside the greenshoe window.
                const std::span<const double> wn = tape.values(W_next);
                for (int l = 0; l < L; ++l)
                    tmp[l] = (wn[l] >= ts.w_min && wn[l] <= ts.w_max) ? 1.0 : 0.0;
                p = tape.mul_lane(p, tmp);
                p_tilde_row = survivor * p;
                survivor = survivor - p_tilde_row;
            } else {
                p = one;
                p_tilde_row = survivor;
            }
            has_mass = true;

            Var x = tape.affine(w_var + pnl, -1.0, 0.0); // -w - PnL
            Var loss;
            if (risk.kind == RiskKind::oce_es)
                loss = tape.affine(tape.relu(x), 1.0 / (1.0 - risk.alpha), 0.0);
            else
                loss = x + tape.affine(tape.square(x), 0.5 * risk.gamma, 0.0);
            obj = obj + p_tilde_row * (loss + tape.affine(penalty, ctx.cfg.training.beta_min, 0.0));
        }

        Var h;
        bool has_h = false;
        if (hedging && n < n_max) {
            Var h_head = mlp_forward_tape(tape, ctx.model.f_theta, net_in, ctx.gtheta);
            Var h_star = tape.affine(h_head, scale.lambda, 0.0);
            if (cap_in_graph && ts.hedge_capped()) {
                Var room = tape.affine(b, -1.0, ts.nu_hedge);
                h = tape.vmin(h_prev + room, tape.vmax(h_prev - room, h_star));
            } else {
                h = h_star;
            }
            for (int l = 0; l < L; ++l)
                tmp[l] = ctx.price(l, n) - ctx.price(l, n - 1);
            Hpre = Hpre + tape.mul_lane(h, tmp);
            h_prev = h;
            has_h = true;
        }

        if (ctx.probe) {
            BlockProbe& pr = *ctx.probe;
            const size_t off = static_cast<size_t>(n - 1) * L;
            auto copy_row = [&](std::vector<double>& dst, Var v) {
                const auto vals = tape.values(v);
                std::copy(vals.begin(), vals.end(), dst.begin() + off);
            };
            copy_row(pr.b, b);
            copy_row(pr.w, W_next);
            copy_row(pr.q, Q_next);
            copy_row(pr.pnl_norm, pnl);
            copy_row(pr.penalty, penalty);
            copy_row(pr.p, p);
            if (has_mass)
                copy_row(pr.p_tilde, p_tilde_row);
            if (has_h)
                copy_row(pr.h, h);
        }

        W = W_next;
        Q = Q_next;
    }
    return obj;
}

int block_size_of(const ExperimentConfig& cfg) { return std::max(1, cfg.training.block); }

} // namespace

BatchEval batch_objective_grad(const PathSet& paths, int first, int count,
                               const ExperimentConfig& cfg, const TrainedModel& model,
                               const TrainableFlags& flags, bool parallel) {
    if (first < 0 || count < 1 || first + count > paths.n_paths)
        throw ParameterError("batch_objective_grad: bad path range");
    if (paths.n_cols < cfg.termsheet.n_max + 1)
        throw ParameterError("batch_objective_grad: path set too short for the contract");

    const int bs = block_size_of(cfg);
    const int n_blocks = (count + bs - 1) / bs;
    const bool use_phi_grads = flags.phi && !model.f_phi.empty();
    const bool use_theta_grads = flags.theta && !model.f_theta.empty();
    const PolicyWiring wiring = model.wiring();
    const bool use_bb = !wiring.b_from_net || !wiring.p_from_net;

    struct BlockOut {
        MlpGrads phi, theta;
        std::array<double, 4> bb{0, 0, 0, 0};
        double w = 0.0;
        double obj_sum = 0.0;
    };
    std::vector<BlockOut> blocks(n_blocks);
    for (BlockOut& b : blocks) {
        if (use_phi_grads)
            b.phi.match(model.f_phi);
        if (use_theta_grads)
            b.theta.match(model.f_theta);
    }

    const int max_threads = parallel ? omp_get_max_threads() : 1;
    std::vector<std::unique_ptr<Tape>> tapes(max_threads);

#pragma omp parallel for schedule(dynamic) num_threads(max_threads) if (parallel)
    for (int bi = 0; bi < n_blocks; ++bi) {
        const int tid = omp_get_thread_num();
        const int lane0 = first + bi * bs;
        const int lanes = std::min(bs, first + count - lane0);
        if (!tapes[tid] || tapes[tid]->lanes() != lanes)
            tapes[tid] = std::make_unique<Tape>(lanes);
        Tape& tape = *tapes[tid];
        tape.clear();

        BlockOut& out = blocks[bi];
        BlockCtx ctx{tape,
                     paths,
                     lane0,
                     lanes,
                     cfg,
                     model,
                     use_phi_grads ? &out.phi : nullptr,
                     use_theta_grads ? &out.theta : nullptr,
                     (flags.phi && use_bb) ? out.bb.data() : nullptr,
                     flags.w ? &out.w : nullptr,
                     nullptr,
                     {}, {}, {}, {}};
        Var obj = build_block(ctx);
        out.obj_sum = tape.lane_sum(obj);
        tape.backward(obj, 1.0 / count);
    }

    BatchEval result;
    result.grads.match(model);
    double obj_acc = 0.0;
    for (const BlockOut& b : blocks) {
        obj_acc += b.obj_sum;
        if (use_phi_grads)
            result.grads.phi.add(b.phi);
        if (use_theta_grads)
            result.grads.theta.add(b.theta);
        for (int i = 0; i < 4; ++i)
            result.grads.bb[i] += b.bb[i];
        result.grads.w += b.w;
    }
    result.objective = obj_acc / count;
    return result;
}

double batch_objective(const PathSet& paths, int first, int count, const ExperimentConfig& cfg,
                       const TrainedModel& model, bool parallel) {
    if (first < 0 || count < 1 || first + count > paths.n_paths)
        throw ParameterError("batch_objective: bad path range");
    const int bs = block_size_of(cfg);
    const int n_blocks = (count + bs - 1) / bs;
    std::vector<double> sums(n_blocks, 0.0);

    const int max_threads = parallel ? omp_get_max_threads() : 1;
    std::vector<std::unique_ptr<Tape>> tapes(max_threads);

#pragma omp parallel for schedule(dynamic) num_threads(max_threads) if (parallel)
    for (int bi = 0; bi < n_blocks; ++bi) {
        const int tid = omp_get_thread_num();
        const int lane0 = first + bi * bs;
        const int lanes = std::min(bs, first + count - lane0);
        if (!tapes[tid] || tapes[tid]->lanes() != lanes)
            tapes[tid] = std::make_unique<Tape>(lanes);
        Tape& tape = *tapes[tid];
        tape.clear();
        BlockCtx ctx{tape,   paths, lane0, lanes, cfg, model, nullptr, nullptr,
                     nullptr, nullptr, nullptr, {}, {}, {}, {}};
        Var obj = build_block(ctx);
        sums[bi] = tape.lane_sum(obj);
    }
    double acc = 0.0;
    for (double s : sums)
        acc += s;
    return acc / count;
}

BlockProbe run_block_probe(const PathSet& paths, int first, int lanes,
                           const ExperimentConfig& cfg, const TrainedModel& model) {
    Tape tape(lanes);
    BlockProbe probe;
    BlockCtx ctx{tape,   paths,  first,  lanes, cfg, model, nullptr, nullptr,
                 nullptr, nullptr, &probe, {}, {}, {}, {}};
    Var obj = build_block(ctx);
    const auto vals = tape.values(obj);
    std::copy(vals.begin(), vals.end(), probe.objective.begin());
    return probe;
}

} // namespace asr
