#include "asr/train.hpp"

#include "asr/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace asr {

namespace {

// Fixed parameter order: f_phi layers, bang-bang scalars, f_theta layers, w.
// The Adam moment vectors are indexed by this order, so it must not change
// between steps or across checkpoint resume.
ParamView make_view(TrainedModel& model, BatchGrads& grads, const TrainableFlags& flags) {
    const PolicyWiring wiring = model.wiring();
    const bool use_bb = !wiring.b_from_net || !wiring.p_from_net;
    ParamView view;
    if (flags.phi && !model.f_phi.empty()) {
        for (size_t li = 0; li < model.f_phi.layers.size(); ++li) {
            auto& l = model.f_phi.layers[li];
            view.push({l.W.data(), l.W.size()}, {grads.phi.dW[li].data(), grads.phi.dW[li].size()});
            view.push({l.b.data(), l.b.size()}, {grads.phi.db[li].data(), grads.phi.db[li].size()});
        }
    }
    if (flags.phi && use_bb) {
        view.push({&model.bb.eps_r, 1}, {&grads.bb[0], 1});
        view.push({&model.bb.delta_r, 1}, {&grads.bb[1], 1});
        view.push({&model.bb.eps_p, 1}, {&grads.bb[2], 1});
        view.push({&model.bb.delta_p, 1}, {&grads.bb[3], 1});
    }
    if (flags.theta && !model.f_theta.empty()) {
        for (size_t li = 0; li < model.f_theta.layers.size(); ++li) {
            auto& l = model.f_theta.layers[li];
            view.push({l.W.data(), l.W.size()},
                      {grads.theta.dW[li].data(), grads.theta.dW[li].size()});
            view.push({l.b.data(), l.b.size()},
                      {grads.theta.db[li].data(), grads.theta.db[li].size()});
        }
    }
    if (flags.w)
        view.push({&model.w, 1}, {&grads.w, 1});
    return view;
}

struct ParamSnapshot {
    BangBangParams bb;
    std::vector<double> phi, theta;
    double w = 0.0;
};

ParamSnapshot snapshot(const TrainedModel& model) {
    ParamSnapshot s;
    s.bb = model.bb;
    if (!model.f_phi.empty())
        s.phi = model.f_phi.flatten();
    if (!model.f_theta.empty())
        s.theta = model.f_theta.flatten();
    s.w = model.w;
    return s;
}

void restore(TrainedModel& model, const ParamSnapshot& s) {
    model.bb = s.bb;
    if (!model.f_phi.empty())
        model.f_phi.unflatten(s.phi);
    if (!model.f_theta.empty())
        model.f_theta.unflatten(s.theta);
    model.w = s.w;
}

} // namespace

TrainedModel train(const ExperimentConfig& cfg, const std::optional<TrainedModel>& start) {
    cfg.validate();
    if (cfg.hedge_mode == HedgeMode::sequential && !start.has_value())
        throw TrainError("sequential hedging needs a trained execution checkpoint");
    if (cfg.hedge_mode == HedgeMode::capped)
        throw TrainError("capped is an evaluation wrapper, not a training mode");

    TrainedModel model;
    if (start.has_value()) {
        model = *start;
        if (model.kind != cfg.policy_kind)
            throw TrainError("checkpoint policy kind does not match the config");
        model.hedge_mode = cfg.hedge_mode;
        model.history.clear();
        if (model.hedged() && model.f_theta.empty()) {
            model.f_theta = Mlp::hedging_net();
            model.f_theta.init_weights(cfg.seeds.init + 1, /*zero_output=*/true);
        }
    } else {
        model = init_model(cfg);
    }
    model.config_hash = cfg.hash();
    model.improved = true;

    const TrainableFlags flags = trainables_for(cfg);
    BatchGrads grads;
    grads.match(model);
    ParamView view = make_view(model, grads, flags);

    AdamConfig adam_cfg;
    adam_cfg.lr = cfg.training.lr;
    AdamState adam;
    adam.init(view.total(), adam_cfg);
    model.adam_m.assign(view.total(), 0.0);
    model.adam_v.assign(view.total(), 0.0);
    model.adam_steps = 0;

    if (cfg.training.epochs == 0)
        return model;

    const SeedTriple seeds = split_seeds(cfg.seeds.base);
    const int n_cols = cfg.termsheet.n_max + 1;
    const PathSet val_set =
        simulate_gbm(cfg.market, cfg.training.val_paths, n_cols, seeds.validation,
                     SplitTag::validation);

    double best_val = batch_objective(val_set, 0, val_set.n_paths, cfg, model, true);
    ParamSnapshot best = snapshot(model);
    int best_epoch = 0;
    int stale_epochs = 0;

    const int batch = std::min(cfg.training.batch, cfg.training.paths_per_epoch);
    const int batches_per_epoch = std::max(1, cfg.training.paths_per_epoch / batch);

    for (int epoch = 1; epoch <= cfg.training.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const uint64_t epoch_seed = rng::counter_hash(seeds.train, static_cast<uint64_t>(epoch), 0);
        const PathSet train_set =
            simulate_gbm(cfg.market, batches_per_epoch * batch, n_cols, epoch_seed,
                         SplitTag::train);

        double epoch_obj = 0.0;
        for (int bi = 0; bi < batches_per_epoch; ++bi) {
            BatchEval eval =
                batch_objective_grad(train_set, bi * batch, batch, cfg, model, flags, true);
            if (!std::isfinite(eval.objective))
                throw TrainError("training diverged: objective is not finite at epoch " +
                                 std::to_string(epoch));
            epoch_obj += eval.objective;
            grads = std::move(eval.grads);
            view = make_view(model, grads, flags);
            adam.step(view);
            // Ramp widths must stay positive; the optimizer is free to push
            // them toward zero where the policy saturates.
            model.bb.delta_r = std::max(model.bb.delta_r, 1e-3);
            model.bb.delta_p = std::max(model.bb.delta_p, 1e-3);
        }
        epoch_obj /= batches_per_epoch;

        const double val_obj = batch_objective(val_set, 0, val_set.n_paths, cfg, model, true);
        const auto t1 = std::chrono::steady_clock::now();
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_objective = epoch_obj;
        stats.val_objective = val_obj;
        stats.seconds = std::chrono::duration<double>(t1 - t0).count();
        model.history.push_back(stats);

        if (val_obj < best_val) {
            best_val = val_obj;
            best = snapshot(model);
            best_epoch = epoch;
            stale_epochs = 0;
        } else if (++stale_epochs >= cfg.training.patience) {
            adam.cfg.lr *= cfg.training.lr_decay;
            stale_epochs = 0;
        }
    }

    restore(model, best);
    model.improved = best_epoch > 0;
    model.adam_m = adam.m;
    model.adam_v = adam.v;
    model.adam_steps = adam.step_count;
    return model;
}

void save_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f)
        throw TrainError("cannot write history: " + path);
    std::fprintf(f, "epoch,train_objective,val_objective,seconds\n");
    for (const EpochStats& e : history)
        std::fprintf(f, "%d,%.17g,%.17g,%.3f\n", e.epoch, e.train_objective, e.val_objective,
                     e.seconds);
    std::fclose(f);
}

} // namespace asr
