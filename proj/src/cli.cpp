#include "asr/cli.hpp"

#include "asr/checkpoint.hpp"
#include "asr/config.hpp"
#include "asr/eval.hpp"
#include "asr/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace asr::cli {

namespace {

std::string out_root() {
    const char* env = std::getenv("ASR_OUT_ROOT");
    return env && *env ? std::string(env) : std::string(".");
}

uint64_t file_hash(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return fnv1a_str(ss.str());
}

// Config snapshot, seeds, content hashes of every output, timestamps.
void write_manifest(const fs::path& dir, const ExperimentConfig& cfg,
                    const std::vector<std::string>& files) {
    json j;
    j["config"] = json::parse(serialize_config(cfg));
    j["config_hash"] = cfg.hash();
    j["created_unix"] = std::chrono::duration_cast<std::chrono::seconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count();
    json inv = json::array();
    for (const std::string& f : files) {
        json e;
        e["file"] = f;
        e["bytes"] = static_cast<long>(fs::file_size(dir / f));
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(file_hash(dir / f)));
        e["fnv1a64"] = buf;
        inv.push_back(std::move(e));
    }
    j["outputs"] = std::move(inv);
    std::ofstream out(dir / "manifest.json");
    out << j.dump(2) << "\n";
}

struct CommonOpts {
    std::string config_path;
    std::string out;
    std::vector<std::string> overrides;
    std::optional<uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> policy;
    std::optional<double> nu_hedge;
    std::optional<int> epochs;
    std::optional<int> paths;
    std::optional<double> sigma;
};

void add_common(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--config", o.config_path, "experiment config JSON");
    sub->add_option("--out", o.out, "output file or directory");
    sub->add_option("--set", o.overrides, "dotted-key override, e.g. market.sigma=0.3");
    sub->add_option("--seed", o.seed, "base seed override");
    sub->add_option("--mode", o.mode, "hedge mode: none|sequential|joint|capped|constrained");
    sub->add_option("--policy", o.policy, "policy kind: bangbang|network|configA..D");
    sub->add_option("--nu-hedge", o.nu_hedge, "combined turnover cap override");
    sub->add_option("--epochs", o.epochs, "training epochs override");
    sub->add_option("--paths", o.paths, "path count override");
    sub->add_option("--sigma", o.sigma, "volatility override");
}

ExperimentConfig resolve_config(const CommonOpts& o, bool paths_are_test) {
    ExperimentConfig cfg;
    if (!o.config_path.empty())
        cfg = load_config(o.config_path);
    for (const std::string& kv : o.overrides)
        apply_override(cfg, kv);
    if (o.seed)
        cfg.seeds.base = *o.seed;
    if (o.mode)
        cfg.hedge_mode = hedge_mode_from(*o.mode);
    if (o.policy)
        cfg.policy_kind = policy_kind_from(*o.policy);
    if (o.nu_hedge)
        cfg.termsheet.nu_hedge = *o.nu_hedge;
    if (o.epochs)
        cfg.training.epochs = *o.epochs;
    if (o.paths) {
        if (paths_are_test)
            cfg.eval.test_paths = *o.paths;
        else
            cfg.training.paths_per_epoch = *o.paths;
    }
    if (o.sigma)
        cfg.market.sigma = *o.sigma;
    cfg.validate();
    return cfg;
}

int cmd_simulate(const CommonOpts& o) {
    ExperimentConfig cfg = resolve_config(o, /*paths_are_test=*/true);
    const uint64_t seed = o.seed ? *o.seed : cfg.seeds.base;
    const int n_paths = o.paths ? *o.paths : cfg.eval.test_paths;
    const PathSet ps = simulate_gbm(cfg.market, n_paths, cfg.termsheet.n_max + 1, seed);
    const std::string out = o.out.empty() ? out_root() + "/paths.csv" : o.out;
    save_pathset_csv(ps, out);
    std::fprintf(stderr, "wrote %s (%d paths x %d cols, seed %llu)\n", out.c_str(), ps.n_paths,
                 ps.n_cols, static_cast<unsigned long long>(seed));
    return exit_ok;
}

int write_train_outputs(const fs::path& dir, const ExperimentConfig& cfg,
                        const TrainedModel& model) {
    fs::create_directories(dir);
    save_checkpoint(model, (dir / "checkpoint.json").string());
    save_history_csv(model.history, (dir / "history.csv").string());
    save_config(cfg, (dir / "config.json").string());
    write_manifest(dir, cfg, {"checkpoint.json", "history.csv", "config.json"});
    return exit_ok;
}

int cmd_train(const CommonOpts& o, const std::string& from) {
    ExperimentConfig cfg = resolve_config(o, /*paths_are_test=*/false);
    if (cfg.hedge_mode == HedgeMode::sequential && from.empty()) {
        std::fprintf(stderr, "error: --mode sequential needs --from <checkpoint>\n");
        return exit_missing_artifact;
    }
    std::optional<TrainedModel> start;
    if (!from.empty()) {
        if (!fs::exists(from)) {
            std::fprintf(stderr, "error: checkpoint not found: %s\n", from.c_str());
            return exit_missing_artifact;
        }
        start = load_checkpoint(from);
    }
    const TrainedModel model = train(cfg, start);
    const fs::path dir = o.out.empty() ? fs::path(out_root()) / "train" : fs::path(o.out);
    return write_train_outputs(dir, cfg, model);
}

MetricsReport write_eval_outputs(const fs::path& dir, const ExperimentConfig& cfg,
                                 const TrainedModel& model, bool dump_episodes) {
    fs::create_directories(dir);
    TrainedModel eval_model = model;
    eval_model.hedge_mode = cfg.hedge_mode;
    const SeedTriple seeds = split_seeds(cfg.seeds.base);
    const PathSet test = simulate_gbm(cfg.market, cfg.eval.test_paths, cfg.termsheet.n_max + 1,
                                      seeds.test, SplitTag::test);
    std::vector<EpisodeResult> episodes = run_episodes(test, cfg, eval_model);
    const MetricsReport report = compute_metrics(cfg, eval_model, episodes);

    std::ofstream(dir / "metrics.json") << report.to_json();
    std::ofstream csv(dir / "metrics.csv");
    csv << report.csv_header() << report.csv_row(to_string(cfg.policy_kind) + std::string("-") +
                                                 to_string(cfg.hedge_mode));
    csv.close();

    const std::vector<double> pnl_asr = realized_pnl_bps(episodes, cfg.termsheet, true);
    const std::vector<double> pnl_total = realized_pnl_bps(episodes, cfg.termsheet, false);
    export_histogram(pnl_asr, cfg.eval.bins, (dir / "hist_pnl_asr.csv").string());
    export_histogram(pnl_total, cfg.eval.bins, (dir / "hist_pnl_total.csv").string());

    std::ofstream stops(dir / "stops.csv");
    stops << "day,count\n";
    for (size_t n = 0; n < report.stop_counts.size(); ++n)
        stops << (n + 1) << ',' << report.stop_counts[n] << '\n';
    stops.close();

    std::vector<std::string> files = {"metrics.json", "metrics.csv", "hist_pnl_asr.csv",
                                      "hist_pnl_total.csv", "stops.csv"};
    if (dump_episodes) {
        export_episodes_csv(episodes, (dir / "episodes.csv").string());
        files.push_back("episodes.csv");
    }
    write_manifest(dir, cfg, files);
    return report;
}

int cmd_evaluate(const CommonOpts& o, const std::string& ckpt, bool dump_episodes) {
    ExperimentConfig cfg = resolve_config(o, /*paths_are_test=*/true);
    if (!fs::exists(ckpt)) {
        std::fprintf(stderr, "error: checkpoint not found: %s\n", ckpt.c_str());
        return exit_missing_artifact;
    }
    const TrainedModel model = load_checkpoint(ckpt);
    const fs::path dir = o.out.empty() ? fs::path(out_root()) / "eval" : fs::path(o.out);
    write_eval_outputs(dir, cfg, model, dump_episodes);
    return exit_ok;
}

// The full experiment grid: both policies with every hedging mode, the four
// configurations, and the constrained/capped sweep over nu_hedge.
int cmd_paper_suite(const CommonOpts& o) {
    const ExperimentConfig base = resolve_config(o, /*paths_are_test=*/false);
    const fs::path root = o.out.empty() ? fs::path(out_root()) / "paper_suite" : fs::path(o.out);
    fs::create_directories(root);

    std::ofstream summary(root / "summary.csv");
    summary << MetricsReport().csv_header();

    auto run_one = [&](const std::string& name, ExperimentConfig cfg,
                       const std::optional<TrainedModel>& start) -> TrainedModel {
        std::fprintf(stderr, "[paper-suite] training %s\n", name.c_str());
        TrainedModel model = train(cfg, start);
        write_train_outputs(root / name, cfg, model);
        const MetricsReport report = write_eval_outputs(root / name, cfg, model, false);
        summary << report.csv_row(name);
        summary.flush();
        return model;
    };
    auto eval_only = [&](const std::string& name, ExperimentConfig cfg,
                         const TrainedModel& model) {
        std::fprintf(stderr, "[paper-suite] evaluating %s\n", name.c_str());
        const MetricsReport report = write_eval_outputs(root / name, cfg, model, false);
        summary << report.csv_row(name);
        summary.flush();
    };

    ExperimentConfig cfg = base;

    cfg.policy_kind = PolicyKind::bangbang;
    cfg.hedge_mode = HedgeMode::none;
    const TrainedModel bb_none = run_one("bangbang-none", cfg, std::nullopt);

    cfg.policy_kind = PolicyKind::network;
    const TrainedModel net_none = run_one("network-none", cfg, std::nullopt);

    cfg.policy_kind = PolicyKind::bangbang;
    cfg.hedge_mode = HedgeMode::sequential;
    const TrainedModel bb_seq = run_one("bangbang-sequential", cfg, bb_none);

    cfg.policy_kind = PolicyKind::network;
    const TrainedModel net_seq = run_one("network-sequential", cfg, net_none);

    cfg.policy_kind = PolicyKind::bangbang;
    cfg.hedge_mode = HedgeMode::joint;
    run_one("bangbang-joint", cfg, bb_seq);

    cfg.policy_kind = PolicyKind::network;
    const TrainedModel net_joint = run_one("network-joint", cfg, net_seq);

    for (PolicyKind kind :
         {PolicyKind::configA, PolicyKind::configB, PolicyKind::configC, PolicyKind::configD}) {
        cfg = base;
        cfg.policy_kind = kind;
        cfg.hedge_mode = HedgeMode::none;
        run_one(to_string(kind), cfg, std::nullopt);
    }

    for (double cap : {1.5e6, 2.0e6, 2.5e6}) {
        char name[64];
        std::snprintf(name, sizeof name, "constrained-%.1fM", cap / 1e6);
        cfg = base;
        cfg.policy_kind = PolicyKind::network;
        cfg.hedge_mode = HedgeMode::constrained;
        cfg.termsheet.nu_hedge = cap;
        run_one(name, cfg, net_joint);

        std::snprintf(name, sizeof name, "capped-%.1fM", cap / 1e6);
        cfg.hedge_mode = HedgeMode::capped;
        eval_only(name, cfg, net_joint);
    }

    summary.close();
    std::fprintf(stderr, "[paper-suite] summary at %s\n", (root / "summary.csv").c_str());
    return exit_ok;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Monte-Carlo training and pricing engine for accelerated share repurchases"};
    app.require_subcommand(1);

    CommonOpts sim_o, train_o, eval_o, suite_o;
    std::string from, ckpt;
    bool dump_episodes = false;

    CLI::App* sim = app.add_subcommand("simulate", "write a simulated path set");
    add_common(sim, sim_o);
    CLI::App* tr = app.add_subcommand("train", "train a model, write checkpoint + history");
    add_common(tr, train_o);
    tr->add_option("--from", from, "warm-start / execution checkpoint");
    CLI::App* ev = app.add_subcommand("evaluate", "evaluate a checkpoint on the test set");
    add_common(ev, eval_o);
    ev->add_option("--ckpt", ckpt, "checkpoint to evaluate")->required();
    ev->add_flag("--dump-episodes", dump_episodes, "also write per-day episode CSV");
    CLI::App* suite = app.add_subcommand("paper-suite", "run the full experiment grid");
    add_common(suite, suite_o);

    std::vector<const char*> argv;
    argv.push_back("asr");
    for (const std::string& a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_o);
        if (tr->parsed())
            return cmd_train(train_o, from);
        if (ev->parsed())
            return cmd_evaluate(eval_o, ckpt, dump_episodes);
        if (suite->parsed())
            return cmd_paper_suite(suite_o);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const ParameterError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const CheckpointError& e) {
        std::fprintf(stderr, "artifact error: %s\n", e.what());
        return exit_missing_artifact;
    } catch (const TrainError& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return exit_diverged;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return exit_config;
}

} // namespace asr::cli
