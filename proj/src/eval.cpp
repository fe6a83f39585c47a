#include "asr/eval.hpp"

#include "asr/risk.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace asr {

namespace {

// Flatten episodes into weighted (value, weight) atoms over (path, day)
// pairs carrying stopping mass. Values are normalized by W_Min.
struct Atoms {
    std::vector<double> value;
    std::vector<double> weight;
    std::vector<double> aq; // A*Q / W_Min per atom, for the discount sweep
};

Atoms collect_atoms(const std::vector<EpisodeResult>& episodes, const TermSheet& ts,
                    bool include_hedge) {
    Atoms atoms;
    const double inv_w = 1.0 / ts.w_min;
    for (const EpisodeResult& ep : episodes) {
        for (int n = ts.n_min; n <= ep.n_days(); ++n) {
            const double q = ep.p_tilde[n - 1];
            if (q == 0.0)
                continue;
            double v = ep.pnl_asr[n - 1];
            if (include_hedge)
                v += ep.pnl_hedge[n - 1];
            atoms.value.push_back(v * inv_w);
            atoms.weight.push_back(q);
            atoms.aq.push_back(ep.a[n - 1] * ep.q[n - 1] * inv_w);
        }
    }
    return atoms;
}

} // namespace

double fair_discount(const std::vector<EpisodeResult>& episodes) {
    double num = 0.0, den = 0.0;
    for (const EpisodeResult& ep : episodes) {
        for (int n = 1; n <= ep.n_days(); ++n) {
            const double q = ep.p_tilde[n - 1];
            if (q == 0.0)
                continue;
            num += q * ep.w[n - 1];
            den += q * ep.a[n - 1] * ep.q[n - 1];
        }
    }
    if (den == 0.0)
        throw EvalError("fair_discount: zero A*Q expectation");
    return 1.0 - num / den;
}

double risk_at_discount(const std::vector<EpisodeResult>& episodes, const TermSheet& ts,
                        const RiskSpec& risk, double delta) {
    const Atoms atoms = collect_atoms(episodes, ts, /*include_hedge=*/true);
    std::vector<double> shifted(atoms.value.size());
    for (size_t i = 0; i < shifted.size(); ++i)
        shifted[i] = atoms.value[i] - delta * atoms.aq[i];
    return minimized_oce(shifted, atoms.weight, risk);
}

IndifferenceResult indifference_discount(const std::vector<EpisodeResult>& episodes,
                                         const TermSheet& ts, const RiskSpec& risk) {
    IndifferenceResult out;
    double lo = 0.0;
    double rho_lo = risk_at_discount(episodes, ts, risk, lo);
    if (rho_lo > 0.0) {
        out.delta = 0.0;
        out.flagged = true;
        return out;
    }
    // rho is nondecreasing in delta (PnL falls pathwise); bracket upward.
    double hi = 0.05;
    double rho_hi = risk_at_discount(episodes, ts, risk, hi);
    while (rho_hi <= 0.0 && hi < 1.0) {
        hi = std::min(1.0, hi * 2.0);
        rho_hi = risk_at_discount(episodes, ts, risk, hi);
    }
    if (rho_hi <= 0.0) {
        out.delta = 1.0;
        out.flagged = true;
        return out;
    }
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (risk_at_discount(episodes, ts, risk, mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    out.delta = 0.5 * (lo + hi);
    return out;
}

MetricsReport compute_metrics(const ExperimentConfig& cfg, const TrainedModel& model,
                              std::vector<EpisodeResult>& episodes) {
    const TermSheet& ts = cfg.termsheet;
    MetricsReport report;

    const Atoms atoms = collect_atoms(episodes, ts, /*include_hedge=*/true);
    RiskSpec es_spec = cfg.risk;
    es_spec.kind = RiskKind::oce_es;
    RiskSpec mv_spec = cfg.risk;
    mv_spec.kind = RiskKind::oce_mv;
    report.es_bps = minimized_oce(atoms.value, atoms.weight, es_spec) * 1e4;
    report.mv_bps = minimized_oce(atoms.value, atoms.weight, mv_spec) * 1e4;

    // OCE value at the checkpoint's w, logged next to the re-minimized one.
    double mass = 0.0, at_w = 0.0;
    for (size_t i = 0; i < atoms.value.size(); ++i) {
        mass += atoms.weight[i];
        at_w += atoms.weight[i] * oce_loss(-model.w - atoms.value[i], cfg.risk);
    }
    report.objective_trained_w = model.w + at_w / mass;
    report.trained_w = model.w;

    report.delta_fair_bps = fair_discount(episodes) * 1e4;
    const IndifferenceResult ind = indifference_discount(episodes, ts, cfg.risk);
    report.delta_ind_bps = ind.delta * 1e4;
    report.ind_flagged = ind.flagged;
    report.gap_bps = report.delta_fair_bps - report.delta_ind_bps;

    double mean_asr = 0.0, mean_total = 0.0;
    long penalty_paths = 0;
    for (const EpisodeResult& ep : episodes) {
        double asr = 0.0, total = 0.0;
        for (int n = ts.n_min; n <= ep.n_days(); ++n) {
            const double q = ep.p_tilde[n - 1];
            if (q == 0.0)
                continue;
            asr += q * ep.pnl_asr[n - 1];
            total += q * (ep.pnl_asr[n - 1] + ep.pnl_hedge[n - 1]);
        }
        mean_asr += asr;
        mean_total += total;
        if (ep.penalty_path)
            ++penalty_paths;
    }
    const double inv = 1.0 / (episodes.size() * ts.w_min);
    report.mean_pnl_asr_bps = mean_asr * inv * 1e4;
    report.mean_pnl_total_bps = mean_total * inv * 1e4;
    report.w_window_violation_rate =
        static_cast<double>(penalty_paths) / static_cast<double>(episodes.size());

    realized_stops(episodes, cfg.seeds.zeta);
    report.stop_counts.assign(ts.n_max, 0);
    for (const EpisodeResult& ep : episodes)
        if (ep.realized_stop >= 1 && ep.realized_stop <= ts.n_max)
            ++report.stop_counts[ep.realized_stop - 1];
    return report;
}

MetricsReport evaluate_model(const ExperimentConfig& cfg, const TrainedModel& model) {
    TrainedModel eval_model = model;
    eval_model.hedge_mode = cfg.hedge_mode;
    const SeedTriple seeds = split_seeds(cfg.seeds.base);
    const PathSet test = simulate_gbm(cfg.market, cfg.eval.test_paths, cfg.termsheet.n_max + 1,
                                      seeds.test, SplitTag::test);
    std::vector<EpisodeResult> episodes = run_episodes(test, cfg, eval_model);
    return compute_metrics(cfg, eval_model, episodes);
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;
    j["es_bps"] = es_bps;
    j["mv_bps"] = mv_bps;
    j["delta_fair_bps"] = delta_fair_bps;
    j["delta_ind_bps"] = delta_ind_bps;
    j["gap_bps"] = gap_bps;
    j["mean_pnl_asr_bps"] = mean_pnl_asr_bps;
    j["mean_pnl_total_bps"] = mean_pnl_total_bps;
    j["w_window_violation_rate"] = w_window_violation_rate;
    j["objective_trained_w"] = objective_trained_w;
    j["trained_w"] = trained_w;
    j["ind_flagged"] = ind_flagged;
    j["stop_counts"] = stop_counts;
    return j.dump(2) + "\n";
}

std::string MetricsReport::csv_header() const {
    return "run_id,es_bps,mv_bps,delta_fair_bps,delta_ind_bps,gap_bps,mean_pnl_asr_bps,"
           "mean_pnl_total_bps,w_window_violation_rate,ind_flagged\n";
}

std::string MetricsReport::csv_row(const std::string& run_id) const {
    std::ostringstream os;
    os.precision(10);
    os << run_id << ',' << es_bps << ',' << mv_bps << ',' << delta_fair_bps << ','
       << delta_ind_bps << ',' << gap_bps << ',' << mean_pnl_asr_bps << ','
       << mean_pnl_total_bps << ',' << w_window_violation_rate << ',' << (ind_flagged ? 1 : 0)
       << '\n';
    return os.str();
}

Histogram make_histogram(std::span<const double> values, int bins) {
    if (bins < 1)
        throw EvalError("make_histogram: bins must be >= 1");
    if (values.empty())
        throw EvalError("make_histogram: empty sample");
    Histogram h;
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi)
        hi = lo + 1.0; // single occupied bin
    h.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i)
        h.edges[i] = lo + (hi - lo) * i / bins;
    h.counts.assign(bins, 0);
    for (double v : values) {
        int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
        idx = std::clamp(idx, 0, bins - 1);
        ++h.counts[idx];
    }
    h.density.resize(bins);
    const double width = (hi - lo) / bins;
    for (int i = 0; i < bins; ++i)
        h.density[i] = static_cast<double>(h.counts[i]) / (values.size() * width);
    return h;
}

void export_histogram(std::span<const double> values, int bins, const std::string& out_path) {
    const Histogram h = make_histogram(values, bins);
    std::FILE* f = std::fopen(out_path.c_str(), "wb");
    if (!f)
        throw EvalError("export_histogram: cannot open " + out_path);
    std::fprintf(f, "bin_lo,bin_hi,count,density\n");
    for (size_t i = 0; i < h.counts.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%ld,%.17g\n", h.edges[i], h.edges[i + 1], h.counts[i],
                     h.density[i]);
    std::fclose(f);
}

std::vector<double> realized_pnl_bps(const std::vector<EpisodeResult>& episodes,
                                     const TermSheet& ts, bool asr_only) {
    std::vector<double> out;
    out.reserve(episodes.size());
    for (const EpisodeResult& ep : episodes) {
        if (ep.realized_stop < 1)
            throw EvalError("realized_pnl_bps: realized stops not sampled");
        const int n = ep.realized_stop;
        double v = ep.pnl_asr[n - 1];
        if (!asr_only)
            v += ep.pnl_hedge[n - 1];
        out.push_back(v / ts.w_min * 1e4);
    }
    return out;
}

void export_episodes_csv(const std::vector<EpisodeResult>& episodes, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f)
        throw EvalError("export_episodes_csv: cannot open " + path);
    std::fprintf(f, "path,day,b,h,p,p_tilde,W,Q,A\n");
    for (size_t pi = 0; pi < episodes.size(); ++pi) {
        const EpisodeResult& ep = episodes[pi];
        for (int n = 1; n <= ep.n_days(); ++n)
            std::fprintf(f, "%zu,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", pi, n,
                         ep.b[n - 1], ep.h[n - 1], ep.p[n - 1], ep.p_tilde[n - 1], ep.w[n - 1],
                         ep.q[n - 1], ep.a[n - 1]);
        std::fprintf(f, "%zu,summary,%.10g,%.10g,%d,%.10g,%.10g,%.10g,%.10g\n", pi,
                     ep.pnl_asr.back(), ep.pnl_hedge.back(), ep.realized_stop,
                     ep.w.back(), ep.q.back(), ep.a.back(),
                     ep.penalty.back());
    }
    std::fclose(f);
}

} // namespace asr
