#include "asr/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace asr {

const char* to_string(PolicyKind k) {
    switch (k) {
    case PolicyKind::bangbang: return "bangbang";
    case PolicyKind::network: return "network";
    case PolicyKind::configA: return "configA";
    case PolicyKind::configB: return "configB";
    case PolicyKind::configC: return "configC";
    case PolicyKind::configD: return "configD";
    }
    return "?";
}

const char* to_string(HedgeMode m) {
    switch (m) {
    case HedgeMode::none: return "none";
    case HedgeMode::sequential: return "sequential";
    case HedgeMode::joint: return "joint";
    case HedgeMode::capped: return "capped";
    case HedgeMode::constrained: return "constrained";
    }
    return "?";
}

const char* to_string(RiskKind k) {
    return k == RiskKind::oce_es ? "oce_es" : "oce_mv";
}

PolicyKind policy_kind_from(const std::string& s) {
    if (s == "bangbang") return PolicyKind::bangbang;
    if (s == "network") return PolicyKind::network;
    if (s == "configA") return PolicyKind::configA;
    if (s == "configB") return PolicyKind::configB;
    if (s == "configC") return PolicyKind::configC;
    if (s == "configD") return PolicyKind::configD;
    throw ConfigError("unknown policy kind: " + s);
}

HedgeMode hedge_mode_from(const std::string& s) {
    if (s == "none") return HedgeMode::none;
    if (s == "sequential") return HedgeMode::sequential;
    if (s == "joint") return HedgeMode::joint;
    if (s == "capped") return HedgeMode::capped;
    if (s == "constrained") return HedgeMode::constrained;
    throw ConfigError("unknown hedge mode: " + s);
}

RiskKind risk_kind_from(const std::string& s) {
    if (s == "oce_es") return RiskKind::oce_es;
    if (s == "oce_mv") return RiskKind::oce_mv;
    throw ConfigError("unknown risk kind: " + s);
}

void ExperimentConfig::validate() const {
    market.validate();
    termsheet.validate();
    risk.validate();
    const bool is_config = policy_kind != PolicyKind::bangbang && policy_kind != PolicyKind::network;
    if (is_config && hedge_mode != HedgeMode::none)
        throw ConfigError("configurations A-D are buyback-only (hedge mode must be none)");
    if (!(gamma_star > 0.0 && gamma_star < 1.0))
        throw ConfigError("gamma_star must lie in (0,1)");
    if (training.batch < 1 || training.paths_per_epoch < 1 || training.epochs < 0)
        throw ConfigError("bad training sizes");
    if (training.block < 1)
        throw ConfigError("training.block must be >= 1");
    if (eval.test_paths < 1 || eval.bins < 1)
        throw ConfigError("bad eval sizes");
}

namespace {

json to_json(const ExperimentConfig& c) {
    json j;
    j["market"] = {{"s0", c.market.s0},
                   {"sigma", c.market.sigma},
                   {"rate", c.market.rate},
                   {"dt", c.market.dt}};
    json ts = {{"n_min", c.termsheet.n_min},     {"n_max", c.termsheet.n_max},
               {"w_min", c.termsheet.w_min},     {"w_max", c.termsheet.w_max},
               {"discount", c.termsheet.discount}, {"nu_lower", c.termsheet.nu_lower},
               {"nu_upper", c.termsheet.nu_upper}};
    if (c.termsheet.hedge_capped())
        ts["nu_hedge"] = c.termsheet.nu_hedge;
    j["termsheet"] = ts;
    j["policy"] = {{"kind", to_string(c.policy_kind)},
                   {"gamma_star", c.gamma_star},
                   {"bangbang_init", c.bangbang_init}};
    j["hedge"] = {{"mode", to_string(c.hedge_mode)}};
    j["risk"] = {{"kind", to_string(c.risk.kind)},
                 {"alpha", c.risk.alpha},
                 {"gamma", c.risk.gamma}};
    j["train"] = {{"beta_min", c.training.beta_min},
                  {"paths_per_epoch", c.training.paths_per_epoch},
                  {"batch", c.training.batch},
                  {"epochs", c.training.epochs},
                  {"val_paths", c.training.val_paths},
                  {"lr", c.training.lr},
                  {"lr_decay", c.training.lr_decay},
                  {"patience", c.training.patience},
                  {"block", c.training.block}};
    j["seeds"] = {{"base", c.seeds.base}, {"init", c.seeds.init}, {"zeta", c.seeds.zeta}};
    j["eval"] = {{"test_paths", c.eval.test_paths}, {"bins", c.eval.bins}};
    return j;
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("market")) {
        const json& m = j.at("market");
        get_if(m, "s0", c.market.s0);
        get_if(m, "sigma", c.market.sigma);
        get_if(m, "rate", c.market.rate);
        get_if(m, "dt", c.market.dt);
    }
    if (j.contains("termsheet")) {
        const json& t = j.at("termsheet");
        get_if(t, "n_min", c.termsheet.n_min);
        get_if(t, "n_max", c.termsheet.n_max);
        get_if(t, "w_min", c.termsheet.w_min);
        get_if(t, "w_max", c.termsheet.w_max);
        get_if(t, "discount", c.termsheet.discount);
        get_if(t, "nu_lower", c.termsheet.nu_lower);
        get_if(t, "nu_upper", c.termsheet.nu_upper);
        get_if(t, "nu_hedge", c.termsheet.nu_hedge);
    }
    if (j.contains("policy")) {
        const json& p = j.at("policy");
        if (p.contains("kind"))
            c.policy_kind = policy_kind_from(p.at("kind").get<std::string>());
        get_if(p, "gamma_star", c.gamma_star);
        get_if(p, "bangbang_init", c.bangbang_init);
    }
    if (j.contains("hedge")) {
        const json& h = j.at("hedge");
        if (h.contains("mode"))
            c.hedge_mode = hedge_mode_from(h.at("mode").get<std::string>());
    }
    if (j.contains("risk")) {
        const json& r = j.at("risk");
        if (r.contains("kind"))
            c.risk.kind = risk_kind_from(r.at("kind").get<std::string>());
        get_if(r, "alpha", c.risk.alpha);
        get_if(r, "gamma", c.risk.gamma);
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        get_if(t, "beta_min", c.training.beta_min);
        get_if(t, "paths_per_epoch", c.training.paths_per_epoch);
        get_if(t, "batch", c.training.batch);
        get_if(t, "epochs", c.training.epochs);
        get_if(t, "val_paths", c.training.val_paths);
        get_if(t, "lr", c.training.lr);
        get_if(t, "lr_decay", c.training.lr_decay);
        get_if(t, "patience", c.training.patience);
        get_if(t, "block", c.training.block);
    }
    if (j.contains("seeds")) {
        const json& s = j.at("seeds");
        get_if(s, "base", c.seeds.base);
        get_if(s, "init", c.seeds.init);
        get_if(s, "zeta", c.seeds.zeta);
    }
    if (j.contains("eval")) {
        const json& e = j.at("eval");
        get_if(e, "test_paths", c.eval.test_paths);
        get_if(e, "bins", c.eval.bins);
    }
    return c;
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c = from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    return to_json(cfg).dump(2) + "\n";
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write config file: " + path);
    out << serialize_config(cfg);
}

uint64_t fnv1a(std::span<const unsigned char> bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t fnv1a_str(const std::string& s) {
    return fnv1a({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
}

uint64_t ExperimentConfig::hash() const {
    return fnv1a_str(serialize_config(*this));
}

void apply_override(ExperimentConfig& cfg, const std::string& key_eq_value) {
    const auto eq = key_eq_value.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like key=value: " + key_eq_value);
    const std::string key = key_eq_value.substr(0, eq);
    const std::string value = key_eq_value.substr(eq + 1);

    json j = json::parse(serialize_config(cfg));
    json* cur = &j;
    size_t pos = 0;
    std::string leaf;
    while (true) {
        const auto dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (dot == std::string::npos) {
            leaf = part;
            break;
        }
        if (!cur->contains(part))
            throw ConfigError("unknown config section: " + part);
        cur = &cur->at(part);
        pos = dot + 1;
    }
    if (!cur->contains(leaf))
        throw ConfigError("unknown config key: " + key);
    json& slot = cur->at(leaf);
    try {
        if (slot.is_string())
            slot = value;
        else if (slot.is_number_integer() || slot.is_number_unsigned())
            slot = json::parse(value); // keeps 64-bit seeds exact
        else if (slot.is_number_float())
            slot = std::stod(value);
        else if (slot.is_array())
            slot = json::parse(value);
        else
            throw ConfigError("cannot override key: " + key);
    } catch (const std::exception&) {
        throw ConfigError("bad value for " + key + ": " + value);
    }
    cfg = parse_config(j.dump());
}

} // namespace asr
