#pragma once

#include "asr/contract.hpp"
#include "asr/paths.hpp"
#include "asr/policy.hpp"
#include "asr/risk.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace asr {

enum class PolicyKind { bangbang, network, configA, configB, configC, configD };

const char* to_string(PolicyKind k);
const char* to_string(HedgeMode m);
const char* to_string(RiskKind k);
PolicyKind policy_kind_from(const std::string& s);
HedgeMode hedge_mode_from(const std::string& s);
RiskKind risk_kind_from(const std::string& s);

struct TrainingParams {
    double beta_min = 500.0;
    int paths_per_epoch = 16384;
    int batch = 512;
    int epochs = 16;
    int val_paths = 4096;
    double lr = 1e-3;
    double lr_decay = 0.5;  // applied on validation plateau
    int patience = 3;       // epochs without improvement before decay
    int block = 32;         // lanes per tape block; fixed so reductions are
                            // independent of thread count
};

struct SeedsConfig {
    uint64_t base = 20250101;
    uint64_t init = 7;  // network weight initialization
    uint64_t zeta = 99; // realized stopping draws
};

struct EvalConfig {
    int test_paths = 3000;
    int bins = 60;
};

struct ExperimentConfig {
    MarketParams market;
    TermSheet termsheet;
    PolicyKind policy_kind = PolicyKind::network;
    HedgeMode hedge_mode = HedgeMode::none;
    double gamma_star = 0.05;
    std::array<double, 4> bangbang_init = {0.0, 0.1, 0.0, 0.5};
    RiskSpec risk;
    TrainingParams training;
    SeedsConfig seeds;
    EvalConfig eval;

    void validate() const;
    // FNV-1a over the canonical serialized form.
    uint64_t hash() const;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::string& path);

// Apply a dotted-path override such as "market.sigma=0.3" or
// "policy.kind=configA". Unknown keys raise ConfigError.
void apply_override(ExperimentConfig& cfg, const std::string& key_eq_value);

// FNV-1a 64-bit over raw bytes; used for config and output-file hashes.
uint64_t fnv1a(std::span<const unsigned char> bytes);
uint64_t fnv1a_str(const std::string& s);

} // namespace asr
