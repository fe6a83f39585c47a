#include "asr/checkpoint.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

using nlohmann::json;

namespace asr {

namespace {

constexpr int kVersion = 1;

json mlp_to_json(const Mlp& net) {
    json layers = json::array();
    for (const Mlp::Layer& l : net.layers) {
        json jl;
        jl["in"] = l.in;
        jl["out"] = l.out;
        jl["act"] = l.act == ad::Act::Relu ? "relu" : (l.act == ad::Act::Sigmoid ? "sigmoid" : "none");
        jl["W"] = l.W;
        jl["b"] = l.b;
        layers.push_back(std::move(jl));
    }
    return layers;
}

Mlp mlp_from_json(const json& layers) {
    Mlp net;
    for (const json& jl : layers) {
        Mlp::Layer l;
        l.in = jl.at("in").get<int>();
        l.out = jl.at("out").get<int>();
        const std::string act = jl.at("act").get<std::string>();
        l.act = act == "relu" ? ad::Act::Relu : (act == "sigmoid" ? ad::Act::Sigmoid : ad::Act::None);
        l.W = jl.at("W").get<std::vector<double>>();
        l.b = jl.at("b").get<std::vector<double>>();
        if (l.W.size() != static_cast<size_t>(l.in) * l.out ||
            l.b.size() != static_cast<size_t>(l.out))
            throw CheckpointError("checkpoint layer shape mismatch");
        net.layers.push_back(std::move(l));
    }
    return net;
}

} // namespace

void save_checkpoint(const TrainedModel& model, const std::string& path) {
    json j;
    j["version"] = kVersion;
    j["policy_kind"] = to_string(model.kind);
    j["hedge_mode"] = to_string(model.hedge_mode);
    j["bangbang"] = {model.bb.eps_r, model.bb.delta_r, model.bb.eps_p, model.bb.delta_p};
    j["w"] = model.w;
    j["config_hash"] = model.config_hash;
    j["improved"] = model.improved;
    if (!model.f_phi.empty())
        j["f_phi"] = mlp_to_json(model.f_phi);
    if (!model.f_theta.empty())
        j["f_theta"] = mlp_to_json(model.f_theta);
    j["adam_m"] = model.adam_m;
    j["adam_v"] = model.adam_v;
    j["adam_steps"] = model.adam_steps;
    json hist = json::array();
    for (const EpochStats& e : model.history)
        hist.push_back({{"epoch", e.epoch},
                        {"train", e.train_objective},
                        {"val", e.val_objective},
                        {"seconds", e.seconds}});
    j["history"] = std::move(hist);

    std::ofstream out(path);
    if (!out)
        throw CheckpointError("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

TrainedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw CheckpointError("cannot open checkpoint: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("checkpoint parse error: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != kVersion)
            throw CheckpointError("unsupported checkpoint version");
        TrainedModel model;
        model.kind = policy_kind_from(j.at("policy_kind").get<std::string>());
        model.hedge_mode = hedge_mode_from(j.at("hedge_mode").get<std::string>());
        const auto bb = j.at("bangbang").get<std::vector<double>>();
        if (bb.size() != 4)
            throw CheckpointError("bad bang-bang vector");
        model.bb = {bb[0], bb[1], bb[2], bb[3]};
        model.w = j.at("w").get<double>();
        model.config_hash = j.at("config_hash").get<uint64_t>();
        model.improved = j.value("improved", true);
        if (j.contains("f_phi"))
            model.f_phi = mlp_from_json(j.at("f_phi"));
        if (j.contains("f_theta"))
            model.f_theta = mlp_from_json(j.at("f_theta"));
        model.adam_m = j.value("adam_m", std::vector<double>{});
        model.adam_v = j.value("adam_v", std::vector<double>{});
        model.adam_steps = j.value("adam_steps", 0L);
        if (j.contains("history"))
            for (const json& e : j.at("history"))
                model.history.push_back({e.at("epoch").get<int>(), e.at("train").get<double>(),
                                         e.at("val").get<double>(), e.at("seconds").get<double>()});
        return model;
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("checkpoint field error: ") + e.what());
    }
}

} // namespace asr
