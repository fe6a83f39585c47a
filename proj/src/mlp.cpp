#include "asr/mlp.hpp"

#include "asr/paths.hpp"
#include "asr/rng.hpp"

#include <cmath>
#include <cstring>

namespace asr {

Mlp Mlp::make(const std::vector<int>& widths, ad::Act hidden, ad::Act output) {
    if (widths.size() < 2)
        throw ParameterError("Mlp::make: need at least input and output widths");
    Mlp net;
    for (size_t i = 0; i + 1 < widths.size(); ++i) {
        Layer layer;
        layer.in = widths[i];
        layer.out = widths[i + 1];
        layer.act = (i + 2 == widths.size()) ? output : hidden;
        layer.W.assign(static_cast<size_t>(layer.in) * layer.out, 0.0);
        layer.b.assign(static_cast<size_t>(layer.out), 0.0);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Mlp Mlp::execution_net(int outputs) {
    return make({3, 128, 128, 128, outputs}, ad::Act::Relu, ad::Act::Sigmoid);
}

Mlp Mlp::hedging_net() {
    return make({3, 150, 150, 150, 150, 150, 1}, ad::Act::Relu, ad::Act::None);
}

size_t Mlp::param_count() const {
    size_t n = 0;
    for (const Layer& l : layers)
        n += l.W.size() + l.b.size();
    return n;
}

void Mlp::init_weights(uint64_t seed, bool zero_output) {
    uint64_t counter = 0;
    for (size_t li = 0; li < layers.size(); ++li) {
        Layer& l = layers[li];
        const bool last = li + 1 == layers.size();
        if (last && zero_output) {
            std::fill(l.W.begin(), l.W.end(), 0.0);
            std::fill(l.b.begin(), l.b.end(), 0.0);
            continue;
        }
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
        for (double& w : l.W)
            w = bound * (2.0 * uniform_draw(seed, li, counter++) - 1.0);
        for (double& b : l.b)
            b = bound * (2.0 * uniform_draw(seed, li, counter++) - 1.0);
    }
}

void Mlp::forward(std::span<const double> in, std::span<double> out) const {
    if (static_cast<int>(in.size()) != input_width())
        throw ad::ShapeError("Mlp::forward: input width mismatch");
    if (static_cast<int>(out.size()) != output_width())
        throw ad::ShapeError("Mlp::forward: output width mismatch");
    std::vector<double> cur(in.begin(), in.end());
    std::vector<double> next;
    for (const Layer& l : layers) {
        next.assign(static_cast<size_t>(l.out), 0.0);
        for (int j = 0; j < l.out; ++j) {
            double acc = l.b[j];
            const double* wrow = l.W.data() + static_cast<size_t>(j) * l.in;
            for (int i = 0; i < l.in; ++i)
                acc += wrow[i] * cur[i];
            switch (l.act) {
            case ad::Act::None: break;
            case ad::Act::Relu: acc = acc > 0.0 ? acc : 0.0; break;
            case ad::Act::Sigmoid:
                acc = acc >= 0.0 ? 1.0 / (1.0 + std::exp(-acc))
                                 : std::exp(acc) / (1.0 + std::exp(acc));
                break;
            }
            next[j] = acc;
        }
        cur.swap(next);
    }
    std::memcpy(out.data(), cur.data(), sizeof(double) * cur.size());
}

std::vector<double> Mlp::flatten() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for (const Layer& l : layers) {
        flat.insert(flat.end(), l.W.begin(), l.W.end());
        flat.insert(flat.end(), l.b.begin(), l.b.end());
    }
    return flat;
}

void Mlp::unflatten(std::span<const double> flat) {
    if (flat.size() != param_count())
        throw ad::ShapeError("Mlp::unflatten: size mismatch");
    size_t pos = 0;
    for (Layer& l : layers) {
        std::memcpy(l.W.data(), flat.data() + pos, sizeof(double) * l.W.size());
        pos += l.W.size();
        std::memcpy(l.b.data(), flat.data() + pos, sizeof(double) * l.b.size());
        pos += l.b.size();
    }
}

void MlpGrads::match(const Mlp& net) {
    dW.resize(net.layers.size());
    db.resize(net.layers.size());
    for (size_t i = 0; i < net.layers.size(); ++i) {
        dW[i].assign(net.layers[i].W.size(), 0.0);
        db[i].assign(net.layers[i].b.size(), 0.0);
    }
}

void MlpGrads::zero() {
    for (auto& v : dW) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : db) std::fill(v.begin(), v.end(), 0.0);
}

void MlpGrads::add(const MlpGrads& other) {
    for (size_t i = 0; i < dW.size(); ++i) {
        for (size_t k = 0; k < dW[i].size(); ++k) dW[i][k] += other.dW[i][k];
        for (size_t k = 0; k < db[i].size(); ++k) db[i][k] += other.db[i][k];
    }
}

ad::Var mlp_forward_tape(ad::Tape& tape, const Mlp& net, ad::Var in, MlpGrads* grads) {
    ad::Var cur = in;
    for (size_t li = 0; li < net.layers.size(); ++li) {
        const Mlp::Layer& l = net.layers[li];
        ad::DenseRef ref;
        ref.W = l.W.data();
        ref.b = l.b.data();
        ref.dW = grads ? grads->dW[li].data() : nullptr;
        ref.db = grads ? grads->db[li].data() : nullptr;
        ref.in = l.in;
        ref.out = l.out;
        ref.act = l.act;
        cur = tape.dense(ref, cur);
    }
    return cur;
}

} // namespace asr
