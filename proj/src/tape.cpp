#include "asr/tape.hpp"

#include <cmath>
#include <cstring>

namespace asr::ad {

Tape::Tape(int lanes) : lanes_(lanes) {
    if (lanes < 1)
        throw ShapeError("Tape: lanes must be >= 1");
}

void Tape::clear() {
    nodes_.clear();
    vals_.clear();
    adj_.clear();
    aux_.clear();
    masks_.clear();
    dense_.clear();
    params_.clear();
}

int Tape::push(Node n) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    vals_.resize(vals_.size() + lanes_);
    eval(id);
    return id;
}

void Tape::check(Var v) const {
    if (v.tape != this || v.id < 0 || v.id >= size())
        throw UsageError("Tape: foreign or invalid Var");
}

Var Tape::constant(double c) {
    Node n{Op::Const};
    n.s0 = c;
    return Var{this, push(n)};
}

Var Tape::lane_const(std::span<const double> values) {
    if (static_cast<int>(values.size()) != lanes_)
        throw ShapeError("lane_const: size != lanes");
    Node n{Op::LaneConst};
    n.aux = static_cast<int>(aux_.size());
    aux_.insert(aux_.end(), values.begin(), values.end());
    return Var{this, push(n)};
}

Var Tape::param(const double* value, double* grad) {
    Node n{Op::Param};
    n.aux = static_cast<int>(params_.size());
    params_.push_back(ParamSlot{value, grad});
    return Var{this, push(n)};
}

Var Tape::unary(Op op, Var a, double s0, double s1) {
    check(a);
    Node n{op};
    n.a = a.id;
    n.s0 = s0;
    n.s1 = s1;
    return Var{this, push(n)};
}

Var Tape::binary(Op op, Var a, Var b) {
    check(a);
    check(b);
    Node n{op};
    n.a = a.id;
    n.b = b.id;
    return Var{this, push(n)};
}

Var Tape::add(Var a, Var b) { return binary(Op::Add, a, b); }
Var Tape::sub(Var a, Var b) { return binary(Op::Sub, a, b); }
Var Tape::mul(Var a, Var b) { return binary(Op::Mul, a, b); }
Var Tape::div(Var a, Var b) { return binary(Op::Div, a, b); }
Var Tape::vmin(Var a, Var b) { return binary(Op::Min, a, b); }
Var Tape::vmax(Var a, Var b) { return binary(Op::Max, a, b); }
Var Tape::affine(Var a, double scale, double shift) { return unary(Op::Affine, a, scale, shift); }
Var Tape::relu(Var a) { return unary(Op::Relu, a); }
Var Tape::sigmoid(Var a) { return unary(Op::Sigmoid, a); }
Var Tape::vexp(Var a) { return unary(Op::Exp, a); }
Var Tape::vlog(Var a) { return unary(Op::Log, a); }
Var Tape::vsqrt(Var a) { return unary(Op::Sqrt, a); }
Var Tape::square(Var a) { return unary(Op::Square, a); }

Var Tape::add_lane(Var a, std::span<const double> c) {
    check(a);
    if (static_cast<int>(c.size()) != lanes_)
        throw ShapeError("add_lane: size != lanes");
    Node n{Op::AddLane};
    n.a = a.id;
    n.aux = static_cast<int>(aux_.size());
    aux_.insert(aux_.end(), c.begin(), c.end());
    return Var{this, push(n)};
}

Var Tape::mul_lane(Var a, std::span<const double> c) {
    check(a);
    if (static_cast<int>(c.size()) != lanes_)
        throw ShapeError("mul_lane: size != lanes");
    Node n{Op::MulLane};
    n.a = a.id;
    n.aux = static_cast<int>(aux_.size());
    aux_.insert(aux_.end(), c.begin(), c.end());
    return Var{this, push(n)};
}

Var Tape::select(std::span<const uint8_t> mask, Var a, Var b) {
    check(a);
    check(b);
    if (static_cast<int>(mask.size()) != lanes_)
        throw ShapeError("select: mask size != lanes");
    Node n{Op::Select};
    n.a = a.id;
    n.b = b.id;
    n.aux = static_cast<int>(masks_.size());
    masks_.insert(masks_.end(), mask.begin(), mask.end());
    return Var{this, push(n)};
}

Var Tape::dense(const DenseRef& ref, Var first) {
    check(first);
    if (ref.in < 1 || ref.out < 1)
        throw ShapeError("dense: bad layer dims");
    if (first.id + ref.in > size())
        throw ShapeError("dense: inputs not on tape");
    // Reserve the whole output block before evaluating: the head writes all
    // `out` rows in one pass.
    Node head{Op::Dense};
    head.a = first.id;
    head.b = ref.in;
    head.aux = static_cast<int>(dense_.size());
    dense_.push_back(ref);
    const int head_id = static_cast<int>(nodes_.size());
    nodes_.push_back(head);
    for (int j = 1; j < ref.out; ++j) {
        Node cont{Op::DenseCont};
        cont.a = head_id;
        nodes_.push_back(cont);
    }
    vals_.resize(vals_.size() + static_cast<size_t>(ref.out) * lanes_);
    eval(head_id);
    return Var{this, head_id};
}

Var Tape::offset(Var head, int i) const {
    check(head);
    return Var{head.tape, head.id + i};
}

std::span<const double> Tape::values(Var v) const {
    check(v);
    return {val(v.id), static_cast<size_t>(lanes_)};
}

double Tape::lane_sum(Var v) const {
    check(v);
    const double* x = val(v.id);
    double s = 0.0;
    for (int l = 0; l < lanes_; ++l)
        s += x[l];
    return s;
}

void Tape::eval(int id) {
    const Node& n = nodes_[id];
    const int L = lanes_;
    double* out = val(id);
    switch (n.op) {
    case Op::Const:
        for (int l = 0; l < L; ++l) out[l] = n.s0;
        break;
    case Op::LaneConst: {
        const double* c = aux_.data() + n.aux;
        std::memcpy(out, c, sizeof(double) * L);
        break;
    }
    case Op::Param: {
        const double p = *params_[n.aux].value;
        for (int l = 0; l < L; ++l) out[l] = p;
        break;
    }
    case Op::Add: {
        const double *a = val(n.a), *b = val(n.b);
        for (int l = 0; l < L; ++l) out[l] = a[l] + b[l];
        break;
    }
    case Op::Sub: {
        const double *a = val(n.a), *b = val(n.b);
        for (int l = 0; l < L; ++l) out[l] = a[l] - b[l];
        break;
    }
    case Op::Mul: {
        const double *a = val(n.a), *b = val(n.b);
        for (int l = 0; l < L; ++l) out[l] = a[l] * b[l];
        break;
    }
    case Op::Div: {
        const double *a = val(n.a), *b = val(n.b);
        for (int l = 0; l < L; ++l) out[l] = a[l] / b[l];
        break;
    }
    case Op::Affine: {
        const double* a = val(n.a);
        for (int l = 0; l < L; ++l) out[l] = n.s0 * a[l] + n.s1;
        break;
    }
    case Op::AddLane: {
        const double* a = val(n.a);
        const double* c = aux_.data() + n.aux;
        for (int l = 0; l < L; ++l) out[l] = a[l] + c[l];
        break;
    }
    case Op::MulLane: {
        const double* a = val(n.a);
        const double* c = aux_.data() + n.aux;
        for (int l = 0; l < L; ++l) out[l] = a[l] * c[l];
        break;
    }
    case Op::Min: {
        const double *a = val(n.a), *b = val(n.b);
        for (int l = 0; l < L; ++l) out[l] = a[l] <= b[l] ? a[l] : b[l];
        break;
    }
    case Op::Max: {
        const double *a = val(n.a), *b = val(n.b);
        for (int l = 0; l < L; ++l) out[l] = a[l] >= b[l] ? a[l] : b[l];
        break;
    }
    case Op::Relu: {
        const double* a = val(n.a);
        for (int l = 0; l < L; ++l) out[l] = a[l] > 0.0 ? a[l] : 0.0;
        break;
    }
    case Op::Sigmoid: {
        const double* a = val(n.a);
        for (int l = 0; l < L; ++l) {
            const double x = a[l];
            out[l] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                              : std::exp(x) / (1.0 + std::exp(x));
        }
        break;
    }
    case Op::Exp: {
        const double* a = val(n.a);
        for (int l = 0; l < L; ++l) out[l] = std::exp(a[l]);
        break;
    }
    case Op::Log: {
        const double* a = val(n.a);
        for (int l = 0; l < L; ++l) out[l] = std::log(a[l]);
        break;
    }
    case Op::Sqrt: {
        const double* a = val(n.a);
        for (int l = 0; l < L; ++l) out[l] = std::sqrt(a[l]);
        break;
    }
    case Op::Square: {
        const double* a = val(n.a);
        for (int l = 0; l < L; ++l) out[l] = a[l] * a[l];
        break;
    }
    case Op::Select: {
        const double *a = val(n.a), *b = val(n.b);
        const uint8_t* m = masks_.data() + n.aux;
        for (int l = 0; l < L; ++l) out[l] = m[l] ? a[l] : b[l];
        break;
    }
    case Op::Dense: {
        const DenseRef& ref = dense_[n.aux];
        const double* x0 = val(n.a);
        // out points at row 0 of the block; rows are contiguous.
        for (int j = 0; j < ref.out; ++j) {
            double* oj = out + static_cast<size_t>(j) * L;
            const double bj = ref.b[j];
            for (int l = 0; l < L; ++l) oj[l] = bj;
            const double* wrow = ref.W + static_cast<size_t>(j) * ref.in;
            for (int i = 0; i < ref.in; ++i) {
                const double w = wrow[i];
                const double* xi = x0 + static_cast<size_t>(i) * L;
                for (int l = 0; l < L; ++l) oj[l] += w * xi[l];
            }
            switch (ref.act) {
            case Act::None: break;
            case Act::Relu:
                for (int l = 0; l < L; ++l) oj[l] = oj[l] > 0.0 ? oj[l] : 0.0;
                break;
            case Act::Sigmoid:
                for (int l = 0; l < L; ++l) {
                    const double x = oj[l];
                    oj[l] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                     : std::exp(x) / (1.0 + std::exp(x));
                }
                break;
            }
        }
        break;
    }
    case Op::DenseCont:
        // Value written by the head's eval.
        break;
    }
}

void Tape::backward(Var v, double seed) {
    std::vector<double> seeds(static_cast<size_t>(lanes_), seed);
    backward(v, seeds);
}

void Tape::backward(Var v, std::span<const double> lane_seeds) {
    check(v);
    if (static_cast<int>(lane_seeds.size()) != lanes_)
        throw ShapeError("backward: seed size != lanes");
    if (nodes_.empty())
        throw UsageError("backward called on an empty tape");
    adj_.assign(vals_.size(), 0.0);
    std::memcpy(adj(v.id), lane_seeds.data(), sizeof(double) * lanes_);
    const int L = lanes_;
    std::vector<double> gpre_buf(static_cast<size_t>(L));
    double* const gpre = gpre_buf.data();

    for (int id = size() - 1; id >= 0; --id) {
        const Node& n = nodes_[id];
        const double* g = adj(id);
        switch (n.op) {
        case Op::Const:
        case Op::LaneConst:
        case Op::DenseCont:
            break;
        case Op::Param: {
            double* slot = params_[n.aux].grad;
            if (slot) {
                double s = 0.0;
                for (int l = 0; l < L; ++l) s += g[l];
                *slot += s;
            }
            break;
        }
        case Op::Add: {
            double *da = adj(n.a), *db = adj(n.b);
            for (int l = 0; l < L; ++l) { da[l] += g[l]; db[l] += g[l]; }
            break;
        }
        case Op::Sub: {
            double *da = adj(n.a), *db = adj(n.b);
            for (int l = 0; l < L; ++l) { da[l] += g[l]; db[l] -= g[l]; }
            break;
        }
        case Op::Mul: {
            const double *a = val(n.a), *b = val(n.b);
            double *da = adj(n.a), *db = adj(n.b);
            for (int l = 0; l < L; ++l) { da[l] += g[l] * b[l]; db[l] += g[l] * a[l]; }
            break;
        }
        case Op::Div: {
            const double *a = val(n.a), *b = val(n.b);
            double *da = adj(n.a), *db = adj(n.b);
            for (int l = 0; l < L; ++l) {
                da[l] += g[l] / b[l];
                db[l] -= g[l] * a[l] / (b[l] * b[l]);
            }
            break;
        }
        case Op::Affine: {
            double* da = adj(n.a);
            for (int l = 0; l < L; ++l) da[l] += n.s0 * g[l];
            break;
        }
        case Op::AddLane: {
            double* da = adj(n.a);
            for (int l = 0; l < L; ++l) da[l] += g[l];
            break;
        }
        case Op::MulLane: {
            const double* c = aux_.data() + n.aux;
            double* da = adj(n.a);
            for (int l = 0; l < L; ++l) da[l] += c[l] * g[l];
            break;
        }
        case Op::Min: {
            const double *a = val(n.a), *b = val(n.b);
            double *da = adj(n.a), *db = adj(n.b);
            for (int l = 0; l < L; ++l) {
                if (a[l] <= b[l]) da[l] += g[l]; else db[l] += g[l];
            }
            break;
        }
        case Op::Max: {
            const double *a = val(n.a), *b = val(n.b);
            double *da = adj(n.a), *db = adj(n.b);
            for (int l = 0; l < L; ++l) {
                if (a[l] >= b[l]) da[l] += g[l]; else db[l] += g[l];
            }
            break;
        }
        case Op::Relu: {
            const double* a = val(n.a);
            double* da = adj(n.a);
            for (int l = 0; l < L; ++l)
                if (a[l] > 0.0) da[l] += g[l];
            break;
        }
        case Op::Sigmoid: {
            const double* y = val(id);
            double* da = adj(n.a);
            for (int l = 0; l < L; ++l) da[l] += y[l] * (1.0 - y[l]) * g[l];
            break;
        }
        case Op::Exp: {
            const double* y = val(id);
            double* da = adj(n.a);
            for (int l = 0; l < L; ++l) da[l] += y[l] * g[l];
            break;
        }
        case Op::Log: {
            const double* a = val(n.a);
            double* da = adj(n.a);
            for (int l = 0; l < L; ++l) da[l] += g[l] / a[l];
            break;
        }
        case Op::Sqrt: {
            const double* y = val(id);
            double* da = adj(n.a);
            for (int l = 0; l < L; ++l) da[l] += 0.5 / y[l] * g[l];
            break;
        }
        case Op::Square: {
            const double* a = val(n.a);
            double* da = adj(n.a);
            for (int l = 0; l < L; ++l) da[l] += 2.0 * a[l] * g[l];
            break;
        }
        case Op::Select: {
            const uint8_t* m = masks_.data() + n.aux;
            double *da = adj(n.a), *db = adj(n.b);
            for (int l = 0; l < L; ++l) {
                if (m[l]) da[l] += g[l]; else db[l] += g[l];
            }
            break;
        }
        case Op::Dense: {
            const DenseRef& ref = dense_[n.aux];
            const double* x0 = val(n.a);
            const double* y0 = val(id);
            // Pre-activation gradient per output row, then the three
            // accumulations: bias, weights, inputs.
            for (int j = 0; j < ref.out; ++j) {
                const double* yj = y0 + static_cast<size_t>(j) * L;
                const double* gj = adj(id + j);
                switch (ref.act) {
                case Act::None:
                    for (int l = 0; l < L; ++l) gpre[l] = gj[l];
                    break;
                case Act::Relu:
                    for (int l = 0; l < L; ++l) gpre[l] = yj[l] > 0.0 ? gj[l] : 0.0;
                    break;
                case Act::Sigmoid:
                    for (int l = 0; l < L; ++l) gpre[l] = yj[l] * (1.0 - yj[l]) * gj[l];
                    break;
                }
                if (ref.db) {
                    double s = 0.0;
                    for (int l = 0; l < L; ++l) s += gpre[l];
                    ref.db[j] += s;
                }
                const double* wrow = ref.W + static_cast<size_t>(j) * ref.in;
                double* dwrow = ref.dW ? ref.dW + static_cast<size_t>(j) * ref.in : nullptr;
                for (int i = 0; i < ref.in; ++i) {
                    const double* xi = x0 + static_cast<size_t>(i) * L;
                    double* dxi = adj(n.a + i);
                    const double w = wrow[i];
                    double s = 0.0;
                    for (int l = 0; l < L; ++l) {
                        s += gpre[l] * xi[l];
                        dxi[l] += w * gpre[l];
                    }
                    if (dwrow) dwrow[i] += s;
                }
            }
            break;
        }
        }
    }
}

} // namespace asr::ad
