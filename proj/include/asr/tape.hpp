#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace asr::ad {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Act : uint8_t { None, Relu, Sigmoid };

// One fully connected layer evaluated on the tape. Weights live outside the
// tape (in Mlp); gradients accumulate into the dW/db buffers supplied by the
// caller, which zeroes them before backward and owns their lifetime.
struct DenseRef {
    const double* W = nullptr; // row-major [out x in]
    const double* b = nullptr; // [out]
    double* dW = nullptr;      // may be null when the layer is frozen
    double* db = nullptr;
    int in = 0;
    int out = 0;
    Act act = Act::None;
};

class Tape;

// Handle to one lane-vector node. Each node holds `lanes` doubles: the same
// scalar computation carried out for every path of the minibatch block.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
    bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode tape over lane vectors. Nodes are appended in topological
// order and evaluated eagerly; backward() walks them once in reverse.
// Elementwise min/max/relu/clamp propagate the subgradient of the branch the
// forward pass selected and 0 on the inactive branch.
class Tape {
public:
    explicit Tape(int lanes);

    int lanes() const { return lanes_; }
    int size() const { return static_cast<int>(nodes_.size()); }

    // Drops all nodes but keeps allocated capacity for reuse across batches.
    void clear();

    // --- leaves ---
    Var constant(double c);
    Var lane_const(std::span<const double> values); // per-lane constants, no gradient
    // Trainable scalar broadcast across lanes; lane adjoints sum into *grad.
    // A null grad freezes the parameter (value used, gradient discarded).
    Var param(const double* value, double* grad);

    // --- elementwise ops ---
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var div(Var a, Var b);
    Var affine(Var a, double scale, double shift); // scale*a + shift
    Var add_lane(Var a, std::span<const double> c); // a + c[l]
    Var mul_lane(Var a, std::span<const double> c); // a * c[l]
    Var vmin(Var a, Var b);
    Var vmax(Var a, Var b);
    Var relu(Var a);
    Var sigmoid(Var a);
    Var vexp(Var a);
    Var vlog(Var a);
    Var vsqrt(Var a);
    Var square(Var a);
    // mask[l] != 0 selects a, else b; the mask itself carries no gradient.
    Var select(std::span<const uint8_t> mask, Var a, Var b);

    // Dense layer: consumes `ref.in` consecutive nodes starting at `first`
    // and emits `ref.out` consecutive nodes holding the activated outputs.
    Var dense(const DenseRef& ref, Var first);

    // i-th output node of a dense block (or any node offset).
    Var offset(Var head, int i) const;

    // --- access ---
    std::span<const double> values(Var v) const;
    double value(Var v, int lane) const { return values(v)[lane]; }
    double lane_sum(Var v) const;

    // Seeds d(objective)/d(node v) with `seed` on every lane and runs the
    // reverse sweep. Parameter and dense-layer gradients accumulate into the
    // caller-provided buffers.
    void backward(Var v, double seed);
    void backward(Var v, std::span<const double> lane_seeds);

private:
    enum class Op : uint8_t {
        Const, LaneConst, Param,
        Add, Sub, Mul, Div, Affine, AddLane, MulLane,
        Min, Max, Relu, Sigmoid, Exp, Log, Sqrt, Square,
        Select, Dense, DenseCont,
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        double s0 = 0.0;
        double s1 = 0.0;
        int aux = -1;   // index into aux_ or masks_ or dense_
    };

    struct ParamSlot {
        const double* value;
        double* grad;
    };

    int push(Node n);
    double* val(int id) { return vals_.data() + static_cast<size_t>(id) * lanes_; }
    const double* val(int id) const { return vals_.data() + static_cast<size_t>(id) * lanes_; }
    double* adj(int id) { return adj_.data() + static_cast<size_t>(id) * lanes_; }
    void eval(int id);
    void check(Var v) const;
    Var unary(Op op, Var a, double s0 = 0.0, double s1 = 0.0);
    Var binary(Op op, Var a, Var b);

    int lanes_;
    std::vector<Node> nodes_;
    std::vector<double> vals_;
    std::vector<double> adj_;
    std::vector<double> aux_;      // per-lane constant payloads
    std::vector<uint8_t> masks_;   // select masks
    std::vector<DenseRef> dense_;
    std::vector<ParamSlot> params_;
};

// Convenience wrappers so formulas read naturally.
inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator+(Var a, double c) { return a.tape->affine(a, 1.0, c); }
inline Var operator-(Var a, double c) { return a.tape->affine(a, 1.0, -c); }
inline Var operator*(Var a, double c) { return a.tape->affine(a, c, 0.0); }
inline Var operator*(double c, Var a) { return a.tape->affine(a, c, 0.0); }
inline Var operator-(Var a) { return a.tape->affine(a, -1.0, 0.0); }

} // namespace asr::ad
