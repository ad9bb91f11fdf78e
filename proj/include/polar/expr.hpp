#pragma once

// Expression graphs for Taylor-mode integration.
//
// A vector field is written once as a template over its scalar type. Evaluating
// it with `Expr` records a straight-line program (a Tape) of rational operations
// and square roots; the tape is then replayed coefficient by coefficient to
// produce Taylor expansions of arbitrary order. Recording folds constants and
// shares common subexpressions, which keeps nested forward-mode derivatives
// (gradients, Hessians) compact.

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace polar::taylor {

enum class Op : std::uint8_t {
    Const,
    Var,
    Add,
    Sub,
    Neg,
    Mul,
    Div,
    Sqrt,
    AddC,   // a + c
    MulC,   // a * c
    RecipC, // c / a
};

struct Node {
    Op op = Op::Const;
    std::int32_t a = -1;
    std::int32_t b = -1;
    double c = 0.0;
};

class Recorder;

/// Straight-line program with `num_inputs()` variables and a list of outputs.
class Tape {
public:
    Tape() = default;

    int num_inputs() const { return n_inputs_; }
    int num_outputs() const { return static_cast<int>(outputs_.size()); }
    std::size_t size() const { return nodes_.size(); }
    std::span<const Node> nodes() const { return nodes_; }
    std::span<const std::int32_t> outputs() const { return outputs_; }

    /// Plain double evaluation. `scratch` is resized as needed.
    void eval(std::span<const double> x, std::span<double> out, std::vector<double>& scratch) const;

    /// Taylor coefficients of the node values given the coefficients of the
    /// inputs. `node_coef` is node-major with stride `order + 1`; this fills
    /// coefficient `k` of every node, assuming coefficients `0..k-1` are done
    /// and input coefficient `k` is available in `input_coef` (same stride).
    void jet_step(int k, int order, std::span<const double> input_coef, std::vector<double>& node_coef) const;

private:
    friend class Recorder;
    int n_inputs_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::int32_t> outputs_;
};

/// Scalar type used while recording. A default-constructed or double-converted
/// Expr is a free constant; it only materializes as a node when combined with
/// recorded values.
class Expr {
public:
    Expr() = default;
    Expr(double c) : c_(c) {} // NOLINT(google-explicit-constructor)

    bool is_const() const { return rec_ == nullptr; }
    bool is_zero() const { return is_const() && c_ == 0.0; }
    bool is_one() const { return is_const() && c_ == 1.0; }
    double const_value() const { return c_; }
    std::int32_t index() const { return idx_; }
    Recorder* recorder() const { return rec_; }

private:
    friend class Recorder;
    Expr(Recorder* rec, std::int32_t idx) : rec_(rec), idx_(idx) {}

    Recorder* rec_ = nullptr;
    std::int32_t idx_ = -1;
    double c_ = 0.0;
};

class Recorder {
public:
    explicit Recorder(int n_inputs);

    Expr input(int i);
    int num_inputs() const { return n_inputs_; }

    Expr make(Op op, const Expr& a, const Expr& b = Expr{}, double c = 0.0);

    /// Closes the recording. Constant outputs become Const nodes.
    Tape finish(std::span<const Expr> outputs);

private:
    struct Key {
        Op op;
        std::int32_t a, b;
        double c;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept;
    };

    std::int32_t materialize(const Expr& e);
    std::int32_t push(const Node& n);

    int n_inputs_;
    std::vector<Node> nodes_;
    std::unordered_map<Key, std::int32_t, KeyHash> cse_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr sqrt(const Expr& a);

inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }
inline Expr& operator/=(Expr& a, const Expr& b) { return a = a / b; }

} // namespace polar::taylor
