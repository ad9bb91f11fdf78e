#include "polar/expr.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace polar::taylor {

std::size_t Recorder::KeyHash::operator()(const Key& k) const noexcept
{
    std::size_t h = static_cast<std::size_t>(k.op);
    h = h * 1000003u ^ static_cast<std::size_t>(static_cast<std::uint32_t>(k.a));
    h = h * 1000003u ^ static_cast<std::size_t>(static_cast<std::uint32_t>(k.b));
    h = h * 1000003u ^ std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(k.c));
    return h;
}

Recorder::Recorder(int n_inputs) : n_inputs_(n_inputs)
{
    nodes_.reserve(static_cast<std::size_t>(n_inputs) + 256);
    for (int i = 0; i < n_inputs; ++i)
        nodes_.push_back(Node{Op::Var, i, -1, 0.0});
}

Expr Recorder::input(int i)
{
    if (i < 0 || i >= n_inputs_)
        throw std::out_of_range("Recorder::input: index out of range");
    return Expr{this, i};
}

std::int32_t Recorder::push(const Node& n)
{
    Key key{n.op, n.a, n.b, n.c};
    if (auto it = cse_.find(key); it != cse_.end())
        return it->second;
    auto idx = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(n);
    cse_.emplace(key, idx);
    return idx;
}

std::int32_t Recorder::materialize(const Expr& e)
{
    if (!e.is_const())
        return e.idx_;
    return push(Node{Op::Const, -1, -1, e.c_});
}

Expr Recorder::make(Op op, const Expr& a, const Expr& b, double c)
{
    Node n{op, materialize(a), -1, c};
    switch (op) {
    case Op::Add:
    case Op::Mul:
        n.b = materialize(b);
        if (n.a > n.b)
            std::swap(n.a, n.b);
        break;
    case Op::Sub:
    case Op::Div:
        n.b = materialize(b);
        break;
    default:
        break;
    }
    return Expr{this, push(n)};
}

Tape Recorder::finish(std::span<const Expr> outputs)
{
    Tape t;
    t.n_inputs_ = n_inputs_;
    t.outputs_.reserve(outputs.size());
    for (const auto& e : outputs) {
        if (!e.is_const() && e.recorder() != this)
            throw std::logic_error("Recorder::finish: output recorded on a different tape");
        t.outputs_.push_back(materialize(e));
    }
    t.nodes_ = nodes_;
    return t;
}

namespace {

Recorder* common_recorder(const Expr& a, const Expr& b)
{
    Recorder* r = a.recorder() ? a.recorder() : b.recorder();
    if (a.recorder() && b.recorder() && a.recorder() != b.recorder())
        throw std::logic_error("Expr: operands recorded on different tapes");
    return r;
}

} // namespace

Expr operator+(const Expr& a, const Expr& b)
{
    if (a.is_const() && b.is_const())
        return Expr{a.const_value() + b.const_value()};
    if (a.is_zero())
        return b;
    if (b.is_zero())
        return a;
    Recorder* r = common_recorder(a, b);
    if (a.is_const())
        return r->make(Op::AddC, b, Expr{}, a.const_value());
    if (b.is_const())
        return r->make(Op::AddC, a, Expr{}, b.const_value());
    return r->make(Op::Add, a, b);
}

Expr operator-(const Expr& a)
{
    if (a.is_const())
        return Expr{-a.const_value()};
    return a.recorder()->make(Op::Neg, a);
}

Expr operator-(const Expr& a, const Expr& b)
{
    if (a.is_const() && b.is_const())
        return Expr{a.const_value() - b.const_value()};
    if (b.is_zero())
        return a;
    if (a.is_zero())
        return -b;
    Recorder* r = common_recorder(a, b);
    if (b.is_const())
        return r->make(Op::AddC, a, Expr{}, -b.const_value());
    if (a.is_const())
        return r->make(Op::AddC, -b, Expr{}, a.const_value());
    if (a.index() == b.index())
        return Expr{0.0};
    return r->make(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b)
{
    if (a.is_const() && b.is_const())
        return Expr{a.const_value() * b.const_value()};
    if (a.is_zero() || b.is_zero())
        return Expr{0.0};
    if (a.is_one())
        return b;
    if (b.is_one())
        return a;
    Recorder* r = common_recorder(a, b);
    if (a.is_const())
        return a.const_value() == -1.0 ? -b : r->make(Op::MulC, b, Expr{}, a.const_value());
    if (b.is_const())
        return b.const_value() == -1.0 ? -a : r->make(Op::MulC, a, Expr{}, b.const_value());
    return r->make(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b)
{
    if (a.is_const() && b.is_const())
        return Expr{a.const_value() / b.const_value()};
    if (a.is_zero())
        return Expr{0.0};
    if (b.is_one())
        return a;
    Recorder* r = common_recorder(a, b);
    if (b.is_const())
        return r->make(Op::MulC, a, Expr{}, 1.0 / b.const_value());
    if (a.is_const())
        return r->make(Op::RecipC, b, Expr{}, a.const_value());
    if (a.index() == b.index())
        return Expr{1.0};
    return r->make(Op::Div, a, b);
}

Expr sqrt(const Expr& a)
{
    if (a.is_const())
        return Expr{std::sqrt(a.const_value())};
    return a.recorder()->make(Op::Sqrt, a);
}

void Tape::eval(std::span<const double> x, std::span<double> out, std::vector<double>& v) const
{
    v.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        switch (n.op) {
        case Op::Const: v[i] = n.c; break;
        case Op::Var: v[i] = x[static_cast<std::size_t>(n.a)]; break;
        case Op::Add: v[i] = v[n.a] + v[n.b]; break;
        case Op::Sub: v[i] = v[n.a] - v[n.b]; break;
        case Op::Neg: v[i] = -v[n.a]; break;
        case Op::Mul: v[i] = v[n.a] * v[n.b]; break;
        case Op::Div: v[i] = v[n.a] / v[n.b]; break;
        case Op::Sqrt: v[i] = std::sqrt(v[n.a]); break;
        case Op::AddC: v[i] = v[n.a] + n.c; break;
        case Op::MulC: v[i] = v[n.a] * n.c; break;
        case Op::RecipC: v[i] = n.c / v[n.a]; break;
        }
    }
    for (std::size_t j = 0; j < outputs_.size(); ++j)
        out[j] = v[static_cast<std::size_t>(outputs_[j])];
}

void Tape::jet_step(int k, int order, std::span<const double> in, std::vector<double>& c) const
{
    const std::size_t s = static_cast<std::size_t>(order) + 1;
    const std::size_t uk = static_cast<std::size_t>(k);
    if (c.size() < nodes_.size() * s)
        c.resize(nodes_.size() * s);
    double* base = c.data();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        double* y = base + i * s;
        const double* a = n.a >= 0 ? base + static_cast<std::size_t>(n.a) * s : nullptr;
        const double* b = n.b >= 0 ? base + static_cast<std::size_t>(n.b) * s : nullptr;
        switch (n.op) {
        case Op::Const: y[uk] = k == 0 ? n.c : 0.0; break;
        case Op::Var: y[uk] = in[static_cast<std::size_t>(n.a) * s + uk]; break;
        case Op::Add: y[uk] = a[uk] + b[uk]; break;
        case Op::Sub: y[uk] = a[uk] - b[uk]; break;
        case Op::Neg: y[uk] = -a[uk]; break;
        case Op::AddC: y[uk] = k == 0 ? a[0] + n.c : a[uk]; break;
        case Op::MulC: y[uk] = a[uk] * n.c; break;
        case Op::Mul: {
            double acc = 0.0;
            for (std::size_t j = 0; j <= uk; ++j)
                acc += a[j] * b[uk - j];
            y[uk] = acc;
            break;
        }
        case Op::Div: {
            double acc = a[uk];
            for (std::size_t j = 1; j <= uk; ++j)
                acc -= b[j] * y[uk - j];
            y[uk] = acc / b[0];
            break;
        }
        case Op::RecipC: {
            double acc = k == 0 ? n.c : 0.0;
            for (std::size_t j = 1; j <= uk; ++j)
                acc -= a[j] * y[uk - j];
            y[uk] = acc / a[0];
            break;
        }
        case Op::Sqrt: {
            if (k == 0) {
                y[0] = std::sqrt(a[0]);
                break;
            }
            double acc = 0.0;
            const std::size_t half = (uk - 1) / 2;
            for (std::size_t j = 1; j <= half; ++j)
                acc += y[j] * y[uk - j];
            acc *= 2.0;
            if (uk % 2 == 0)
                acc += y[uk / 2] * y[uk / 2];
            y[uk] = (a[uk] - acc) / (2.0 * y[0]);
            break;
        }
        }
    }
}

} // namespace polar::taylor
