#include "polar/taylor.hpp"

#include <algorithm>
#include <cmath>

namespace polar {

namespace {

double inf_norm(std::span<const double> x)
{
    double m = 0.0;
    for (double v : x)
        m = std::max(m, std::abs(v));
    return m;
}

} // namespace

void IntegratorConfig::validate() const
{
    if (!(abs_tol > 0.0) || !(rel_tol >= 0.0))
        throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
    if (order_min < 2 || order_max < order_min)
        throw std::invalid_argument("IntegratorConfig: invalid order range");
    if (!(max_step > 0.0))
        throw std::invalid_argument("IntegratorConfig: max_step must be positive");
    if (max_steps <= 0)
        throw std::invalid_argument("IntegratorConfig: max_steps must be positive");
}

VectorField::VectorField(taylor::Tape tape, int dim, int var_dim)
    : tape_(std::move(tape)), dim_(dim), var_dim_(var_dim)
{
    if (tape_.num_inputs() != dim || tape_.num_outputs() != dim + var_dim * var_dim)
        throw std::invalid_argument("VectorField: tape shape does not match dimensions");
}

std::vector<double> VectorField::operator()(std::span<const double> x) const
{
    std::vector<double> out(static_cast<std::size_t>(tape_.num_outputs()));
    std::vector<double> scratch;
    tape_.eval(x, out, scratch);
    out.resize(static_cast<std::size_t>(dim_));
    return out;
}

Eigen::MatrixXd VectorField::jacobian(std::span<const double> x) const
{
    if (!has_jacobian())
        throw std::logic_error("VectorField::jacobian: field recorded without Jacobian");
    std::vector<double> out(static_cast<std::size_t>(tape_.num_outputs()));
    std::vector<double> scratch;
    tape_.eval(x, out, scratch);
    Eigen::MatrixXd A(var_dim_, var_dim_);
    for (int r = 0; r < var_dim_; ++r)
        for (int c = 0; c < var_dim_; ++c)
            A(r, c) = out[static_cast<std::size_t>(dim_ + r * var_dim_ + c)];
    return A;
}

std::vector<double> TaylorStep::eval(double tau) const
{
    const auto s = static_cast<std::size_t>(order) + 1;
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double* c = coef.data() + i * s;
        double acc = c[s - 1];
        for (std::size_t k = s - 1; k-- > 0;)
            acc = acc * tau + c[k];
        x[i] = acc;
    }
    return x;
}

std::vector<double> TaylorStep::eval_derivative(double tau) const
{
    const auto s = static_cast<std::size_t>(order) + 1;
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double* c = coef.data() + i * s;
        double acc = static_cast<double>(s - 1) * c[s - 1];
        for (std::size_t k = s - 1; k-- > 1;)
            acc = acc * tau + static_cast<double>(k) * c[k];
        x[i] = acc;
    }
    return x;
}

std::vector<double> Trajectory::state_at(double s) const
{
    if (steps_.empty())
        throw std::logic_error("Trajectory::state_at: empty trajectory");
    const bool forward = steps_.front().h >= 0.0;
    auto it = std::find_if(steps_.begin(), steps_.end(), [&](const TaylorStep& st) {
        return forward ? s <= st.s0 + st.h : s >= st.s0 + st.h;
    });
    if (it == steps_.end())
        it = std::prev(steps_.end());
    return it->eval(s - it->s0);
}

Section Section::coordinate(int index, double level)
{
    const auto i = static_cast<std::size_t>(index);
    Section s;
    s.value = [i, level](std::span<const double> x) { return x[i] - level; };
    s.gradient = [i](std::span<const double>, std::span<double> g) {
        std::fill(g.begin(), g.end(), 0.0);
        g[i] = 1.0;
    };
    return s;
}

TaylorIntegrator::TaylorIntegrator(const VectorField& field, IntegratorConfig config)
    : field_(&field), cfg_(config), n_(field.dim()), v_(field.var_dim())
{
    cfg_.validate();
}

int TaylorIntegrator::choose_order(double tol) const
{
    const int n = static_cast<int>(std::ceil(-0.5 * std::log(tol) + 1.0));
    return std::clamp(n, cfg_.order_min, cfg_.order_max);
}

void TaylorIntegrator::build_jet(int order, bool with_M)
{
    const auto s = static_cast<std::size_t>(order) + 1;
    const auto& tape = field_->tape();
    const auto outs = tape.outputs();
    const auto n = static_cast<std::size_t>(n_);
    const auto v = static_cast<std::size_t>(v_);
    for (int k = 0; k < order; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        tape.jet_step(k, order, xc_, nodes_);
        for (std::size_t i = 0; i < n; ++i)
            xc_[i * s + uk + 1] = nodes_[static_cast<std::size_t>(outs[i]) * s + uk] / static_cast<double>(k + 1);
        if (!with_M)
            continue;
        // M_{k+1} = 1/(k+1) sum_j A_j M_{k-j}
        const double inv = 1.0 / static_cast<double>(k + 1);
        for (std::size_t r = 0; r < v; ++r) {
            for (std::size_t c = 0; c < v; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j <= uk; ++j) {
                    for (std::size_t m = 0; m < v; ++m) {
                        const double a = nodes_[static_cast<std::size_t>(outs[n + r * v + m]) * s + j];
                        acc += a * mc_[(m * v + c) * s + uk - j];
                    }
                }
                mc_[(r * v + c) * s + uk + 1] = acc * inv;
            }
        }
    }
}

double TaylorIntegrator::choose_step(int order, bool with_M) const
{
    const auto s = static_cast<std::size_t>(order) + 1;
    auto radius = [&](const std::vector<double>& coef, std::size_t count) {
        double x0 = 0.0;
        for (std::size_t i = 0; i < count; ++i)
            x0 = std::max(x0, std::abs(coef[i * s]));
        const double tol = std::max(cfg_.abs_tol, cfg_.rel_tol * x0);
        double h = std::numeric_limits<double>::infinity();
        for (int j : {order - 1, order}) {
            double nj = 0.0;
            for (std::size_t i = 0; i < count; ++i)
                nj = std::max(nj, std::abs(coef[i * s + static_cast<std::size_t>(j)]));
            if (nj > 0.0)
                h = std::min(h, std::pow(tol / nj, 1.0 / j));
        }
        return h;
    };
    double h = radius(xc_, static_cast<std::size_t>(n_));
    if (with_M)
        h = std::min(h, radius(mc_, static_cast<std::size_t>(v_ * v_)));
    return std::min(0.9 * h, cfg_.max_step);
}

std::vector<double> TaylorIntegrator::propagate(std::span<const double> x0, double s0, double s1,
                                                std::vector<TaylorStep>* dense)
{
    if (static_cast<int>(x0.size()) != n_)
        throw std::invalid_argument("TaylorIntegrator::propagate: state dimension mismatch");
    std::vector<double> x(x0.begin(), x0.end());
    const double dir = s1 >= s0 ? 1.0 : -1.0;
    double s = s0;
    last_steps_ = 0;
    while (dir * (s1 - s) > 0.0) {
        if (++last_steps_ > cfg_.max_steps)
            throw IntegrationError("maximum number of steps exceeded", s, x);
        const double tol = std::max(cfg_.abs_tol, cfg_.rel_tol * inf_norm(x));
        const int order = choose_order(tol);
        const auto st = static_cast<std::size_t>(order) + 1;
        xc_.assign(static_cast<std::size_t>(n_) * st, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i)
            xc_[i * st] = x[i];
        build_jet(order, false);
        double h = choose_step(order, false);
        if (!(h > 0.0))
            throw IntegrationError("step size selection failed", s, x);
        bool last = false;
        if (h >= dir * (s1 - s)) {
            h = dir * (s1 - s);
            last = true;
        }
        TaylorStep step{s, dir * h, order, n_, xc_};
        x = step.eval(dir * h);
        for (double v : x)
            if (!std::isfinite(v))
                throw IntegrationError("non-finite state during integration", s, std::vector<double>(x0.begin(), x0.end()));
        if (dense)
            dense->push_back(std::move(step));
        s = last ? s1 : s + dir * h;
    }
    return x;
}

VariationalResult TaylorIntegrator::propagate_variational(std::span<const double> x0, const Eigen::MatrixXd& M0,
                                                          double s0, double s1)
{
    if (!field_->has_jacobian())
        throw std::logic_error("propagate_variational: field recorded without Jacobian");
    if (static_cast<int>(x0.size()) != n_ || M0.rows() != v_ || M0.cols() != v_)
        throw std::invalid_argument("propagate_variational: dimension mismatch");
    VariationalResult res;
    res.state.assign(x0.begin(), x0.end());
    res.M = M0;
    const double dir = s1 >= s0 ? 1.0 : -1.0;
    double s = s0;
    last_steps_ = 0;
    const auto v = static_cast<std::size_t>(v_);
    while (dir * (s1 - s) > 0.0) {
        if (++last_steps_ > cfg_.max_steps)
            throw IntegrationError("maximum number of steps exceeded", s, res.state);
        const double tol = std::max(cfg_.abs_tol, cfg_.rel_tol * inf_norm(res.state));
        const int order = choose_order(tol);
        const auto st = static_cast<std::size_t>(order) + 1;
        xc_.assign(static_cast<std::size_t>(n_) * st, 0.0);
        mc_.assign(v * v * st, 0.0);
        for (std::size_t i = 0; i < res.state.size(); ++i)
            xc_[i * st] = res.state[i];
        for (std::size_t r = 0; r < v; ++r)
            for (std::size_t c = 0; c < v; ++c)
                mc_[(r * v + c) * st] = res.M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        build_jet(order, true);
        double h = choose_step(order, true);
        if (!(h > 0.0))
            throw IntegrationError("step size selection failed", s, res.state);
        bool last = false;
        if (h >= dir * (s1 - s)) {
            h = dir * (s1 - s);
            last = true;
        }
        const double tau = dir * h;
        for (std::size_t i = 0; i < res.state.size(); ++i) {
            const double* c = xc_.data() + i * st;
            double acc = c[st - 1];
            for (std::size_t k = st - 1; k-- > 0;)
                acc = acc * tau + c[k];
            res.state[i] = acc;
        }
        for (std::size_t e = 0; e < v * v; ++e) {
            const double* c = mc_.data() + e * st;
            double acc = c[st - 1];
            for (std::size_t k = st - 1; k-- > 0;)
                acc = acc * tau + c[k];
            res.M(static_cast<Eigen::Index>(e / v), static_cast<Eigen::Index>(e % v)) = acc;
        }
        for (double val : res.state)
            if (!std::isfinite(val))
                throw IntegrationError("non-finite state during integration", s, res.state);
        s = last ? s1 : s + tau;
    }
    res.steps = last_steps_;
    return res;
}

SectionCrossing TaylorIntegrator::to_section(std::span<const double> x0, const Section& section,
                                             CrossingDirection direction, double s_max)
{
    if (static_cast<int>(x0.size()) != n_)
        throw std::invalid_argument("to_section: state dimension mismatch");
    std::vector<double> x(x0.begin(), x0.end());
    const double dir = s_max >= 0.0 ? 1.0 : -1.0;
    const double span = std::abs(s_max);
    double elapsed = 0.0;
    int prev_sign = 0;
    const double g0 = section.value(x);
    // A start point lying on the section does not count as a crossing.
    const double zero_band = 1e-13 * std::max(1.0, inf_norm(x));
    if (std::abs(g0) > zero_band)
        prev_sign = g0 > 0.0 ? 1 : -1;
    std::vector<double> grad(static_cast<std::size_t>(n_));
    constexpr int kSamples = 16;
    last_steps_ = 0;
    while (elapsed < span) {
        if (++last_steps_ > cfg_.max_steps)
            throw IntegrationError("maximum number of steps exceeded before section", dir * elapsed, x);
        const double tol = std::max(cfg_.abs_tol, cfg_.rel_tol * inf_norm(x));
        const int order = choose_order(tol);
        const auto st = static_cast<std::size_t>(order) + 1;
        xc_.assign(static_cast<std::size_t>(n_) * st, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i)
            xc_[i * st] = x[i];
        build_jet(order, false);
        double h = std::min(choose_step(order, false), span - elapsed);
        if (!(h > 0.0))
            throw IntegrationError("step size selection failed", dir * elapsed, x);
        TaylorStep step{0.0, dir * h, order, n_, xc_};
        double ta = 0.0;
        for (int j = 1; j <= kSamples; ++j) {
            const double tb = dir * h * j / kSamples;
            const auto xb = step.eval(tb);
            const double gb = section.value(xb);
            int sign_b = 0;
            if (gb > 0.0)
                sign_b = 1;
            else if (gb < 0.0)
                sign_b = -1;
            if (prev_sign == 0) {
                if (std::abs(gb) > zero_band)
                    prev_sign = sign_b;
                ta = tb;
                continue;
            }
            const bool crossed = sign_b != prev_sign && sign_b != 0 ? true : gb == 0.0;
            const bool wanted = direction == CrossingDirection::Any ||
                                (direction == CrossingDirection::Increasing && prev_sign < 0) ||
                                (direction == CrossingDirection::Decreasing && prev_sign > 0);
            if (crossed && wanted) {
                // Safeguarded Newton on the step polynomial, bracket [ta, tb].
                double lo = ta, hi = tb;
                double glo = section.value(step.eval(lo));
                double t = 0.5 * (lo + hi);
                for (int it = 0; it < 200; ++it) {
                    const auto xt = step.eval(t);
                    const double gt = section.value(xt);
                    if (gt == 0.0)
                        break;
                    if ((gt > 0.0) == (glo > 0.0)) {
                        lo = t;
                        glo = gt;
                    } else {
                        hi = t;
                    }
                    section.gradient(xt, grad);
                    const auto dx = step.eval_derivative(t);
                    double dg = 0.0;
                    for (std::size_t i = 0; i < dx.size(); ++i)
                        dg += grad[i] * dx[i];
                    double tn = dg != 0.0 ? t - gt / dg : 0.5 * (lo + hi);
                    if (!((tn - lo) * (tn - hi) < 0.0))
                        tn = 0.5 * (lo + hi);
                    if (std::abs(tn - t) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
                        t = tn;
                        break;
                    }
                    t = tn;
                }
                SectionCrossing out;
                out.state = step.eval(t);
                out.elapsed = dir * elapsed + t;
                out.residual = std::abs(section.value(out.state));
                return out;
            }
            if (sign_b != 0)
                prev_sign = sign_b;
            ta = tb;
        }
        x = step.eval(dir * h);
        for (double val : x)
            if (!std::isfinite(val))
                throw IntegrationError("non-finite state during integration", dir * elapsed, x);
        elapsed += h;
    }
    throw IntegrationError("no section crossing within the search span", dir * elapsed, x);
}

std::vector<TrajectorySample> integrate(const VectorField& field, std::span<const double> x0, double s0,
                                        double s1, std::span<const double> sample_times,
                                        const IntegratorConfig& config)
{
    TaylorIntegrator ti(field, config);
    std::vector<TaylorStep> steps;
    ti.propagate(x0, s0, s1, &steps);
    std::vector<TrajectorySample> out;
    out.reserve(sample_times.size());
    const double lo = std::min(s0, s1), hi = std::max(s0, s1);
    for (double t : sample_times) {
        if (t < lo || t > hi)
            throw std::invalid_argument("integrate: sample time outside the integration span");
        TrajectorySample smp;
        smp.s = t;
        if (steps.empty() || t == s0)
            smp.state.assign(x0.begin(), x0.end());
        else
            smp.state = Trajectory(steps).state_at(t);
        out.push_back(std::move(smp));
    }
    return out;
}

VariationalResult integrate_with_variational(const VectorField& field, std::span<const double> x0,
                                             const Eigen::MatrixXd& M0, double s0, double s1,
                                             const IntegratorConfig& config)
{
    TaylorIntegrator ti(field, config);
    return ti.propagate_variational(x0, M0, s0, s1);
}

SectionCrossing integrate_to_section(const VectorField& field, std::span<const double> x0,
                                     const Section& section, CrossingDirection direction, double s_max,
                                     const IntegratorConfig& config)
{
    TaylorIntegrator ti(field, config);
    return ti.to_section(x0, section, direction, s_max);
}

} // namespace polar
