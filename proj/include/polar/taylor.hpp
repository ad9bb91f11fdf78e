#pragma once

// Variable-order, variable-step Taylor series integration of fields recorded
// as expression tapes, with first-order variational equations and location
// of crossings with a surface of section on the dense output.

#include "polar/autodiff.hpp"
#include "polar/expr.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polar {

struct IntegratorConfig {
    double abs_tol = 1e-14;
    double rel_tol = 1e-14;
    int order_min = 20;
    int order_max = 30;
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 200000;

    void validate() const;
};

/// Autonomous vector field x' = f(x) recorded on a tape. When `var_dim > 0`
/// the tape also carries the Jacobian of the first `var_dim` components with
/// respect to the first `var_dim` inputs (row-major, after the field outputs),
/// which drives the variational equations M' = Df M.
class VectorField {
public:
    VectorField() = default;
    VectorField(taylor::Tape tape, int dim, int var_dim);

    int dim() const { return dim_; }
    int var_dim() const { return var_dim_; }
    bool has_jacobian() const { return var_dim_ > 0; }
    const taylor::Tape& tape() const { return tape_; }

    std::vector<double> operator()(std::span<const double> x) const;
    /// Jacobian block Df (var_dim x var_dim) at x.
    Eigen::MatrixXd jacobian(std::span<const double> x) const;

private:
    taylor::Tape tape_;
    int dim_ = 0;
    int var_dim_ = 0;
};

/// Records `f` (a generic callable on std::array<T, N>) into a VectorField.
/// `V` > 0 additionally records the Jacobian of the leading V components.
template <int N, int V = 0, class F>
VectorField record_field(F&& f)
{
    using taylor::Expr;
    taylor::Recorder rec(N);
    std::array<Expr, N> x;
    for (int i = 0; i < N; ++i)
        x[static_cast<std::size_t>(i)] = rec.input(i);
    std::array<Expr, N> y = f(x);
    std::vector<Expr> out(y.begin(), y.end());
    if constexpr (V > 0) {
        std::array<Dual<Expr, V>, N> xd;
        for (int i = 0; i < N; ++i) {
            auto& xi = xd[static_cast<std::size_t>(i)];
            xi.v = x[static_cast<std::size_t>(i)];
            if (i < V)
                xi.d[static_cast<std::size_t>(i)] = Expr{1.0};
        }
        std::array<Dual<Expr, V>, N> yd = f(xd);
        for (int r = 0; r < V; ++r)
            for (int c = 0; c < V; ++c)
                out.push_back(yd[static_cast<std::size_t>(r)].d[static_cast<std::size_t>(c)]);
    }
    return VectorField(rec.finish(out), N, V);
}

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double s, std::vector<double> state)
        : std::runtime_error(what), s_(s), state_(std::move(state))
    {
    }
    double where() const { return s_; }
    const std::vector<double>& partial_state() const { return state_; }

private:
    double s_;
    std::vector<double> state_;
};

/// One accepted Taylor step: x(s0 + tau) = sum_k coef[i*(order+1)+k] tau^k.
struct TaylorStep {
    double s0 = 0.0;
    double h = 0.0;
    int order = 0;
    int dim = 0;
    std::vector<double> coef;

    std::vector<double> eval(double tau) const;
    std::vector<double> eval_derivative(double tau) const;
};

/// Dense output: the sequence of accepted steps.
class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(std::vector<TaylorStep> steps) : steps_(std::move(steps)) {}

    bool empty() const { return steps_.empty(); }
    double s_begin() const { return steps_.front().s0; }
    double s_end() const { return steps_.back().s0 + steps_.back().h; }
    const std::vector<TaylorStep>& steps() const { return steps_; }
    std::vector<double> state_at(double s) const;

private:
    std::vector<TaylorStep> steps_;
};

struct TrajectorySample {
    double s = 0.0;
    std::vector<double> state;
    std::optional<Eigen::MatrixXd> M;
};

struct Section {
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;

    /// The hyperplane {x_index = level}.
    static Section coordinate(int index, double level = 0.0);
};

enum class CrossingDirection { Any, Increasing, Decreasing };

struct SectionCrossing {
    std::vector<double> state;
    double elapsed = 0.0;
    double residual = 0.0;
};

struct VariationalResult {
    std::vector<double> state;
    Eigen::MatrixXd M;
    long steps = 0;
};

/// Holds per-run scratch buffers; use one instance per thread.
class TaylorIntegrator {
public:
    explicit TaylorIntegrator(const VectorField& field, IntegratorConfig config = {});

    const IntegratorConfig& config() const { return cfg_; }

    /// Integrates from s0 to s1 (either direction). Returns the final state;
    /// when `dense` is given it receives every accepted step.
    std::vector<double> propagate(std::span<const double> x0, double s0, double s1,
                                  std::vector<TaylorStep>* dense = nullptr);

    VariationalResult propagate_variational(std::span<const double> x0, const Eigen::MatrixXd& M0,
                                            double s0, double s1);

    /// First crossing of `section` after leaving the start point, searching
    /// up to |s_max| in the direction of sign(s_max).
    SectionCrossing to_section(std::span<const double> x0, const Section& section,
                               CrossingDirection direction, double s_max);

    long last_step_count() const { return last_steps_; }

private:
    int choose_order(double tol) const;
    double choose_step(int order, bool with_M) const;
    void build_jet(int order, bool with_M);

    const VectorField* field_;
    IntegratorConfig cfg_;
    int n_;
    int v_;
    std::vector<double> xc_;
    std::vector<double> mc_;
    std::vector<double> nodes_;
    long last_steps_ = 0;
};

/// Samples at the requested times (must lie in [s0, s1] or [s1, s0]).
std::vector<TrajectorySample> integrate(const VectorField& field, std::span<const double> x0, double s0,
                                        double s1, std::span<const double> sample_times,
                                        const IntegratorConfig& config = {});

VariationalResult integrate_with_variational(const VectorField& field, std::span<const double> x0,
                                             const Eigen::MatrixXd& M0, double s0, double s1,
                                             const IntegratorConfig& config = {});

SectionCrossing integrate_to_section(const VectorField& field, std::span<const double> x0,
                                     const Section& section, CrossingDirection direction, double s_max,
                                     const IntegratorConfig& config = {});

} // namespace polar
