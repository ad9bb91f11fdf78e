#include "polar/rk78.hpp"

#include <boost/numeric/odeint.hpp>

namespace polar {

std::vector<double> integrate_rk78(const VectorField& field, std::span<const double> x0, double s0, double s1,
                                   double abs_tol, double rel_tol)
{
    namespace odeint = boost::numeric::odeint;
    using state_t = std::vector<double>;
    const auto& tape = field.tape();
    const auto n = static_cast<std::size_t>(field.dim());
    std::vector<double> out(static_cast<std::size_t>(tape.num_outputs()));
    std::vector<double> scratch;
    auto rhs = [&](const state_t& x, state_t& dx, double) {
        tape.eval(x, out, scratch);
        std::copy(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), dx.begin());
    };
    state_t x(x0.begin(), x0.end());
    auto stepper = odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_fehlberg78<state_t>());
    const double dt = (s1 - s0) * 1e-3;
    if (s1 != s0)
        odeint::integrate_adaptive(stepper, rhs, x, s0, s1, dt);
    for (double v : x)
        if (!std::isfinite(v))
            throw IntegrationError("non-finite state in RK78 integration", s1, x);
    return x;
}

} // namespace polar
