#pragma once

// Embedded Runge-Kutta-Fehlberg 7(8) integration of a recorded field, used to
// cross-check the Taylor integrator.

#include "polar/taylor.hpp"

#include <span>
#include <vector>

namespace polar {

std::vector<double> integrate_rk78(const VectorField& field, std::span<const double> x0, double s0, double s1,
                                   double abs_tol = 1e-13, double rel_tol = 1e-13);

} // namespace polar
