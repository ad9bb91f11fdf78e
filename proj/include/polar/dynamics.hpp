#pragma once

// Hamiltonians of the spatial circular restricted three-body problem in
// barycentric, moon-centered and Hill-rescaled rotating frames.

#include "polar/autodiff.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace polar {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

enum class FrameTag { Barycentric, MoonCentered, HillRescaled };

struct Frame {
    FrameTag tag = FrameTag::HillRescaled;
    double mu = 0.0;
    double omega = 1.0;

    void validate() const;
};

const char* to_string(FrameTag tag);

struct PhaseState {
    Vec3 q = Vec3::Zero();
    Vec3 p = Vec3::Zero();
    Frame frame;

    Vec6 vec() const;
    static PhaseState from(const Vec6& x, const Frame& frame);
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Tidal part of the Hill-rescaled Hamiltonian,
///   mu^{-2/3} (1-mu) (1 - mu^{1/3} q1 - 1/sqrt(1 + 2 mu^{1/3} q1 + mu^{2/3}|q|^2)),
/// written without subtractive cancellation:
///   -(1-mu) [u^2 (s+2) / (2 s (1+s)^2) - |q|^2/2],  u = 2 q1 + a|q|^2, s = sqrt(1 + a u), a = mu^{1/3}.
template <class T>
T hill_tidal(double mu, const T& q1, const T& q2, const T& q3)
{
    using std::sqrt;
    const double a = std::cbrt(mu);
    const T r2 = q1 * q1 + q2 * q2 + q3 * q3;
    const T u = 2.0 * q1 + a * r2;
    const T s = sqrt(1.0 + a * u);
    const T sp = 1.0 + s;
    return -(1.0 - mu) * (u * u * (s + 2.0) / (2.0 * s * sp * sp) - 0.5 * r2);
}

/// Hamiltonian value for x = (q, p) in the given frame. Works for any scalar
/// type supporting field operations and sqrt.
template <class T>
T hamiltonian(const Frame& f, const std::array<T, 6>& x)
{
    using std::sqrt;
    const T& q1 = x[0];
    const T& q2 = x[1];
    const T& q3 = x[2];
    const T kinetic = 0.5 * (x[3] * x[3] + x[4] * x[4] + x[5] * x[5]);
    const T rotation = f.omega * (q1 * x[4] - q2 * x[3]);
    const double mu = f.mu;
    switch (f.tag) {
    case FrameTag::Barycentric: {
        const T dm = q1 - (1.0 - mu);
        const T de = q1 + mu;
        const T rho2 = q2 * q2 + q3 * q3;
        return kinetic + rotation - mu / sqrt(dm * dm + rho2) - (1.0 - mu) / sqrt(de * de + rho2);
    }
    case FrameTag::MoonCentered: {
        const T r = sqrt(q1 * q1 + q2 * q2 + q3 * q3);
        const T d1 = q1 + 1.0;
        const T re = sqrt(d1 * d1 + q2 * q2 + q3 * q3);
        return kinetic + rotation - mu / r - (1.0 - mu) * (1.0 / re + q1);
    }
    case FrameTag::HillRescaled:
    default: {
        const T r = sqrt(q1 * q1 + q2 * q2 + q3 * q3);
        return kinetic + rotation - 1.0 / r + hill_tidal(mu, q1, q2, q3);
    }
    }
}

/// Hamiltonian vector field (H_p, -H_q) by forward-mode differentiation.
template <class T>
std::array<T, 6> hamiltonian_field(const Frame& f, const std::array<T, 6>& x)
{
    auto g = gradient<6>([&f](const auto& y) { return hamiltonian(f, y); }, x);
    return {g[3], g[4], g[5], -g[0], -g[1], -g[2]};
}

/// Energy with collision checks; throws DomainError naming the singular body.
double eval_energy(const PhaseState& state);
Vec6 vector_field(const PhaseState& state);
/// Right-hand side J Hess(H) M of the variational equations.
Mat6 variational_field(const PhaseState& state, const Mat6& M);
/// J Hess(H) at the state.
Mat6 field_jacobian(const PhaseState& state);

PhaseState to_moon_centered(const PhaseState& barycentric);
PhaseState to_barycentric(const PhaseState& moon_centered);
/// Constant c with H_m(T(x)) = H(x) + c.
double moon_centered_energy_shift(double mu);

PhaseState rescale_hill(const PhaseState& moon_centered);
PhaseState unrescale_hill(const PhaseState& hill);

/// Energy conversions between frames for a fixed mass ratio.
double hill_energy_from_moon_centered(double h_m, double mu);
double moon_centered_energy_from_hill(double h_hat, double mu);
double moon_centered_energy_from_barycentric(double h, double mu);
double barycentric_energy_from_moon_centered(double h_m, double mu);

/// Moon-centered position in km.
Vec3 to_physical_km(const PhaseState& state, double distance_km);
double distance_km(const PhaseState& state, double distance_km);

/// mu = 0 Hill Hamiltonian at a rescaled state (the leading-order truncation).
double hill_truncated_energy(const Vec6& x, double omega = 1.0);

/// Single-equilibrium data used in tests: the Hill critical point at mu = 0.
Vec6 hill_critical_point(int sign = 1);
double hill_critical_energy();

} // namespace polar
