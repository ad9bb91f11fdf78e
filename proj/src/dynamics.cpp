#include "polar/dynamics.hpp"

#include <limits>

namespace polar {

namespace {

std::array<double, 6> arr(const PhaseState& s)
{
    return {s.q[0], s.q[1], s.q[2], s.p[0], s.p[1], s.p[2]};
}

void check_domain(const PhaseState& s)
{
    for (int i = 0; i < 3; ++i)
        if (!std::isfinite(s.q[i]) || !std::isfinite(s.p[i]))
            throw DomainError("non-finite phase state");
    const double mu = s.frame.mu;
    switch (s.frame.tag) {
    case FrameTag::Barycentric:
        if ((s.q - Vec3(1.0 - mu, 0, 0)).norm() == 0.0 && mu > 0.0)
            throw DomainError("collision with the moon (small primary)");
        if ((s.q - Vec3(-mu, 0, 0)).norm() == 0.0 && mu < 1.0)
            throw DomainError("collision with the earth (large primary)");
        break;
    case FrameTag::MoonCentered:
        if (s.q.norm() == 0.0)
            throw DomainError("collision with the moon (small primary)");
        if ((s.q + Vec3(1.0, 0, 0)).norm() == 0.0 && mu < 1.0)
            throw DomainError("collision with the earth (large primary)");
        break;
    case FrameTag::HillRescaled:
        if (s.q.norm() == 0.0)
            throw DomainError("collision with the moon (small primary)");
        if (1.0 + std::cbrt(s.frame.mu) * (2.0 * s.q[0] + std::cbrt(s.frame.mu) * s.q.squaredNorm()) <= 0.0)
            throw DomainError("collision with the earth (large primary)");
        break;
    }
}

} // namespace

void Frame::validate() const
{
    if (!(mu >= 0.0 && mu <= 1.0))
        throw std::invalid_argument("Frame: mass ratio must lie in [0, 1]");
    if (!std::isfinite(omega))
        throw std::invalid_argument("Frame: rotation frequency must be finite");
}

const char* to_string(FrameTag tag)
{
    switch (tag) {
    case FrameTag::Barycentric: return "barycentric";
    case FrameTag::MoonCentered: return "moon-centered";
    case FrameTag::HillRescaled: return "hill";
    }
    return "unknown";
}

Vec6 PhaseState::vec() const
{
    Vec6 x;
    x << q, p;
    return x;
}

PhaseState PhaseState::from(const Vec6& x, const Frame& frame)
{
    return PhaseState{x.head<3>(), x.tail<3>(), frame};
}

double eval_energy(const PhaseState& state)
{
    state.frame.validate();
    check_domain(state);
    return hamiltonian(state.frame, arr(state));
}

Vec6 vector_field(const PhaseState& state)
{
    state.frame.validate();
    check_domain(state);
    const auto f = hamiltonian_field(state.frame, arr(state));
    return Eigen::Map<const Vec6>(f.data());
}

Mat6 field_jacobian(const PhaseState& state)
{
    state.frame.validate();
    check_domain(state);
    const auto jac = jacobian<6, 6>([&](const auto& y) { return hamiltonian_field(state.frame, y); }, arr(state));
    Mat6 A;
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c)
            A(r, c) = jac[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    return A;
}

Mat6 variational_field(const PhaseState& state, const Mat6& M)
{
    if (!M.allFinite())
        throw DomainError("variational_field: non-finite matrix");
    return field_jacobian(state) * M;
}

double moon_centered_energy_shift(double mu)
{
    return 0.5 * (1.0 - mu) * (1.0 - mu);
}

PhaseState to_moon_centered(const PhaseState& s)
{
    if (s.frame.tag != FrameTag::Barycentric)
        throw std::invalid_argument("to_moon_centered: expected a barycentric state");
    const double m1 = 1.0 - s.frame.mu;
    PhaseState out = s;
    out.q[0] -= m1;
    out.p[1] += m1;
    out.frame.tag = FrameTag::MoonCentered;
    return out;
}

PhaseState to_barycentric(const PhaseState& s)
{
    if (s.frame.tag != FrameTag::MoonCentered)
        throw std::invalid_argument("to_barycentric: expected a moon-centered state");
    const double m1 = 1.0 - s.frame.mu;
    PhaseState out = s;
    out.q[0] += m1;
    out.p[1] -= m1;
    out.frame.tag = FrameTag::Barycentric;
    return out;
}

PhaseState rescale_hill(const PhaseState& s)
{
    if (s.frame.tag != FrameTag::MoonCentered)
        throw std::invalid_argument("rescale_hill: expected a moon-centered state");
    if (!(s.frame.mu > 0.0))
        throw std::invalid_argument("rescale_hill: rescaling undefined for mu = 0");
    const double k = 1.0 / std::cbrt(s.frame.mu);
    PhaseState out = s;
    out.q *= k;
    out.p *= k;
    out.frame.tag = FrameTag::HillRescaled;
    return out;
}

PhaseState unrescale_hill(const PhaseState& s)
{
    if (s.frame.tag != FrameTag::HillRescaled)
        throw std::invalid_argument("unrescale_hill: expected a Hill-rescaled state");
    if (!(s.frame.mu > 0.0))
        throw std::invalid_argument("unrescale_hill: rescaling undefined for mu = 0");
    const double k = std::cbrt(s.frame.mu);
    PhaseState out = s;
    out.q *= k;
    out.p *= k;
    out.frame.tag = FrameTag::MoonCentered;
    return out;
}

double hill_energy_from_moon_centered(double h_m, double mu)
{
    if (!(mu > 0.0))
        throw std::invalid_argument("hill energy conversion undefined for mu = 0");
    return (h_m + 1.0 - mu) / std::pow(mu, 2.0 / 3.0);
}

double moon_centered_energy_from_hill(double h_hat, double mu)
{
    if (!(mu > 0.0))
        throw std::invalid_argument("hill energy conversion undefined for mu = 0");
    return h_hat * std::pow(mu, 2.0 / 3.0) - (1.0 - mu);
}

double moon_centered_energy_from_barycentric(double h, double mu)
{
    return h + moon_centered_energy_shift(mu);
}

double barycentric_energy_from_moon_centered(double h_m, double mu)
{
    return h_m - moon_centered_energy_shift(mu);
}

Vec3 to_physical_km(const PhaseState& state, double d_km)
{
    switch (state.frame.tag) {
    case FrameTag::MoonCentered: return state.q * d_km;
    case FrameTag::HillRescaled: return state.q * (std::cbrt(state.frame.mu) * d_km);
    case FrameTag::Barycentric: return to_moon_centered(state).q * d_km;
    }
    return Vec3::Zero();
}

double distance_km(const PhaseState& state, double d_km)
{
    return to_physical_km(state, d_km).norm();
}

double hill_truncated_energy(const Vec6& x, double omega)
{
    const Vec3 q = x.head<3>();
    const Vec3 p = x.tail<3>();
    return 0.5 * p.squaredNorm() - 1.0 / q.norm() + omega * (q[0] * p[1] - q[1] * p[0]) + 0.5 * q.squaredNorm() -
           1.5 * q[0] * q[0];
}

Vec6 hill_critical_point(int sign)
{
    const double c = std::cbrt(1.0 / 3.0) * (sign >= 0 ? 1.0 : -1.0);
    Vec6 x;
    x << c, 0, 0, 0, -c, 0;
    return x;
}

double hill_critical_energy()
{
    return -0.5 * std::pow(3.0, 4.0 / 3.0);
}

} // namespace polar
