#include "polar/regularization.hpp"

#include <cmath>

namespace polar {

namespace {

std::array<double, 6> to_arr(const Vec6& x)
{
    return {x[0], x[1], x[2], x[3], x[4], x[5]};
}

Vec6 from_arr(const std::array<double, 6>& a)
{
    return Eigen::Map<const Vec6>(a.data());
}

} // namespace

Jordan2 jordan_mul(const Jordan2& x, const Jordan2& y)
{
    return {x.z0 * y.z0 - x.z1 * y.z1 - x.z2 * y.z2, x.z0 * y.z1 + y.z0 * x.z1, x.z0 * y.z2 + y.z0 * x.z2};
}

Jordan2 jordan_conj(const Jordan2& z)
{
    return {z.z0, -z.z1, -z.z2};
}

Jordan2 jordan_inv(const Jordan2& z)
{
    const double n = z.norm2();
    if (n == 0.0)
        throw DomainError("jordan_inv: zero element has no inverse");
    const Jordan2 c = jordan_conj(z);
    return {c.z0 / n, c.z1 / n, c.z2 / n};
}

Jordan2 jordan_associator(const Jordan2& x, const Jordan2& y, const Jordan2& z)
{
    const Jordan2 a = jordan_mul(x, jordan_mul(y, z));
    const Jordan2 b = jordan_mul(jordan_mul(x, y), z);
    return {a.z0 - b.z0, a.z1 - b.z1, a.z2 - b.z2};
}

std::pair<Vec3, Vec3> belbruno_forward(const Vec3& q, const Vec3& p)
{
    // p_swapped = (p2, p1, p3); |p_swapped + e1|^2 = 0 at p = (0, -1, 0).
    if (p[0] * p[0] + (p[1] + 1.0) * (p[1] + 1.0) + p[2] * p[2] == 0.0)
        throw DomainError("belbruno_forward: momentum at infinity");
    std::array<double, 6> X;
    belbruno_forward(std::array<double, 6>{q[0], q[1], q[2], p[0], p[1], p[2]}, X);
    return {Vec3(X[0], X[1], X[2]), Vec3(X[3], X[4], X[5])};
}

std::pair<Vec3, Vec3> belbruno_inverse(const Vec3& Q, const Vec3& P)
{
    if ((P - Vec3(1.0, 0.0, 0.0)).squaredNorm() == 0.0)
        throw DomainError("belbruno_inverse: point at collision");
    std::array<double, 6> x;
    belbruno_inverse(std::array<double, 6>{Q[0], Q[1], Q[2], P[0], P[1], P[2]}, x);
    return {Vec3(x[0], x[1], x[2]), Vec3(x[3], x[4], x[5])};
}

Vec6 RegState::vec() const
{
    Vec6 x;
    x << Q, P;
    return x;
}

double gamma_hamiltonian(const GammaParams& g, const Vec6& X)
{
    return gamma_hamiltonian(g, to_arr(X));
}

Vec6 gamma_gradient(const GammaParams& g, const Vec6& X)
{
    return from_arr(gradient<6>([&g](const auto& z) { return gamma_hamiltonian(g, z); }, to_arr(X)));
}

std::pair<Vec6, double> gamma_vector_field(const GammaParams& g, const Vec6& X)
{
    const Vec6 gr = gamma_gradient(g, X);
    Vec6 f;
    f << gr.tail<3>(), -gr.head<3>();
    return {f, gamma_time_factor(to_arr(X))};
}

VectorField make_gamma_field(const GammaParams& g, bool with_jacobian)
{
    auto f = [g](const auto& y) { return gamma_field7(g, y); };
    if (with_jacobian)
        return record_field<7, 6>(f);
    return record_field<7>(f);
}

VectorField make_hamiltonian_field(const Frame& fr, bool with_jacobian)
{
    auto f = [fr](const auto& y) {
        using T = std::decay_t<decltype(y[0])>;
        auto v = hamiltonian_field(fr, std::array<T, 6>{y[0], y[1], y[2], y[3], y[4], y[5]});
        return std::array<T, 7>{v[0], v[1], v[2], v[3], v[4], v[5], T(1.0)};
    };
    if (with_jacobian)
        return record_field<7, 6>(f);
    return record_field<7>(f);
}

PhaseState reg_to_hill(const Vec6& X, double mu, double omega)
{
    const auto [q, p] = belbruno_inverse(Vec3(X.head<3>()), Vec3(X.tail<3>()));
    return PhaseState{q, p, Frame{FrameTag::HillRescaled, mu, omega}};
}

Vec6 hill_to_reg(const PhaseState& s)
{
    if (s.frame.tag != FrameTag::HillRescaled)
        throw std::invalid_argument("hill_to_reg: expected a Hill-rescaled state");
    const auto [Q, P] = belbruno_forward(s.q, s.p);
    Vec6 X;
    X << Q, P;
    return X;
}

Mat6 involution_matrix()
{
    Vec6 d;
    d << -1, 1, 1, 1, -1, -1;
    return d.asDiagonal();
}

Vec6 apply_involution(const Vec6& X)
{
    return involution_matrix() * X;
}

MoserState moser_chart_to_sphere(const Vec3& x, const Vec3& y)
{
    const double xx = x.squaredNorm();
    const double xy = x.dot(y);
    MoserState s;
    s.xi[0] = (xx - 1.0) / (xx + 1.0);
    s.xi.tail<3>() = -2.0 * x / (xx + 1.0);
    s.eta[0] = -xy;
    s.eta.tail<3>() = 0.5 * (xx + 1.0) * y - xy * x;
    return s;
}

std::pair<Vec3, Vec3> moser_sphere_to_chart(const MoserState& s)
{
    if (s.xi[0] == 1.0)
        throw DomainError("moser_sphere_to_chart: north pole, chart excluded");
    std::array<double, 8> z;
    for (int i = 0; i < 4; ++i) {
        z[static_cast<std::size_t>(i)] = s.xi[i];
        z[static_cast<std::size_t>(i) + 4] = s.eta[i];
    }
    std::array<double, 3> x, y;
    moser_chart(z, x, y);
    return {Vec3(x[0], x[1], x[2]), Vec3(y[0], y[1], y[2])};
}

VectorField make_moser_field(const Frame& fr, double h)
{
    return record_field<8>([fr, h](const auto& z) {
        return constrained_field([&](const auto& w) { return moser_hill_hamiltonian(fr, h, w); }, z);
    });
}

} // namespace polar
