#pragma once

// Collision regularization: the Jordan algebra A_2, the Belbruno transform
// with its regularized Hamiltonian Gamma, and the Moser stereographic chart
// with constrained Hamiltonian fields on T*S^3.

#include "polar/dynamics.hpp"
#include "polar/taylor.hpp"

#include <Eigen/Core>

#include <array>
#include <utility>

namespace polar {

// ---------------------------------------------------------------------------
// Jordan algebra A_2

struct Jordan2 {
    double z0 = 0.0;
    double z1 = 0.0;
    double z2 = 0.0;

    double norm2() const { return z0 * z0 + z1 * z1 + z2 * z2; }
    bool operator==(const Jordan2&) const = default;
};

Jordan2 jordan_mul(const Jordan2& x, const Jordan2& y);
Jordan2 jordan_conj(const Jordan2& z);
Jordan2 jordan_inv(const Jordan2& z);
/// x(yz) - (xy)z
Jordan2 jordan_associator(const Jordan2& x, const Jordan2& y, const Jordan2& z);

// ---------------------------------------------------------------------------
// Belbruno transform. Callers pass Hill-ordered (q, p); the exchange of the
// first two axes happens inside.

template <class T>
void belbruno_forward(const std::array<T, 6>& x, std::array<T, 6>& X)
{
    const T q1 = x[1], q2 = x[0], q3 = x[2];
    const T p1 = x[4], p2 = x[3], p3 = x[5];
    const T pp = p1 * p1 + p2 * p2 + p3 * p3;
    const T qp = q1 * p1 + q2 * p2 + q3 * p3;
    const T d = (p1 + 1.0) * (p1 + 1.0) + p2 * p2 + p3 * p3;
    const T a = 0.5 * (pp + 1.0) + p1;
    X[0] = 0.5 * (1.0 - pp) * q1 + qp * (p1 + 1.0);
    X[1] = a * q2 - p2 * q1 - qp * p2;
    X[2] = a * q3 - p3 * q1 - qp * p3;
    X[3] = (pp - 1.0) / d;
    X[4] = 2.0 * p2 / d;
    X[5] = 2.0 * p3 / d;
}

template <class T>
void belbruno_inverse_position(const std::array<T, 6>& X, std::array<T, 3>& q)
{
    const T &Q1 = X[0], &Q2 = X[1], &Q3 = X[2];
    const T &P1 = X[3], &P2 = X[4], &P3 = X[5];
    const T PP = P1 * P1 + P2 * P2 + P3 * P3;
    const T QP = Q1 * P1 + Q2 * P2 + Q3 * P3;
    const T a = 0.5 * (PP + 1.0) - P1;
    // Hill order: q_hat = (q2, q1, q3) of the swapped coordinates.
    q[1] = 0.5 * (1.0 - PP) * Q1 + QP * (P1 - 1.0);
    q[0] = a * Q2 + P2 * Q1 - QP * P2;
    q[2] = a * Q3 + P3 * Q1 - QP * P3;
}

/// |P - e1|^2 times the Hill-ordered momentum; finite at collision.
template <class T>
void belbruno_scaled_momentum(const std::array<T, 6>& X, std::array<T, 3>& pt)
{
    const T &P1 = X[3], &P2 = X[4], &P3 = X[5];
    pt[0] = 2.0 * P2;
    pt[1] = 1.0 - (P1 * P1 + P2 * P2 + P3 * P3);
    pt[2] = 2.0 * P3;
}

template <class T>
void belbruno_inverse(const std::array<T, 6>& X, std::array<T, 6>& x)
{
    std::array<T, 3> q, pt;
    belbruno_inverse_position(X, q);
    belbruno_scaled_momentum(X, pt);
    const T d = (X[3] - 1.0) * (X[3] - 1.0) + X[4] * X[4] + X[5] * X[5];
    x = {q[0], q[1], q[2], pt[0] / d, pt[1] / d, pt[2] / d};
}

std::pair<Vec3, Vec3> belbruno_forward(const Vec3& q, const Vec3& p);
std::pair<Vec3, Vec3> belbruno_inverse(const Vec3& Q, const Vec3& P);

// ---------------------------------------------------------------------------
// Regularized Hamiltonian Gamma = K (H^mu - h), K = |q| = |P - e1|^2 |Q| / 2.

struct GammaParams {
    double mu = 0.0;
    double h = 0.0;
    double omega = 1.0;
};

struct RegState {
    Vec3 Q = Vec3::Zero();
    Vec3 P = Vec3::Zero();
    double s = 0.0;
    double t = 0.0;
    double h = 0.0;
    double mu = 0.0;

    Vec6 vec() const;
};

template <class T>
T gamma_time_factor(const std::array<T, 6>& X)
{
    using std::sqrt;
    const T nQ = sqrt(X[0] * X[0] + X[1] * X[1] + X[2] * X[2]);
    const T d = (X[3] - 1.0) * (X[3] - 1.0) + X[4] * X[4] + X[5] * X[5];
    return 0.5 * d * nQ;
}

template <class T>
T gamma_hamiltonian(const GammaParams& g, const std::array<T, 6>& X)
{
    using std::sqrt;
    const T nQ = sqrt(X[0] * X[0] + X[1] * X[1] + X[2] * X[2]);
    const T dm = (X[3] - 1.0) * (X[3] - 1.0) + X[4] * X[4] + X[5] * X[5];
    const T dp = (X[3] + 1.0) * (X[3] + 1.0) + X[4] * X[4] + X[5] * X[5];
    const T K = 0.5 * dm * nQ;
    std::array<T, 3> q, pt;
    belbruno_inverse_position(X, q);
    belbruno_scaled_momentum(X, pt);
    const T kepler = 0.25 * nQ * dp - 1.0;
    const T rotation = 0.5 * g.omega * nQ * (q[0] * pt[1] - q[1] * pt[0]);
    return kepler + rotation + K * (hill_tidal(g.mu, q[0], q[1], q[2]) - g.h);
}

/// (Gamma_P, -Gamma_Q, dt/ds) on a 7-vector (Q, P, t).
template <class T>
std::array<T, 7> gamma_field7(const GammaParams& g, const std::array<T, 7>& y)
{
    std::array<T, 6> X{y[0], y[1], y[2], y[3], y[4], y[5]};
    auto gr = gradient<6>([&g](const auto& z) { return gamma_hamiltonian(g, z); }, X);
    return {gr[3], gr[4], gr[5], -gr[0], -gr[1], -gr[2], gamma_time_factor(X)};
}

double gamma_hamiltonian(const GammaParams& g, const Vec6& X);
Vec6 gamma_gradient(const GammaParams& g, const Vec6& X);
/// Regularized field (Q', P') together with dt/ds.
std::pair<Vec6, double> gamma_vector_field(const GammaParams& g, const Vec6& X);

/// Regularized field on (Q, P, t); with_jacobian records the 6x6 linearization.
VectorField make_gamma_field(const GammaParams& g, bool with_jacobian);
/// Hamiltonian field in a physical frame on (q, p, t).
VectorField make_hamiltonian_field(const Frame& f, bool with_jacobian);

/// Hill-rescaled phase state of a regularized point (not at collision).
PhaseState reg_to_hill(const Vec6& X, double mu, double omega = 1.0);
Vec6 hill_to_reg(const PhaseState& s);

/// Symmetry involution R = diag(-1, 1, 1, 1, -1, -1) of the regularized flow.
Mat6 involution_matrix();
Vec6 apply_involution(const Vec6& X);

// ---------------------------------------------------------------------------
// Moser chart, with x the chart momentum and y the chart position.

struct MoserState {
    Eigen::Vector4d xi = Eigen::Vector4d::Zero();
    Eigen::Vector4d eta = Eigen::Vector4d::Zero();

    double f1() const { return 0.5 * xi.squaredNorm() - 0.5; }
    double f2() const { return xi.dot(eta); }
};

MoserState moser_chart_to_sphere(const Vec3& x, const Vec3& y);
std::pair<Vec3, Vec3> moser_sphere_to_chart(const MoserState& s);

/// Chart coordinates of an ambient point (xi, eta) in R^8, usable off the sphere.
template <class T>
void moser_chart(const std::array<T, 8>& z, std::array<T, 3>& x, std::array<T, 3>& y)
{
    const T w = 1.0 - z[0];
    for (std::size_t i = 0; i < 3; ++i) {
        x[i] = -z[i + 1] / w;
        y[i] = z[4] * z[i + 1] + w * z[i + 5];
    }
}

/// Ambient Hamiltonian H^mu(q = y, p = x) - h.
template <class T>
T moser_hill_hamiltonian(const Frame& f, double h, const std::array<T, 8>& z)
{
    std::array<T, 3> x, y;
    moser_chart(z, x, y);
    return hamiltonian(f, std::array<T, 6>{y[0], y[1], y[2], x[0], x[1], x[2]}) - h;
}

/// X_{H_N} + c1 X_{f1} + c2 X_{f2}, with multipliers fixed by tangency to
/// {f1 = f2 = 0}. HN is a generic callable on std::array<S, 8>.
template <class F, class T>
std::array<T, 8> constrained_field(F&& HN, const std::array<T, 8>& z)
{
    auto g = gradient<8>(HN, z);
    std::array<T, 8> X;
    for (std::size_t i = 0; i < 4; ++i) {
        X[i] = g[i + 4];
        X[i + 4] = -g[i];
    }
    T xx = z[0] * z[0];
    T df1 = z[0] * X[0];
    T df2 = z[4] * X[0] + z[0] * X[4];
    for (std::size_t i = 1; i < 4; ++i) {
        xx += z[i] * z[i];
        df1 += z[i] * X[i];
        df2 += z[i + 4] * X[i] + z[i] * X[i + 4];
    }
    const T c1 = df2 / xx;
    const T c2 = -df1 / xx;
    for (std::size_t i = 0; i < 4; ++i) {
        X[i] += c2 * z[i];
        X[i + 4] += -c1 * z[i] - c2 * z[i + 4];
    }
    return X;
}

/// Constrained Moser field of the Hill Hamiltonian on R^8.
VectorField make_moser_field(const Frame& f, double h);

} // namespace polar
