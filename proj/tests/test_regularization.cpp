#include <doctest.h>

#include "polar/orbit.hpp"

#include <cmath>
#include <random>

using namespace polar;

namespace {

std::array<double, 6> arr(const Vec6& x)
{
    return {x[0], x[1], x[2], x[3], x[4], x[5]};
}

Vec3 random_vec(std::mt19937& rng, double scale)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    return Vec3(u(rng), u(rng), u(rng));
}

} // namespace

TEST_SUITE("regularization") {

TEST_CASE("Jordan algebra: commutative, inverse, Jordan identity")
{
    const Jordan2 x{0.3, -1.2, 0.7}, y{-0.4, 0.5, 2.0};
    CHECK(jordan_mul(x, y) == jordan_mul(y, x));
    const Jordan2 e = jordan_mul(x, jordan_inv(x));
    CHECK(e.z0 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(e.z1) + std::abs(e.z2) < 1e-15);
    const Jordan2 x2 = jordan_mul(x, x);
    const Jordan2 a = jordan_mul(jordan_mul(x2, y), x);
    const Jordan2 b = jordan_mul(x2, jordan_mul(y, x));
    CHECK(a.z0 == doctest::Approx(b.z0));
    CHECK(a.z1 == doctest::Approx(b.z1));
    CHECK(a.z2 == doctest::Approx(b.z2));
    CHECK_THROWS_AS(jordan_inv(Jordan2{0, 0, 0}), DomainError);
}

TEST_CASE("Belbruno transform round trips")
{
    std::mt19937 rng(42);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Vec3 q = random_vec(rng, 2.0), p = random_vec(rng, 2.0);
        const auto [Q, P] = belbruno_forward(q, p);
        const auto [q2, p2] = belbruno_inverse(Q, P);
        worst = std::max({worst, (q2 - q).norm() / std::max(1.0, q.norm()), (p2 - p).norm() / std::max(1.0, p.norm())});
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("Belbruno transform singular points")
{
    CHECK_THROWS_AS(belbruno_forward(Vec3(0.1, 0.2, 0.3), Vec3(0, -1, 0)), DomainError);
    CHECK_THROWS_AS(belbruno_inverse(Vec3(0, 0, -1), Vec3(1, 0, 0)), DomainError);
}

TEST_CASE("Gamma = K (H - h) off collision")
{
    std::mt19937 rng(1);
    for (double mu : {0.0, 0.01, 0.5, 1.0}) {
        for (int k = 0; k < 10; ++k) {
            const PhaseState s{random_vec(rng, 1.0), random_vec(rng, 1.0), Frame{FrameTag::HillRescaled, mu, 1.0}};
            const double h = -1.3;
            const Vec6 X = hill_to_reg(s);
            const double K = gamma_time_factor(arr(X));
            CHECK(gamma_hamiltonian({mu, h, 1.0}, X) == doctest::Approx(K * (eval_energy(s) - h)).epsilon(1e-11));
        }
    }
}

TEST_CASE("collision point lies on every level and has the expected gradient")
{
    Vec6 X;
    X << 0, 0, -1, 1, 0, 0;
    for (double mu : {0.0, 1e-6, 0.3, 1.0})
        for (double h : {-5.0, 0.0, 3.0}) {
            const GammaParams g{mu, h, 1.0};
            CHECK(std::abs(gamma_hamiltonian(g, X)) < 1e-15);
            Vec6 expect;
            expect << 0, 0, -1, 1, 0, 0;
            CHECK((gamma_gradient(g, X) - expect).norm() < 1e-14);
        }
}

TEST_CASE("regularized flow projects to the time-rescaled physical flow")
{
    std::mt19937 rng(4);
    const double mu = 0.05;
    const PhaseState s{random_vec(rng, 0.8) + Vec3(0, 0, 0.4), random_vec(rng, 0.8), Frame{FrameTag::HillRescaled, mu, 1.0}};
    const double h = eval_energy(s);
    const Vec6 X = hill_to_reg(s);
    const auto [f, K] = gamma_vector_field({mu, h, 1.0}, X);
    const double e = 1e-6;
    const PhaseState a = reg_to_hill(X + e * f, mu), b = reg_to_hill(X - e * f, mu);
    const Vec6 dx = (a.vec() - b.vec()) / (2 * e);
    CHECK((dx - K * vector_field(s)).norm() < 1e-6 * std::max(1.0, dx.norm()));
}

TEST_CASE("Gamma is invariant under the involution")
{
    std::mt19937 rng(8);
    for (int k = 0; k < 10; ++k) {
        Vec6 X;
        X << random_vec(rng, 1.0), random_vec(rng, 1.0);
        const GammaParams g{0.2, -0.7, 1.0};
        CHECK(gamma_hamiltonian(g, apply_involution(X)) == doctest::Approx(gamma_hamiltonian(g, X)).epsilon(1e-13));
    }
    const Mat6 R = involution_matrix();
    CHECK((R * R - Mat6::Identity()).norm() == 0.0);
}

TEST_CASE("Moser chart round trip and constraints")
{
    std::mt19937 rng(12);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Vec3 x = random_vec(rng, 3.0), y = random_vec(rng, 3.0);
        const MoserState m = moser_chart_to_sphere(x, y);
        CHECK(std::abs(m.f1()) < 1e-14);
        CHECK(std::abs(m.f2()) < 1e-13);
        const auto [x2, y2] = moser_sphere_to_chart(m);
        worst = std::max({worst, (x2 - x).norm() / std::max(1.0, x.norm()), (y2 - y).norm() / std::max(1.0, y.norm())});
    }
    CHECK(worst < 1e-13);
    MoserState pole;
    pole.xi << 1, 0, 0, 0;
    CHECK_THROWS_AS(moser_sphere_to_chart(pole), DomainError);
}

TEST_CASE("constrained Moser field is tangent to the constraint set")
{
    const Frame f{FrameTag::HillRescaled, 0.0, 1.0};
    const MoserState m = moser_chart_to_sphere(Vec3(0.3, -0.2, 0.9), Vec3(0.4, 0.1, 0.5));
    std::vector<double> z(8);
    for (int i = 0; i < 4; ++i) {
        z[i] = m.xi[i];
        z[i + 4] = m.eta[i];
    }
    const auto v = make_moser_field(f, -2.0)(z);
    double df1 = 0, df2 = 0;
    for (int i = 0; i < 4; ++i) {
        df1 += z[i] * v[i];
        df2 += z[i + 4] * v[i] + z[i] * v[i + 4];
    }
    CHECK(std::abs(df1) < 1e-13);
    CHECK(std::abs(df2) < 1e-13);
}

TEST_CASE("Gamma, Hill and Moser flows agree on an off-collision arc")
{
    const Frame fr{FrameTag::HillRescaled, 0.0, 1.0};
    const double h = -2.0, T = 0.4;
    Vec3 q(0.3, 0.1, 0.2), dir(0.2, -0.5, 0.4);
    dir.normalize();
    // Momentum magnitude on the level H = h, by bisection.
    auto excess = [&](double k) {
        return hamiltonian(fr, std::array<double, 6>{q[0], q[1], q[2], k * dir[0], k * dir[1], k * dir[2]}) - h;
    };
    double lo = 0.0, hi = 10.0;
    for (int i = 0; i < 200; ++i)
        (excess(0.5 * (lo + hi)) < 0.0 ? lo : hi) = 0.5 * (lo + hi);
    const Vec3 p = lo * dir;

    const std::vector<double> x0{q[0], q[1], q[2], p[0], p[1], p[2], 0.0};
    const VectorField hf = make_hamiltonian_field(fr, false);
    const auto direct = TaylorIntegrator(hf).propagate(x0, 0.0, T);
    const Vec3 qd(direct[0], direct[1], direct[2]), pd(direct[3], direct[4], direct[5]);

    const Vec6 X = hill_to_reg(PhaseState{q, p, fr});
    std::vector<double> X0(X.data(), X.data() + 6);
    X0.push_back(0.0);
    const auto cr = integrate_to_section(make_gamma_field({0.0, h, 1.0}, false), X0, Section::coordinate(6, T),
                                         CrossingDirection::Increasing, 100.0);
    Vec6 Xe;
    for (int i = 0; i < 6; ++i)
        Xe[i] = cr.state[i];
    const PhaseState g = reg_to_hill(Xe, 0.0);
    CHECK((g.q - qd).norm() < 1e-8);
    CHECK((g.p - pd).norm() < 1e-8);

    const MoserState ms = moser_chart_to_sphere(p, q);
    std::vector<double> z0(8);
    for (int i = 0; i < 4; ++i) {
        z0[i] = ms.xi[i];
        z0[i + 4] = ms.eta[i];
    }
    const VectorField mf = make_moser_field(fr, h);
    const auto z = TaylorIntegrator(mf).propagate(z0, 0.0, T);
    MoserState me;
    for (int i = 0; i < 4; ++i) {
        me.xi[i] = z[i];
        me.eta[i] = z[i + 4];
    }
    const auto [xm, ym] = moser_sphere_to_chart(me);
    CHECK((ym - qd).norm() < 1e-8);
    CHECK((xm - pd).norm() < 1e-8);
    CHECK(std::abs(me.f1()) < 1e-10);
    CHECK(std::abs(me.f2()) < 1e-10);
}

}
