#include <doctest.h>

#include "polar/continuation.hpp"
#include "polar/stability.hpp"

#include <Eigen/LU>

#include <cmath>
#include <random>

using namespace polar;

namespace {

// Block matrix with a Jordan block at 1 plus the given 2x2 blocks, conjugated by a fixed random matrix.
Mat6 synthetic(const Eigen::Matrix2d& b1, const Eigen::Matrix2d& b2)
{
    Mat6 D = Mat6::Zero();
    D(0, 0) = D(1, 1) = D(0, 1) = 1.0;
    D.block<2, 2>(2, 2) = b1;
    D.block<2, 2>(4, 4) = b2;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    Mat6 P = Mat6::Identity();
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            P(i, j) += u(rng);
    return P * D * P.inverse();
}

Eigen::Matrix2d rotation(double a)
{
    Eigen::Matrix2d r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

} // namespace

TEST_SUITE("stability") {

TEST_CASE("identity is degenerate")
{
    const auto s = reduce_spectrum(Mat6::Identity());
    CHECK(s.s1 == doctest::Approx(4.0));
    CHECK(s.s2 == doctest::Approx(6.0));
    CHECK(s.delta_deg() == doctest::Approx(0.0));
    CHECK(s.stability_class == StabilityClass::Degenerate);
}

TEST_CASE("elliptic times positive hyperbolic")
{
    Eigen::Matrix2d hyp;
    hyp << 2.0, 0.0, 0.0, 0.5;
    const auto s = reduce_spectrum(synthetic(hyp, rotation(M_PI / 3)));
    CHECK(s.s1 == doctest::Approx(3.5).epsilon(1e-10));
    CHECK(s.s2 == doctest::Approx(4.5).epsilon(1e-10));
    CHECK(s.det6 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.stability_class == StabilityClass::EllipticHyperbolic);
    CHECK_FALSE(s.period_doubling);
}

TEST_CASE("negative hyperbolic pair and period doubling")
{
    Eigen::Matrix2d neg;
    neg << -3.0, 0.0, 0.0, -1.0 / 3.0;
    const auto s = reduce_spectrum(synthetic(neg, rotation(0.4)));
    CHECK(s.stability_class == StabilityClass::EllipticNegHyperbolic);

    const auto pd = reduce_spectrum(synthetic(rotation(M_PI), rotation(0.4)));
    CHECK(std::abs(pd.delta_pd()) < 1e-10);
    CHECK(pd.period_doubling);
}

TEST_CASE("complex quartet")
{
    const double r = 1.5, a = 0.7;
    Eigen::Matrix4d B = Eigen::Matrix4d::Zero();
    B.block<2, 2>(0, 0) = r * rotation(a);
    B.block<2, 2>(2, 2) = rotation(a) / r;
    Mat6 D = Mat6::Zero();
    D(0, 0) = D(1, 1) = D(0, 1) = 1.0;
    D.block<4, 4>(2, 2) = B;
    const auto s = reduce_spectrum(D);
    CHECK(s.rho_complex);
    CHECK(s.stability_class == StabilityClass::ComplexHyperbolic);
}

TEST_CASE("symplectic half-period composition")
{
    // A = exp(J S) for symmetric S is symplectic; M built from it has det 1.
    Mat6 S = Mat6::Zero();
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j)
            S(i, j) = S(j, i) = u(rng);
    Mat6 J = Mat6::Zero();
    J.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
    J.block<3, 3>(3, 0) = -Eigen::Matrix3d::Identity();
    Mat6 A = Mat6::Identity(), term = Mat6::Identity();
    for (int k = 1; k < 30; ++k) {
        term = term * (J * S) / k;
        A += term;
    }
    const Mat6 M = monodromy_from_half(A);
    CHECK(M.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((M.transpose() * J * M - J).norm() < 1e-12);
}

TEST_CASE("rotating Kepler degeneracy energies")
{
    const auto e = rotating_kepler_degeneracies(3);
    REQUIRE(e.size() == 3);
    CHECK(e[0] == doctest::Approx(-0.5));
    CHECK(e[1] == doctest::Approx(-0.5 * std::pow(2.0, -2.0 / 3.0)));
    CHECK(e[2] == doctest::Approx(-0.5 * std::pow(3.0, -2.0 / 3.0)));
}

TEST_CASE("orbit spectra satisfy the symplectic invariants")
{
    for (double h : {-2.0, -0.95, 0.0}) {
        const auto st = orbit_stability(orbit_at(0.0, h));
        CHECK(std::abs(st.spectrum.det6 - 1.0) < 1e-8);
        CHECK(st.spectrum.trivial_pair_error < 1e-6);
        CHECK(st.spectrum.reciprocity_residual < 1e-7);
        CHECK(std::abs(st.spectrum.s3 - st.spectrum.s1) < 1e-7);
    }
}

TEST_CASE("Kepler limit: eigenvalues stay on the unit circle")
{
    const auto st = orbit_stability(orbit_at(1.0, -0.4));
    for (const auto& l : st.spectrum.eigenvalues)
        CHECK(std::abs(std::abs(l) - 1.0) < 1e-6);
}

}
