#include "polar/stability.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>

namespace polar {

namespace {

Mat6 symplectic_J()
{
    Mat6 J = Mat6::Zero();
    J.topRightCorner<3, 3>().setIdentity();
    J.bottomLeftCorner<3, 3>() = -Eigen::Matrix3d::Identity();
    return J;
}

// Roots of x^2 - r x + 1 = 0, larger modulus first.
std::array<std::complex<double>, 2> reciprocal_pair(std::complex<double> r)
{
    const std::complex<double> disc = std::sqrt(r * r - 4.0);
    std::complex<double> a = 0.5 * (r + disc), b = 0.5 * (r - disc);
    if (std::abs(b) > std::abs(a))
        std::swap(a, b);
    if (std::abs(a) > 0.0)
        b = 1.0 / a;
    return {a, b};
}

PairKind pair_kind(double rho, double tol)
{
    if (rho * rho < 4.0) {
        const double im = 0.5 * std::sqrt(4.0 - rho * rho);
        if (im > tol)
            return PairKind::Elliptic;
        return rho > 0.0 ? PairKind::Unit : PairKind::MinusUnit;
    }
    const double disc = std::sqrt(rho * rho - 4.0);
    const double big = 0.5 * (rho + std::copysign(disc, rho));
    if (std::abs(big - 1.0) <= tol)
        return PairKind::Unit;
    if (std::abs(big + 1.0) <= tol)
        return PairKind::MinusUnit;
    return big > 0.0 ? PairKind::PositiveHyperbolic : PairKind::NegativeHyperbolic;
}

} // namespace

const char* to_string(StabilityClass c)
{
    switch (c) {
    case StabilityClass::EllipticElliptic: return "EllipticElliptic";
    case StabilityClass::EllipticNegHyperbolic: return "EllipticNegHyperbolic";
    case StabilityClass::EllipticHyperbolic: return "EllipticHyperbolic";
    case StabilityClass::HyperbolicNegHyperbolic: return "HyperbolicNegHyperbolic";
    case StabilityClass::PositiveHyperbolicPair: return "PositiveHyperbolicPair";
    case StabilityClass::NegativeHyperbolicPair: return "NegativeHyperbolicPair";
    case StabilityClass::ComplexHyperbolic: return "ComplexHyperbolic";
    case StabilityClass::Degenerate: return "Degenerate";
    }
    return "Unknown";
}

Mat6 monodromy_from_half(const Mat6& A)
{
    const Mat6 J = symplectic_J();
    const Mat6 R = involution_matrix();
    const Mat6 Ainv = -J * A.transpose() * J;
    return R * Ainv * R * A;
}

Mat6 monodromy(const OrbitRecord& rec, const SolverConfig& cfg)
{
    return monodromy_from_half(half_period_flow(rec, cfg).A);
}

std::array<double, 7> characteristic_coefficients(const Mat6& M)
{
    std::array<double, 7> e{};
    e[0] = 1.0;
    for (unsigned mask = 1; mask < 64u; ++mask) {
        const int k = std::popcount(mask);
        int idx[6];
        int n = 0;
        for (int i = 0; i < 6; ++i)
            if (mask & (1u << i))
                idx[n++] = i;
        Eigen::MatrixXd sub(k, k);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c)
                sub(r, c) = M(idx[r], idx[c]);
        e[static_cast<std::size_t>(k)] += k == 1 ? sub(0, 0) : sub.partialPivLu().determinant();
    }
    return e;
}

MonodromySpectrum reduce_spectrum(const Mat6& M, const StabilityTolerances& tol,
                                  const std::optional<TrivialDirections>& trivial)
{
    if (!M.allFinite())
        throw std::domain_error("reduce_spectrum: non-finite monodromy");
    MonodromySpectrum sp;
    sp.tolerance = tol.classify;
    const auto e = characteristic_coefficients(M);
    // Synthetic division of the sextic by (x - 1)^2.
    sp.s1 = e[1] - 2.0;
    sp.s2 = e[2] - 2.0 * sp.s1 - 1.0;
    sp.s3 = e[3] - 2.0 * sp.s2 - sp.s1;
    sp.s4 = e[4] - 2.0 * sp.s3 - sp.s2;
    sp.det6 = M.determinant();

    // Trivial pair and reciprocity from a direct eigen-decomposition.
    Eigen::EigenSolver<Mat6> es(M, false);
    std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a - 1.0) < std::abs(b - 1.0); });
    sp.trivial_pair_eig_error = std::max(std::abs(ev[0] - 1.0), std::abs(ev[1] - 1.0));
    sp.trivial_pair_error = sp.trivial_pair_eig_error;
    if (trivial) {
        const Vec6& v = trivial->flow;
        const Vec6& g = trivial->gradient;
        const double la = v.dot(M * v) / v.squaredNorm();
        const double lb = g.dot(M.transpose() * g) / g.squaredNorm();
        sp.trivial_pair_error = std::max(std::abs(la - 1.0), std::abs(lb - 1.0));
    }
    if (sp.trivial_pair_error > tol.trivial)
        throw std::domain_error("reduce_spectrum: no trivial pair near 1 (error " +
                                std::to_string(sp.trivial_pair_error) + ")");
    double recip = 0.0;
    for (std::size_t i = 2; i < 6; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 2; j < 6; ++j)
            best = std::min(best, std::abs(ev[i] - 1.0 / ev[j]));
        recip = std::max(recip, best);
    }
    sp.reciprocity_residual = recip;

    double delta = sp.delta_krein();
    if (std::abs(delta) <= tol.krein_band * std::max(1.0, sp.s1 * sp.s1))
        delta = 0.0;
    if (delta >= 0.0) {
        const double root = std::sqrt(delta);
        const double q = 0.5 * (sp.s1 + std::copysign(root, sp.s1));
        sp.rho[0] = q;
        sp.rho[1] = q != 0.0 ? (sp.s2 - 2.0) / q : 0.5 * (sp.s1 - root);
        if (sp.rho[0] < sp.rho[1])
            std::swap(sp.rho[0], sp.rho[1]);
        for (std::size_t k = 0; k < 2; ++k) {
            const double r = sp.rho[k];
            std::array<std::complex<double>, 2> lam;
            if (r * r < 4.0) {
                const double im = 0.5 * std::sqrt(4.0 - r * r);
                lam = {std::complex<double>(0.5 * r, im), std::complex<double>(0.5 * r, -im)};
            } else {
                lam = reciprocal_pair(std::complex<double>(r, 0.0));
            }
            sp.eigenvalues[2 * k] = lam[0];
            sp.eigenvalues[2 * k + 1] = lam[1];
            sp.pairs[k] = pair_kind(r, tol.classify);
        }
    } else {
        sp.rho_complex = true;
        const std::complex<double> r(0.5 * sp.s1, 0.5 * std::sqrt(-delta));
        sp.rho = {r.real(), r.imag()};
        const auto lam = reciprocal_pair(r);
        sp.eigenvalues = {lam[0], std::conj(lam[0]), lam[1], std::conj(lam[1])};
        const bool on_circle = std::abs(std::abs(lam[0]) - 1.0) <= tol.classify;
        sp.pairs = {on_circle ? PairKind::Elliptic : PairKind::Complex, on_circle ? PairKind::Elliptic : PairKind::Complex};
    }
    sp.stability_class = classify(sp, tol);
    sp.period_doubling = sp.pairs[0] == PairKind::MinusUnit || sp.pairs[1] == PairKind::MinusUnit;
    return sp;
}

StabilityClass classify(const MonodromySpectrum& sp, const StabilityTolerances&)
{
    auto has = [&](PairKind k) { return sp.pairs[0] == k || sp.pairs[1] == k; };
    if (has(PairKind::Unit))
        return StabilityClass::Degenerate;
    if (has(PairKind::Complex))
        return StabilityClass::ComplexHyperbolic;
    auto norm = [](PairKind k) { return k == PairKind::MinusUnit ? PairKind::Elliptic : k; };
    PairKind a = norm(sp.pairs[0]), b = norm(sp.pairs[1]);
    if (static_cast<int>(a) > static_cast<int>(b))
        std::swap(a, b);
    using P = PairKind;
    if (a == P::Elliptic && b == P::Elliptic)
        return StabilityClass::EllipticElliptic;
    if (a == P::Elliptic && b == P::NegativeHyperbolic)
        return StabilityClass::EllipticNegHyperbolic;
    if (a == P::Elliptic && b == P::PositiveHyperbolic)
        return StabilityClass::EllipticHyperbolic;
    if (a == P::PositiveHyperbolic && b == P::NegativeHyperbolic)
        return StabilityClass::HyperbolicNegHyperbolic;
    if (a == P::PositiveHyperbolic)
        return StabilityClass::PositiveHyperbolicPair;
    return StabilityClass::NegativeHyperbolicPair;
}

OrbitStability orbit_stability(const OrbitRecord& rec, const SolverConfig& cfg, const StabilityTolerances& tol)
{
    OrbitStability out;
    out.M = monodromy(rec, cfg);
    const GammaParams g = rec.params(cfg.omega);
    const Vec6 X0 = rec.section.state();
    TrivialDirections dirs{gamma_vector_field(g, X0).first, gamma_gradient(g, X0)};
    out.spectrum = reduce_spectrum(out.M, tol, dirs);
    return out;
}

std::vector<double> rotating_kepler_degeneracies(int k_max)
{
    if (k_max < 1)
        throw std::invalid_argument("rotating_kepler_degeneracies: k_max must be at least 1");
    std::vector<double> out;
    for (int k = 1; k <= k_max; ++k)
        out.push_back(-0.5 * std::pow(static_cast<double>(k), -2.0 / 3.0));
    return out;
}

} // namespace polar
