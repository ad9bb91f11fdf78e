#pragma once

// Monodromy of symmetric periodic orbits and the reduction of its spectrum to
// the transverse quartic x^4 - s1 x^3 + s2 x^2 - s1 x + 1.

#include "polar/orbit.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace polar {

enum class StabilityClass {
    EllipticElliptic,
    EllipticNegHyperbolic,
    EllipticHyperbolic,
    HyperbolicNegHyperbolic,
    PositiveHyperbolicPair,
    NegativeHyperbolicPair,
    ComplexHyperbolic,
    Degenerate,
};

const char* to_string(StabilityClass c);

enum class PairKind { Elliptic, PositiveHyperbolic, NegativeHyperbolic, Complex, Unit, MinusUnit };

struct StabilityTolerances {
    /// Band around |lambda| = 1 and the real axis.
    double classify = 1e-7;
    /// Maximal distance of the trivial pair from 1.
    double trivial = 1e-4;
    /// Discriminant band treated as a double pair (relative to max(1, s1^2)).
    double krein_band = 1e-10;
};

struct MonodromySpectrum {
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
    double s4 = 0.0;
    double det6 = 0.0;
    std::array<std::complex<double>, 4> eigenvalues{};
    std::array<double, 2> rho{};
    bool rho_complex = false;
    std::array<PairKind, 2> pairs{};
    StabilityClass stability_class = StabilityClass::Degenerate;
    bool period_doubling = false;
    /// Distance of the trivial multipliers from 1. Measured through the flow
    /// direction (right eigenvector) and the energy gradient (left
    /// eigenvector) when these are supplied, otherwise from the eigenvalues.
    double trivial_pair_error = 0.0;
    /// Same quantity from a dense eigen-decomposition; the trivial pair is a
    /// Jordan block, so this carries an O(sqrt(eps |M|)) floor.
    double trivial_pair_eig_error = 0.0;
    double reciprocity_residual = 0.0;
    double tolerance = 1e-7;

    /// (2 - rho1)(2 - rho2): zero when 1 is a multiplier.
    double delta_deg() const { return s2 - 2.0 * s1 + 2.0; }
    /// (2 + rho1)(2 + rho2): zero when -1 is a multiplier.
    double delta_pd() const { return s2 + 2.0 * s1 + 2.0; }
    /// (rho1 - rho2)^2: zero at a Krein collision.
    double delta_krein() const { return s1 * s1 - 4.0 * s2 + 8.0; }
};

/// Full-period monodromy of the regularized flow, R A^{-1} R A with A the
/// half-period matrix and the symplectic inverse A^{-1} = -J A^T J.
Mat6 monodromy(const OrbitRecord& rec, const SolverConfig& cfg = {});
Mat6 monodromy_from_half(const Mat6& A);

/// Coefficients of det(x I - M) = sum_k (-1)^k e_k x^{6-k}, by principal minors.
std::array<double, 7> characteristic_coefficients(const Mat6& M);

/// Right eigenvector v (flow direction) and left eigenvector g (energy
/// gradient) of the trivial multipliers.
struct TrivialDirections {
    Vec6 flow;
    Vec6 gradient;
};

MonodromySpectrum reduce_spectrum(const Mat6& M, const StabilityTolerances& tol = {},
                                  const std::optional<TrivialDirections>& trivial = std::nullopt);
StabilityClass classify(const MonodromySpectrum& spec, const StabilityTolerances& tol = {});

struct OrbitStability {
    Mat6 M;
    MonodromySpectrum spectrum;
};
/// Monodromy and reduced spectrum of a converged orbit.
OrbitStability orbit_stability(const OrbitRecord& rec, const SolverConfig& cfg = {},
                               const StabilityTolerances& tol = {});

/// E_k = -1/2 k^{-2/3}: rectilinear Kepler orbits with period 2 pi k.
std::vector<double> rotating_kepler_degeneracies(int k_max);

} // namespace polar
