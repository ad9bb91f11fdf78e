#pragma once

// Polar periodic orbits: the mu = 0 collision family on the z-axis and its
// continuation as symmetric periodic orbits of the regularized flow, found by
// half-period shooting on the section {Q1 = P2 = P3 = 0}.

#include "polar/regularization.hpp"
#include "polar/taylor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace polar {

/// Positive root d of z^3 - 2hz - 2 = 0, i.e. V(d) = h with V(z) = -1/z + z^2/2.
double amplitude(double h);
/// V(z) = -1/z + z^2/2.
double axis_potential(double z);
/// Physical period of the mu = 0 collision orbit at energy h.
double collision_period(double h);

struct SectionPoint {
    double Q2 = 0.0;
    double P1 = 1.0;
    double Q3 = -1.0;
    double h = 0.0;
    double mu = 0.0;

    Vec6 state() const;
};

struct OrbitRecord {
    SectionPoint section;
    double half_period_s = 0.0;
    double period_t = 0.0;
    double delta = 0.0;
    double residual = 0.0;
    /// Largest |q3| along the orbit, Hill-rescaled units.
    double amplitude = 0.0;
    /// Smallest and largest |q| along the orbit, Hill-rescaled units.
    double periapsis = 0.0;
    double apoapsis = 0.0;
    int iterations = 0;
    bool near_degenerate = false;

    GammaParams params(double omega = 1.0) const { return {section.mu, section.h, omega}; }
};

struct SolverConfig {
    IntegratorConfig integrator;
    double tol = 1e-12;
    int max_iter = 25;
    double delta_warn = 1e-8;
    double q3_tol = 1e-14;
    double omega = 1.0;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Q3 with Gamma(0, Q2, Q3, P1, 0, 0) = 0 by safeguarded Newton.
double solve_Q3(double Q2, double P1, double h, double mu, double Q3_guess = -1.0, double omega = 1.0);

/// Exact collision section point (valid on the invariant z-axis, mu in {0, 1})
/// and the fictitious half period to the next section crossing.
struct CollisionSeed {
    SectionPoint point;
    double half_period_s = 0.0;
    double half_period_t = 0.0;
};
CollisionSeed collision_seed(double h, double mu = 0.0, const SolverConfig& cfg = {});

/// Newton shooting on (S, Q2, P1). `S_guess` is the full fictitious period.
OrbitRecord find_polar_orbit(double h, double mu, const SectionPoint& guess, double S_guess,
                             const SolverConfig& cfg = {});

/// Shooting residual (Q1, P2, P3) at S/2 and its Jacobian in (S, Q2, P1),
/// with Q3 re-solved on the energy level.
struct ShootingEval {
    Eigen::Vector3d F = Eigen::Vector3d::Zero();
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    double Q3 = -1.0;
    Vec6 end = Vec6::Zero();
    double t_half = 0.0;
};
ShootingEval shooting_residual(double h, double mu, double S, double Q2, double P1, double Q3_guess,
                               const SolverConfig& cfg = {});
ShootingEval shooting_residual(TaylorIntegrator& ti, const GammaParams& g, double S, double Q2, double P1,
                               double Q3_guess);
/// Record of a converged shooting point (computes apsides).
OrbitRecord make_record(double h, double mu, double S, double Q2, double P1, const ShootingEval& ev,
                        int iterations, const SolverConfig& cfg = {});

/// Half-period state transition matrix A and final state of a record.
struct HalfPeriodFlow {
    Vec6 end;
    double t_half = 0.0;
    Mat6 A;
};
HalfPeriodFlow half_period_flow(const OrbitRecord& rec, const SolverConfig& cfg = {});

struct OrbitSample {
    double s = 0.0;
    double t = 0.0;
    Vec6 X;          // regularized (Q, P)
    PhaseState state; // physical; momenta are NaN at collision samples
    bool collision = false;
};

/// n samples uniform in fictitious time over one full period, physical part in `frame`.
std::vector<OrbitSample> dense_orbit(const OrbitRecord& rec, int n_samples, FrameTag frame = FrameTag::HillRescaled,
                                     const SolverConfig& cfg = {});

/// Periapsis/apoapsis (Hill units) and amplitude from the dense output.
struct Apsides {
    double periapsis = 0.0;
    double apoapsis = 0.0;
    double amplitude = 0.0;
};
Apsides orbit_apsides(const OrbitRecord& rec, const SolverConfig& cfg = {});

/// Closure and symmetry residuals of a converged orbit.
struct OrbitChecks {
    double closure = 0.0;
    double symmetry = 0.0;
    /// |H - h| scaled by max(1, |p|^2/2 + 1/|q|), and unscaled.
    double energy = 0.0;
    double energy_abs = 0.0;
    double gamma_drift = 0.0;
};
OrbitChecks check_orbit(const OrbitRecord& rec, const SolverConfig& cfg = {});

/// Hill-rescaled distance to moon-centered distance.
double hill_to_moon_distance(double r_hat, double mu);

} // namespace polar
