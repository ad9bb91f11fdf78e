#include "polar/orbit.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace polar {

namespace {

std::array<double, 6> arr6(const Vec6& x)
{
    return {x[0], x[1], x[2], x[3], x[4], x[5]};
}

std::vector<double> with_clock(const Vec6& X, double t = 0.0)
{
    return {X[0], X[1], X[2], X[3], X[4], X[5], t};
}

Vec6 head6(std::span<const double> y)
{
    Vec6 X;
    for (int i = 0; i < 6; ++i)
        X[i] = y[static_cast<std::size_t>(i)];
    return X;
}

Vec3 hill_position(const Vec6& X)
{
    std::array<double, 3> q;
    belbruno_inverse_position(arr6(X), q);
    return Vec3(q[0], q[1], q[2]);
}

// Extremum of a scalar function of tau on [a, b] by golden-section search.
template <class F>
double golden_extremum(F&& f, double a, double b, bool maximize)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    const double sgn = maximize ? -1.0 : 1.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = sgn * f(c), fd = sgn * f(d);
    for (int i = 0; i < 200 && std::abs(b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sgn * f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sgn * f(d);
        }
    }
    return sgn * std::min(fc, fd);
}

} // namespace

double axis_potential(double z)
{
    return -1.0 / z + 0.5 * z * z;
}

double amplitude(double h)
{
    if (!std::isfinite(h))
        throw std::invalid_argument("amplitude: energy must be finite");
    auto f = [h](double z) { return std::make_tuple(z * z * z - 2.0 * h * z - 2.0, 3.0 * z * z - 2.0 * h); };
    // f(0) = -2 < 0; f(hi) > 0 since hi^2 > 2|h| + 2/hi.
    const double hi = std::sqrt(2.0 * std::abs(h)) + 2.0;
    // Start from the asymptotic root so Newton stays inside the bracket.
    double z0 = h < -1.0 ? 1.0 / -h : (h > 1.0 ? std::sqrt(2.0 * h) : std::cbrt(2.0));
    z0 = std::clamp(z0, 1e-300, hi);
    std::uintmax_t it = 200;
    return boost::math::tools::newton_raphson_iterate(f, z0, 0.0, hi, std::numeric_limits<double>::digits, it);
}

double collision_period(double h)
{
    const double d = amplitude(h);
    // With z = d sin^2(phi), (d - z)(z^2 + d z + 2/d) / z = 2(h - V(z)), giving a smooth integrand.
    auto f = [d](double phi) {
        const double s = std::sin(phi);
        const double z = d * s * s;
        return 2.0 * d * s * s / std::sqrt(z * z + d * z + 2.0 / d);
    };
    const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, 0.0, std::numbers::pi / 2, 15, 1e-15);
    return 2.0 * half;
}

Vec6 SectionPoint::state() const
{
    Vec6 X;
    X << 0.0, Q2, Q3, P1, 0.0, 0.0;
    return X;
}

double solve_Q3(double Q2, double P1, double h, double mu, double Q3_guess, double omega)
{
    const GammaParams g{mu, h, omega};
    double Q3 = Q3_guess;
    double best = std::numeric_limits<double>::infinity(), best_Q3 = Q3;
    for (int it = 0; it < 60; ++it) {
        Vec6 X;
        X << 0.0, Q2, Q3, P1, 0.0, 0.0;
        double val = 0.0;
        const auto gr = gradient<6>([&g](const auto& z) { return gamma_hamiltonian(g, z); }, arr6(X), &val);
        if (std::abs(val) < best) {
            best = std::abs(val);
            best_Q3 = Q3;
        }
        if (std::abs(val) <= 1e-15)
            return Q3;
        const double d = gr[2];
        if (!std::isfinite(val) || d == 0.0)
            break;
        double step = -val / d;
        // Limit the step so Q3 stays near the collision sheet.
        const double cap = 0.25 * std::max(1.0, std::abs(Q3));
        if (std::abs(step) > cap)
            step = std::copysign(cap, step);
        Q3 += step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(Q3)))
            return Q3;
    }
    if (best <= 1e-13)
        return best_Q3;
    throw SolverError("solve_Q3: Newton iteration failed (|Gamma| = " + std::to_string(best) + ")");
}

CollisionSeed collision_seed(double h, double mu, const SolverConfig& cfg)
{
    CollisionSeed seed;
    seed.point = SectionPoint{0.0, 1.0, -1.0, h, mu};
    const auto field = make_gamma_field({mu, h, cfg.omega}, false);
    const double span = 50.0 + 20.0 * std::abs(h);
    const auto cr = integrate_to_section(field, with_clock(seed.point.state()), Section::coordinate(0),
                                         CrossingDirection::Any, span, cfg.integrator);
    seed.half_period_s = cr.elapsed;
    seed.half_period_t = cr.state[6];
    return seed;
}

ShootingEval shooting_residual(double h, double mu, double S, double Q2, double P1, double Q3_guess,
                               const SolverConfig& cfg)
{
    const GammaParams g{mu, h, cfg.omega};
    const auto field = make_gamma_field(g, true);
    TaylorIntegrator ti(field, cfg.integrator);
    return shooting_residual(ti, g, S, Q2, P1, Q3_guess);
}

ShootingEval shooting_residual(TaylorIntegrator& ti, const GammaParams& g, double S, double Q2, double P1,
                               double Q3_guess)
{
    if (!(S > 0.0))
        throw SolverError("shooting: non-positive period iterate");
    ShootingEval ev;
    ev.Q3 = solve_Q3(Q2, P1, g.h, g.mu, Q3_guess, g.omega);
    const Vec6 X0 = SectionPoint{Q2, P1, ev.Q3, g.h, g.mu}.state();
    VariationalResult vr;
    try {
        vr = ti.propagate_variational(with_clock(X0), Eigen::MatrixXd::Identity(6, 6), 0.0, 0.5 * S);
    } catch (const IntegrationError& e) {
        throw SolverError(std::string("shooting: ") + e.what());
    }
    const Vec6 X1 = head6(vr.state);
    ev.end = X1;
    ev.t_half = vr.state[6];
    ev.F = Eigen::Vector3d(X1[0], X1[4], X1[5]);
    const Vec6 f1 = gamma_vector_field(g, X1).first;
    const Vec6 gr = gamma_gradient(g, X0);
    // Q3 follows Q2 and P1 on the level set Gamma = 0.
    Vec6 dX_dQ2 = Vec6::Zero(), dX_dP1 = Vec6::Zero();
    dX_dQ2[1] = 1.0;
    dX_dQ2[2] = -gr[1] / gr[2];
    dX_dP1[3] = 1.0;
    dX_dP1[2] = -gr[3] / gr[2];
    const Vec6 cQ2 = vr.M * dX_dQ2;
    const Vec6 cP1 = vr.M * dX_dP1;
    const int idx[3] = {0, 4, 5};
    for (int r = 0; r < 3; ++r) {
        ev.J(r, 0) = 0.5 * f1[idx[r]];
        ev.J(r, 1) = cQ2[idx[r]];
        ev.J(r, 2) = cP1[idx[r]];
    }
    return ev;
}

OrbitRecord make_record(double h, double mu, double S, double Q2, double P1, const ShootingEval& ev,
                        int iterations, const SolverConfig& cfg)
{
    OrbitRecord rec;
    rec.section = SectionPoint{Q2, P1, ev.Q3, h, mu};
    rec.half_period_s = 0.5 * S;
    rec.period_t = 2.0 * ev.t_half;
    rec.delta = ev.J.determinant();
    rec.residual = ev.F.cwiseAbs().maxCoeff();
    rec.iterations = iterations;
    rec.near_degenerate = std::abs(rec.delta) < cfg.delta_warn;
    const Apsides ap = orbit_apsides(rec, cfg);
    rec.periapsis = ap.periapsis;
    rec.apoapsis = ap.apoapsis;
    rec.amplitude = ap.amplitude;
    return rec;
}

OrbitRecord find_polar_orbit(double h, double mu, const SectionPoint& guess, double S_guess, const SolverConfig& cfg)
{
    const GammaParams g{mu, h, cfg.omega};
    const auto field = make_gamma_field(g, true);
    TaylorIntegrator ti(field, cfg.integrator);

    double S = S_guess, Q2 = guess.Q2, P1 = guess.P1, Q3 = guess.Q3;
    double last_norm = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= cfg.max_iter; ++it) {
        const ShootingEval ev = shooting_residual(ti, g, S, Q2, P1, Q3);
        Q3 = ev.Q3;
        const double norm = ev.F.cwiseAbs().maxCoeff();
        if (norm <= cfg.tol || (it > 0 && norm <= 1e-10 && norm >= 0.5 * last_norm))
            return make_record(h, mu, S, Q2, P1, ev, it, cfg);
        if (!std::isfinite(norm))
            throw SolverError("find_polar_orbit: non-finite residual");
        last_norm = norm;
        // Minimum-norm step: robust when the Jacobian is nearly singular.
        Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix3d> cod(ev.J);
        cod.setThreshold(1e-13);
        const Eigen::Vector3d d = cod.solve(-ev.F);
        double lam = 1.0;
        const double scale = std::max({std::abs(d[0]) / std::max(S, 1e-3), std::abs(d[1]), std::abs(d[2])});
        if (scale > 0.2)
            lam = 0.2 / scale;
        S += lam * d[0];
        Q2 += lam * d[1];
        P1 += lam * d[2];
    }
    throw SolverError("find_polar_orbit: no convergence after " + std::to_string(cfg.max_iter) +
                      " iterations (residual " + std::to_string(last_norm) + ")");
}

HalfPeriodFlow half_period_flow(const OrbitRecord& rec, const SolverConfig& cfg)
{
    const auto field = make_gamma_field(rec.params(cfg.omega), true);
    const auto vr = integrate_with_variational(field, with_clock(rec.section.state()),
                                               Eigen::MatrixXd::Identity(6, 6), 0.0, rec.half_period_s,
                                               cfg.integrator);
    HalfPeriodFlow out;
    out.end = head6(vr.state);
    out.t_half = vr.state[6];
    out.A = vr.M;
    return out;
}

std::vector<OrbitSample> dense_orbit(const OrbitRecord& rec, int n_samples, FrameTag frame, const SolverConfig& cfg)
{
    if (n_samples < 1)
        throw std::invalid_argument("dense_orbit: need at least one sample");
    const double mu = rec.section.mu;
    if (frame != FrameTag::HillRescaled && !(mu > 0.0))
        throw std::invalid_argument("dense_orbit: physical frames need mu > 0");
    const auto field = make_gamma_field(rec.params(cfg.omega), false);
    TaylorIntegrator ti(field, cfg.integrator);
    std::vector<TaylorStep> steps;
    const double S = 2.0 * rec.half_period_s;
    ti.propagate(with_clock(rec.section.state()), 0.0, S, &steps);
    const Trajectory traj(std::move(steps));
    std::vector<OrbitSample> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    const Frame hill{FrameTag::HillRescaled, mu, cfg.omega};
    for (int i = 0; i < n_samples; ++i) {
        OrbitSample smp;
        smp.s = n_samples == 1 ? 0.0 : S * i / (n_samples - 1);
        const auto y = i == 0 ? with_clock(rec.section.state()) : traj.state_at(smp.s);
        smp.X = head6(y);
        smp.t = y[6];
        const double dm = (smp.X.tail<3>() - Vec3(1.0, 0.0, 0.0)).squaredNorm();
        PhaseState st;
        st.frame = hill;
        st.q = hill_position(smp.X);
        if (dm < 1e-14) {
            smp.collision = true;
            st.p.setConstant(std::numeric_limits<double>::quiet_NaN());
        } else {
            st = reg_to_hill(smp.X, mu, cfg.omega);
        }
        if (frame == FrameTag::MoonCentered || frame == FrameTag::Barycentric) {
            const double k = std::cbrt(mu);
            st.q *= k;
            st.p *= k;
            st.frame.tag = FrameTag::MoonCentered;
            if (frame == FrameTag::Barycentric)
                st = to_barycentric(st);
        }
        smp.state = st;
        out.push_back(std::move(smp));
    }
    return out;
}

Apsides orbit_apsides(const OrbitRecord& rec, const SolverConfig& cfg)
{
    const auto field = make_gamma_field(rec.params(cfg.omega), false);
    TaylorIntegrator ti(field, cfg.integrator);
    std::vector<TaylorStep> steps;
    ti.propagate(with_clock(rec.section.state()), 0.0, rec.half_period_s, &steps);
    auto radius = [](const TaylorStep& st, double tau) {
        const auto y = st.eval(tau);
        return gamma_time_factor(std::array<double, 6>{y[0], y[1], y[2], y[3], y[4], y[5]});
    };
    auto height = [](const TaylorStep& st, double tau) {
        const auto y = st.eval(tau);
        return std::abs(hill_position(head6(y))[2]);
    };
    Apsides ap;
    ap.periapsis = std::numeric_limits<double>::infinity();
    constexpr int kSub = 8;
    for (const auto& st : steps) {
        for (int j = 0; j < kSub; ++j) {
            const double a = st.h * j / kSub, b = st.h * (j + 1) / kSub;
            const double m = 0.5 * (a + b);
            const double ra = radius(st, a), rm = radius(st, m), rb = radius(st, b);
            ap.periapsis = std::min({ap.periapsis, ra, rb});
            ap.apoapsis = std::max({ap.apoapsis, ra, rb});
            if (rm < ra && rm < rb)
                ap.periapsis = std::min(ap.periapsis, golden_extremum([&](double t) { return radius(st, t); }, a, b, false));
            if (rm > ra && rm > rb)
                ap.apoapsis = std::max(ap.apoapsis, golden_extremum([&](double t) { return radius(st, t); }, a, b, true));
            const double ha = height(st, a), hm = height(st, m), hb = height(st, b);
            ap.amplitude = std::max({ap.amplitude, ha, hb});
            if (hm > ha && hm > hb)
                ap.amplitude = std::max(ap.amplitude, golden_extremum([&](double t) { return height(st, t); }, a, b, true));
        }
    }
    return ap;
}

OrbitChecks check_orbit(const OrbitRecord& rec, const SolverConfig& cfg)
{
    const GammaParams g = rec.params(cfg.omega);
    const auto field = make_gamma_field(g, false);
    TaylorIntegrator ti(field, cfg.integrator);
    std::vector<TaylorStep> steps;
    const double S = 2.0 * rec.half_period_s;
    const Vec6 X0 = rec.section.state();
    const auto end = ti.propagate(with_clock(X0), 0.0, S, &steps);
    OrbitChecks c;
    c.closure = (head6(end) - X0).cwiseAbs().maxCoeff();
    const Trajectory traj(std::move(steps));
    const Mat6 R = involution_matrix();
    const Frame hill{FrameTag::HillRescaled, rec.section.mu, cfg.omega};
    const double g0 = gamma_hamiltonian(g, X0);
    constexpr int n = 64;
    for (int i = 1; i < n; ++i) {
        const double s = S * i / n;
        const Vec6 a = head6(traj.state_at(s));
        const Vec6 b = head6(traj.state_at(S - s));
        c.symmetry = std::max(c.symmetry, (R * a - b).cwiseAbs().maxCoeff());
        c.gamma_drift = std::max(c.gamma_drift, std::abs(gamma_hamiltonian(g, a) - g0));
        if ((a.tail<3>() - Vec3(1.0, 0.0, 0.0)).squaredNorm() > 1e-6) {
            const PhaseState st = reg_to_hill(a, rec.section.mu, cfg.omega);
            // Relative to the size of the terms that cancel near collision.
            const double scale = std::max(1.0, 0.5 * st.p.squaredNorm() + 1.0 / st.q.norm());
            const double err = std::abs(hamiltonian(hill, std::array<double, 6>{st.q[0], st.q[1], st.q[2], st.p[0], st.p[1], st.p[2]}) - rec.section.h);
            c.energy = std::max(c.energy, err / scale);
            c.energy_abs = std::max(c.energy_abs, err);
        }
    }
    return c;
}

double hill_to_moon_distance(double r_hat, double mu)
{
    return std::cbrt(mu) * r_hat;
}

} // namespace polar
