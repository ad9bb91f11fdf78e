#include "polar/continuation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace polar {

namespace {

struct Unknowns {
    double Q2, P1, Q3, S;
};

Unknowns unknowns(const OrbitRecord& r)
{
    return {r.section.Q2, r.section.P1, r.section.Q3, 2.0 * r.half_period_s};
}

Unknowns lerp(const Unknowns& a, const Unknowns& b, double t)
{
    return {a.Q2 + t * (b.Q2 - a.Q2), a.P1 + t * (b.P1 - a.P1), a.Q3 + t * (b.Q3 - a.Q3), a.S + t * (b.S - a.S)};
}

double jump(const Unknowns& a, const Unknowns& b)
{
    return std::max({std::abs(a.Q2 - b.Q2), std::abs(a.P1 - b.P1), std::abs(a.Q3 - b.Q3),
                     std::abs(a.S - b.S) / std::max(1.0, std::abs(b.S))});
}

OrbitRecord solve_from(double mu, double h, const Unknowns& g, const SolverConfig& cfg)
{
    return find_polar_orbit(h, mu, SectionPoint{g.Q2, g.P1, g.Q3, h, mu}, g.S, cfg);
}

OrbitRecord seed_orbit(double mu, double h, const SolverConfig& cfg)
{
    const CollisionSeed seed = collision_seed(h, mu, cfg);
    return find_polar_orbit(h, mu, seed.point, 2.0 * seed.half_period_s, cfg);
}

double max_rho(const MonodromySpectrum& sp)
{
    return sp.rho_complex ? sp.rho[0] : std::max(sp.rho[0], sp.rho[1]);
}

struct ArcPoint {
    double u;
    Unknowns x;
};

// One pseudo-arclength corrector: unknowns (u, S, Q2, P1), bordered by the
// tangent condition. dF/du by a forward difference.
std::optional<OrbitRecord> arclength_correct(const ParameterMap& map, const ArcPoint& pred,
                                             const Eigen::Vector4d& tangent, const SolverConfig& cfg,
                                             double& u_out)
{
    Eigen::Vector4d y(pred.u, pred.x.S, pred.x.Q2, pred.x.P1);
    const Eigen::Vector4d y0 = y;
    double Q3 = pred.x.Q3;
    for (int it = 0; it <= cfg.max_iter; ++it) {
        const double p = map.from_internal(y[0]);
        const double mu = map.mu(p), h = map.solver_energy(p);
        if (!(mu >= 0.0 && mu <= 1.0))
            return std::nullopt;
        const ShootingEval ev = shooting_residual(h, mu, y[1], y[2], y[3], Q3, cfg);
        Q3 = ev.Q3;
        const double norm = ev.F.cwiseAbs().maxCoeff();
        const double g = tangent.dot(y - y0);
        if (norm <= cfg.tol && std::abs(g) <= 1e-12) {
            u_out = y[0];
            return make_record(h, mu, y[1], y[2], y[3], ev, it, cfg);
        }
        if (!std::isfinite(norm))
            return std::nullopt;
        const double eps = 1e-7 * std::max(1.0, std::abs(y[0]));
        const double pe = map.from_internal(y[0] + eps);
        const GammaParams ge{map.mu(pe), map.solver_energy(pe), cfg.omega};
        const Vec6 X0 = SectionPoint{y[2], y[3], solve_Q3(y[2], y[3], ge.h, ge.mu, Q3, cfg.omega), ge.h, ge.mu}.state();
        const auto field = make_gamma_field(ge, false);
        TaylorIntegrator ti(field, cfg.integrator);
        std::vector<double> x0(X0.data(), X0.data() + 6);
        x0.push_back(0.0);
        const auto end = ti.propagate(x0, 0.0, 0.5 * y[1]);
        const Eigen::Vector3d dFdu = (Eigen::Vector3d(end[0], end[4], end[5]) - ev.F) / eps;
        Eigen::Matrix4d A;
        A.topLeftCorner<3, 1>() = dFdu;
        A.topRightCorner<3, 3>() = ev.J;
        A.bottomRows<1>() = tangent.transpose();
        Eigen::Vector4d rhs;
        rhs << -ev.F, -g;
        const Eigen::Vector4d d = A.fullPivLu().solve(rhs);
        if (!d.allFinite())
            return std::nullopt;
        double lam = 1.0;
        const double scale = d.cwiseAbs().maxCoeff();
        if (scale > 0.1)
            lam = 0.1 / scale;
        y += lam * d;
    }
    return std::nullopt;
}

} // namespace

const char* to_string(ContinuationParameter p)
{
    return p == ContinuationParameter::EnergyH ? "EnergyH" : "MassRatio";
}

const char* to_string(EnergyConvention c)
{
    switch (c) {
    case EnergyConvention::HillRescaled: return "HillRescaled";
    case EnergyConvention::MoonCentered: return "MoonCentered";
    case EnergyConvention::Barycentric: return "Barycentric";
    }
    return "Unknown";
}

const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::Degeneracy: return "Degeneracy";
    case EventKind::PeriodDoubling: return "PeriodDoubling";
    case EventKind::KreinCollision: return "KreinCollision";
    case EventKind::Fold: return "Fold";
    }
    return "Unknown";
}

double ParameterMap::mu(double p) const
{
    return kind == ContinuationParameter::EnergyH ? fixed_value : p;
}

double ParameterMap::solver_energy(double p) const
{
    const double m = mu(p);
    const double e = kind == ContinuationParameter::EnergyH ? p : fixed_value;
    switch (convention) {
    case EnergyConvention::HillRescaled: return e;
    case EnergyConvention::MoonCentered: return hill_energy_from_moon_centered(e, m);
    case EnergyConvention::Barycentric:
        return hill_energy_from_moon_centered(moon_centered_energy_from_barycentric(e, m), m);
    }
    return e;
}

double ParameterMap::to_internal(double p) const
{
    return kind == ContinuationParameter::MassRatio ? std::cbrt(p) : p;
}

double ParameterMap::from_internal(double u) const
{
    return kind == ContinuationParameter::MassRatio ? u * u * u : u;
}

ParameterMap energy_map(double mu, EnergyConvention conv)
{
    if (!(mu >= 0.0 && mu <= 1.0))
        throw std::invalid_argument("energy_map: mu must lie in [0, 1]");
    if (conv != EnergyConvention::HillRescaled && mu == 0.0)
        throw std::invalid_argument("energy_map: unrescaled energies need mu > 0");
    return {ContinuationParameter::EnergyH, conv, mu};
}

ParameterMap mass_map(double energy, EnergyConvention conv)
{
    if (!std::isfinite(energy))
        throw std::invalid_argument("mass_map: energy must be finite");
    return {ContinuationParameter::MassRatio, conv, energy};
}

void StepConfig::validate() const
{
    if (!(initial > 0.0 && min > 0.0 && max >= min && initial >= min))
        throw std::invalid_argument("StepConfig: need 0 < min <= initial and min <= max");
    if (!(grow >= 1.0 && shrink > 0.0 && shrink < 1.0))
        throw std::invalid_argument("StepConfig: need grow >= 1 and 0 < shrink < 1");
    if (!(accept_jump > 0.0 && residual > 0.0 && grid >= 0.0))
        throw std::invalid_argument("StepConfig: tolerances must be positive");
}

ContinuationRun continue_path(const ParameterMap& map, const OrbitRecord& start, double p_start, double p_end,
                              const StepConfig& step, const SolverConfig& cfg)
{
    step.validate();
    ContinuationRun run;
    run.parameter = map.kind;
    run.convention = map.convention;
    run.fixed_value = map.fixed_value;
    run.map = map;

    auto push = [&](double p, const OrbitRecord& rec) {
        ContinuationPoint pt{p, rec, std::nullopt};
        if (step.with_stability) {
            try {
                pt.spectrum = orbit_stability(rec, cfg).spectrum;
            } catch (const std::exception&) {
            }
        }
        run.path.push_back(std::move(pt));
    };
    push(p_start, start);

    const double u0 = map.to_internal(p_start), u1 = map.to_internal(p_end);
    const double dir = u1 >= u0 ? 1.0 : -1.0;
    double u = u0;
    double ds = std::min(step.initial, step.max);
    auto reached = [&](double v) { return dir * (u1 - v) <= 1e-14 * std::max(1.0, std::abs(u1)); };
    std::vector<double> us{u0};

    // Newton failing with shrinking steps while |Delta| decays toward zero.
    auto fold_suspected = [&] {
        const std::size_t n = run.path.size();
        if (n < 3)
            return false;
        const double d0 = std::abs(run.path[n - 3].orbit.delta), d1 = std::abs(run.path[n - 2].orbit.delta),
                     d2 = std::abs(run.path[n - 1].orbit.delta);
        return d2 < d1 && d1 < d0 && d2 < 0.5 * d0;
    };

    // Pseudo-arclength past the turning point; the family then heads back
    // and the run ends with a Fold event.
    auto arclength_phase = [&] {
        auto vec = [&](double uu, const OrbitRecord& r) {
            const Unknowns x = unknowns(r);
            return Eigen::Vector4d(uu, x.S, x.Q2, x.P1);
        };
        std::size_t n = run.path.size();
        Eigen::Vector4d y_prev = vec(us[n - 2], run.path[n - 2].orbit);
        Eigen::Vector4d y = vec(us[n - 1], run.path[n - 1].orbit);
        double sigma = (y - y_prev).norm();
        const double sigma_max = std::max(4.0 * sigma, step.max);
        for (int k = 0; k < step.max_arclength_steps; ++k) {
            const Eigen::Vector4d t = (y - y_prev).normalized();
            const Eigen::Vector4d yp = y + sigma * t;
            const OrbitRecord& last = run.path.back().orbit;
            ArcPoint pred{yp[0], {yp[2], yp[3], last.section.Q3, yp[1]}};
            std::optional<OrbitRecord> rec;
            double u_new = 0.0;
            try {
                rec = arclength_correct(map, pred, t, cfg, u_new);
            } catch (const std::exception&) {
                rec.reset();
            }
            if (!rec || rec->residual > step.residual) {
                sigma *= step.shrink;
                if (sigma < step.min) {
                    run.diagnostic += "; arclength step floor reached";
                    return;
                }
                continue;
            }
            run.step_history.push_back(std::abs(u_new - u));
            y_prev = y;
            y = vec(u_new, *rec);
            const double u_last = u;
            const double delta_last = run.path.back().orbit.delta;
            u = u_new;
            us.push_back(u);
            push(map.from_internal(u), *rec);
            if (dir * (u - u_last) < 0.0) {
                // Vertex of the parabola through the last three (s, u) samples.
                n = us.size();
                const double s1 = (y_prev - vec(us[n - 3], run.path[n - 3].orbit)).norm();
                const double s2 = s1 + (y - y_prev).norm();
                const double ua = us[n - 3], ub = us[n - 2], uc = us[n - 1];
                const double c1 = (ub - ua) / s1, c2 = ((uc - ua) / s2 - c1) / (s2 - s1);
                double u_star = ub;
                if (c2 != 0.0) {
                    const double sv = 0.5 * (s1 - c1 / c2);
                    u_star = ua + c1 * sv + c2 * sv * (sv - s1);
                }
                BifurcationEvent e;
                e.kind = EventKind::Fold;
                const double pa = map.from_internal(u_last), pb = map.from_internal(u_star);
                e.bracket = {std::min(pa, pb), std::max(pa, pb)};
                e.test_values = {delta_last, rec->delta};
                e.resolved = (delta_last < 0.0) != (rec->delta < 0.0);
                if (!e.resolved)
                    e.note = "Delta keeps its sign across the turning point";
                run.events.push_back(e);
                run.diagnostic = "fold near parameter " + std::to_string(pb) + "; the family turns back";
                return;
            }
            if (reached(u))
                return;
            if (rec->iterations <= step.fast_iterations)
                sigma = std::min(sigma * step.grow, sigma_max);
        }
        run.diagnostic += "; arclength step limit reached";
    };

    while (!reached(u)) {
        double target = u + dir * ds;
        if (dir * (target - u1) > 0.0)
            target = u1;
        if (step.grid > 0.0) {
            const double k = std::floor((u - u0) / (dir * step.grid) + 1e-9) + 1.0;
            double g = u0 + dir * k * step.grid;
            // Land on decimal grid values exactly when 1/grid is an integer.
            const double inv = std::round(1.0 / step.grid);
            if (std::abs(inv * step.grid - 1.0) < 1e-12 && std::abs(u0 * inv - std::round(u0 * inv)) < 1e-9)
                g = std::round(g * inv) / inv;
            if (dir * (target - g) > -1e-9 * step.grid)
                target = g;
        }
        const double p = map.from_internal(target);
        const double mu = map.mu(p), h = map.solver_energy(p);

        const std::size_t n = run.path.size();
        Unknowns pred = unknowns(run.path.back().orbit);
        if (n >= 2) {
            const Unknowns a = unknowns(run.path[n - 2].orbit);
            const double t = (target - us[n - 2]) / (us[n - 1] - us[n - 2]);
            pred = lerp(a, pred, t);
        }
        const double allow = n >= 2 ? step.accept_jump : std::max(step.accept_jump, 10.0 * ds);

        bool ok = false;
        OrbitRecord rec;
        try {
            rec = solve_from(mu, h, pred, cfg);
            ok = rec.residual <= step.residual && jump(pred, unknowns(rec)) <= allow;
        } catch (const std::exception&) {
            ok = false;
        }
        if (!ok) {
            ds *= step.shrink;
            if (ds < step.min) {
                run.truncated = true;
                run.diagnostic = "step floor reached at parameter " + std::to_string(map.from_internal(u));
                if (fold_suspected())
                    arclength_phase();
                break;
            }
            continue;
        }
        run.step_history.push_back(std::abs(target - u));
        u = target;
        us.push_back(u);
        push(p, rec);
        if (rec.iterations <= step.fast_iterations)
            ds = std::min(ds * step.grow, step.max);
    }
    return run;
}

OrbitRecord orbit_at(double mu, double h, const SolverConfig& cfg, const StepConfig& step)
{
    if (!(mu >= 0.0 && mu <= 1.0))
        throw std::invalid_argument("orbit_at: mu must lie in [0, 1]");
    if (mu == 0.0 || mu == 1.0)
        return seed_orbit(mu, h, cfg);
    // Bounded rotating-Kepler seeds exist only for negative energy.
    const double from = (mu > 0.5 && h < 0.0) ? 1.0 : 0.0;
    StepConfig s = step;
    s.with_stability = false;
    s.grid = 0.0;
    const ContinuationRun run =
        continue_path(mass_map(h, EnergyConvention::HillRescaled), seed_orbit(from, h, cfg), from, mu, s, cfg);
    if (run.truncated)
        throw SolverError("orbit_at: homotopy in mu truncated (" + run.diagnostic + ")");
    return run.path.back().orbit;
}

ContinuationRun continue_in_h(double mu, double h_start, double h_end, const StepConfig& step,
                              const SolverConfig& cfg, EnergyConvention conv)
{
    const ParameterMap map = energy_map(mu, conv);
    const OrbitRecord start = orbit_at(mu, map.solver_energy(h_start), cfg, step);
    return continue_path(map, start, h_start, h_end, step, cfg);
}

ContinuationRun continue_in_mu(double energy, double mu_start, double mu_end, const StepConfig& step,
                               const SolverConfig& cfg, EnergyConvention conv)
{
    if (!(mu_start > 0.0 && mu_start <= 1.0 && mu_end > 0.0 && mu_end <= 1.0))
        throw std::invalid_argument("continue_in_mu: mu range must lie in (0, 1]");
    const ParameterMap map = mass_map(energy, conv);
    const OrbitRecord start = orbit_at(mu_start, map.solver_energy(mu_start), cfg, step);
    return continue_path(map, start, mu_start, mu_end, step, cfg);
}

StabilityFn default_stability(const SolverConfig& cfg, const StabilityTolerances& tol)
{
    return [cfg, tol](const OrbitRecord& rec) { return orbit_stability(rec, cfg, tol).spectrum; };
}

std::vector<BifurcationEvent> detect_events(const ContinuationRun& run, const StabilityFn& stability,
                                            const EventConfig& ev, const SolverConfig& cfg)
{
    std::vector<BifurcationEvent> out;
    const auto& path = run.path;
    const ParameterMap& map = run.map;
    std::vector<std::optional<MonodromySpectrum>> spec(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        spec[i] = path[i].spectrum;
        if (!spec[i]) {
            try {
                spec[i] = stability(path[i].orbit);
            } catch (const std::exception&) {
            }
        }
    }

    // Orbit at an interior parameter, predicted by interpolation between two records.
    auto solve_between = [&](double p, double pa, const OrbitRecord& ra, double pb, const OrbitRecord& rb) {
        const double ua = map.to_internal(pa), ub = map.to_internal(pb), up = map.to_internal(p);
        const Unknowns g = lerp(unknowns(ra), unknowns(rb), (up - ua) / (ub - ua));
        return solve_from(map.mu(p), map.solver_energy(p), g, cfg);
    };

    using Test = double (MonodromySpectrum::*)() const;
    auto bisect = [&](EventKind kind, Test test, std::size_t i) {
        BifurcationEvent e;
        e.kind = kind;
        double pa = path[i].parameter, pb = path[i + 1].parameter;
        OrbitRecord ra = path[i].orbit, rb = path[i + 1].orbit;
        double fa = ((*spec[i]).*test)(), fb = ((*spec[i + 1]).*test)();
        int it = 0;
        try {
            while (std::abs(pb - pa) > ev.bracket_tol && it++ < ev.max_bisections) {
                const double pm = 0.5 * (pa + pb);
                const OrbitRecord rm = solve_between(pm, pa, ra, pb, rb);
                const double fm = (stability(rm).*test)();
                if ((fm < 0.0) == (fa < 0.0)) {
                    pa = pm;
                    ra = rm;
                    fa = fm;
                } else {
                    pb = pm;
                    rb = rm;
                    fb = fm;
                }
            }
            e.resolved = std::abs(pb - pa) <= ev.bracket_tol;
            if (!e.resolved)
                e.note = "bisection limit reached";
        } catch (const std::exception& ex) {
            e.resolved = false;
            e.note = ex.what();
        }
        e.bracket = {std::min(pa, pb), std::max(pa, pb)};
        e.test_values = pa <= pb ? std::array<double, 2>{fa, fb} : std::array<double, 2>{fb, fa};
        return e;
    };

    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!spec[i] || !spec[i + 1])
            continue;
        const auto& a = *spec[i];
        const auto& b = *spec[i + 1];
        if ((a.delta_deg() < 0.0) != (b.delta_deg() < 0.0))
            out.push_back(bisect(EventKind::Degeneracy, &MonodromySpectrum::delta_deg, i));
        if ((a.delta_pd() < 0.0) != (b.delta_pd() < 0.0))
            out.push_back(bisect(EventKind::PeriodDoubling, &MonodromySpectrum::delta_pd, i));
        const bool ee = a.stability_class == StabilityClass::EllipticElliptic ||
                        b.stability_class == StabilityClass::EllipticElliptic;
        if (ee && a.rho_complex != b.rho_complex)
            out.push_back(bisect(EventKind::KreinCollision, &MonodromySpectrum::delta_krein, i));
    }

    if (ev.tangential) {
        // 2 - max rho touches zero without changing sign: locate its minima.
        auto gap = [](const MonodromySpectrum& s) { return 2.0 - max_rho(s); };
        for (std::size_t i = 1; i + 1 < path.size(); ++i) {
            if (!spec[i - 1] || !spec[i] || !spec[i + 1])
                continue;
            const double g0 = gap(*spec[i - 1]), g1 = std::abs(gap(*spec[i])), g2 = gap(*spec[i + 1]);
            if (!(g1 <= std::abs(g0) && g1 <= std::abs(g2) && g1 < ev.tangential_window))
                continue;
            // A sign change is handled by the bisection above; the middle value
            // may sit on either side of zero by roundoff.
            if ((g0 < 0.0) != (g2 < 0.0) || ((g0 < 0.0) != (gap(*spec[i]) < 0.0) && g1 > ev.tangential_threshold))
                continue;
            const double pa0 = path[i - 1].parameter, pb0 = path[i + 1].parameter;
            const OrbitRecord& ra = path[i - 1].orbit;
            const OrbitRecord& rb = path[i + 1].orbit;
            auto f = [&](double p) { return std::abs(gap(stability(solve_between(p, pa0, ra, pb0, rb)))); };
            BifurcationEvent e;
            e.kind = EventKind::Degeneracy;
            e.tangential = true;
            const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
            double a = pa0, b = pb0;
            try {
                double c = b - phi * (b - a), d = a + phi * (b - a);
                double fc = f(c), fd = f(d);
                int it = 0;
                while (std::abs(b - a) > ev.bracket_tol && it++ < ev.max_bisections) {
                    if (fc < fd) {
                        b = d;
                        d = c;
                        fd = fc;
                        c = b - phi * (b - a);
                        fc = f(c);
                    } else {
                        a = c;
                        c = d;
                        fc = fd;
                        d = a + phi * (b - a);
                        fd = f(d);
                    }
                }
                e.test_values = {fc, fd};
                e.resolved = std::min(fc, fd) <= ev.tangential_threshold;
                if (!e.resolved)
                    e.note = "minimum of 2 - rho_max above threshold";
            } catch (const std::exception& ex) {
                e.resolved = false;
                e.note = ex.what();
            }
            e.bracket = {std::min(a, b), std::max(a, b)};
            if (e.resolved)
                out.push_back(e);
        }
    }

    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.bracket[0] < y.bracket[0]; });
    return out;
}

} // namespace polar
