// Acceptance run: one PASS/FAIL line per criterion A1..A10.
//
//   polar_acceptance [--expect-fail A6,A7] [--only A1,A2]
//
// With --expect-fail the exit status is 0 only if every other selected
// criterion passes and every listed one fails.

#include "polar/continuation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace polar;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Every spectrum computed by the other criteria, with where it came from.
struct SpectrumSample {
    std::string where;
    MonodromySpectrum s;
};
std::vector<SpectrumSample> all_spectra;

void collect(const std::string& tag, const ContinuationRun& run)
{
    for (const auto& pt : run.path)
        if (pt.spectrum)
            all_spectra.push_back({fmt("%s p=%.6g", tag.c_str(), pt.parameter), *pt.spectrum});
}

Outcome a1()
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    double worst = 0.0;
    for (double h : {-50.0, -5.0, -2.0, -1.0, 0.0, 1.0, 8.0, 50.0}) {
        const double T = collision_period(h);
        ok = ok && T > 0.0 && T < M_PI;
        worst = std::max(worst, T);
    }
    const double kepler = 2.0 * M_PI * std::pow(100.0, -1.5);
    const double rel = std::abs(collision_period(-50.0) - kepler) / kepler;
    const double dt = seconds_since(t0);
    return {ok && rel < 1e-2 && dt < 1.0, fmt("max T*=%.6f < pi; T*(-50) rel. to Kepler %.2e (<1e-2); %.3fs (<1s)",
                                              worst, rel, dt)};
}

Outcome a2()
{
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double h = u(rng);
        worst = std::max(worst, std::abs(axis_potential(amplitude(h)) - h));
    }
    const double e0 = std::abs(amplitude(0.0) - std::cbrt(2.0));
    return {worst <= 1e-12 && e0 <= 1e-13, fmt("max |V(d)-h|=%.2e (<=1e-12); |d(0)-2^(1/3)|=%.2e (<=1e-13)", worst, e0)};
}

Outcome a3()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double belbruno = 0.0, moser = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Vec3 q(u(rng), u(rng), u(rng)), p(u(rng), u(rng), u(rng));
        const auto [Q, P] = belbruno_forward(q, p);
        const auto [q2, p2] = belbruno_inverse(Q, P);
        belbruno = std::max({belbruno, (q2 - q).norm() / std::max(1.0, q.norm()), (p2 - p).norm() / std::max(1.0, p.norm())});
        const auto [x, y] = moser_sphere_to_chart(moser_chart_to_sphere(p, q));
        moser = std::max({moser, (x - p).norm() / std::max(1.0, p.norm()), (y - q).norm() / std::max(1.0, q.norm())});
    }

    // Common arc at (mu, h) = (0, -2).
    const Frame fr{FrameTag::HillRescaled, 0.0, 1.0};
    const double h = -2.0, T = 0.4;
    const Vec3 q(0.3, 0.1, 0.2);
    const Vec3 dir = Vec3(0.2, -0.5, 0.4).normalized();
    double lo = 0.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double k = 0.5 * (lo + hi);
        const Vec3 p = k * dir;
        (hamiltonian(fr, std::array<double, 6>{q[0], q[1], q[2], p[0], p[1], p[2]}) < h ? lo : hi) = k;
    }
    const Vec3 p = lo * dir;

    const VectorField hf = make_hamiltonian_field(fr, false);
    const std::vector<double> x0{q[0], q[1], q[2], p[0], p[1], p[2], 0.0};
    const auto xd = TaylorIntegrator(hf).propagate(x0, 0.0, T);
    Vec6 direct;
    for (int i = 0; i < 6; ++i)
        direct[i] = xd[i];

    const VectorField gf = make_gamma_field({0.0, h, 1.0}, false);
    const Vec6 X = hill_to_reg(PhaseState{q, p, fr});
    std::vector<double> X0(X.data(), X.data() + 6);
    X0.push_back(0.0);
    const auto cr = integrate_to_section(gf, X0, Section::coordinate(6, T), CrossingDirection::Increasing, 100.0);
    Vec6 Xe;
    for (int i = 0; i < 6; ++i)
        Xe[i] = cr.state[i];
    const double gamma_err = (reg_to_hill(Xe, 0.0).vec() - direct).norm();

    const VectorField mf = make_moser_field(fr, h);
    const MoserState ms = moser_chart_to_sphere(p, q);
    std::vector<double> z0(8);
    for (int i = 0; i < 4; ++i) {
        z0[i] = ms.xi[i];
        z0[i + 4] = ms.eta[i];
    }
    std::vector<TaylorStep> dense;
    const auto z = TaylorIntegrator(mf).propagate(z0, 0.0, T, &dense);
    MoserState me;
    for (int i = 0; i < 4; ++i) {
        me.xi[i] = z[i];
        me.eta[i] = z[i + 4];
    }
    const auto [xm, ym] = moser_sphere_to_chart(me);
    Vec6 moser_end;
    moser_end << ym, xm;
    const double moser_err = (moser_end - direct).norm();
    const double drift = std::max(std::abs(me.f1()), std::abs(me.f2()));

    const double dt = seconds_since(t0);
    const bool ok = belbruno <= 1e-12 && moser <= 1e-13 && gamma_err <= 1e-8 && moser_err <= 1e-8 && drift <= 1e-10 &&
                    dt < 10.0;
    return {ok, fmt("Belbruno %.1e (<=1e-12); Moser %.1e (<=1e-13); Gamma-vs-H %.1e, Moser-vs-H %.1e (<=1e-8); "
                    "constraint drift %.1e (<=1e-10); %.2fs (<10s)",
                    belbruno, moser, gamma_err, moser_err, drift, dt)};
}

Outcome a4()
{
    double closure = 0.0, symmetry = 0.0, energy = 0.0;
    std::string worst_at;
    for (double mu : {0.0, 1e-6, 1e-3})
        for (double h : {-2.0, -1.0, 0.5}) {
            const OrbitRecord rec = orbit_at(mu, h);
            const OrbitChecks c = check_orbit(rec);
            closure = std::max(closure, c.closure);
            symmetry = std::max(symmetry, c.symmetry);
            if (c.energy > energy) {
                energy = c.energy;
                worst_at = fmt("mu=%g h=%g", mu, h);
            }
            all_spectra.push_back({fmt("A4 mu=%g h=%g", mu, h), orbit_stability(rec).spectrum});
        }
    return {closure <= 1e-9 && symmetry <= 1e-9 && energy <= 1e-10,
            fmt("closure %.1e, symmetry %.1e (<=1e-9); scaled energy %.1e (<=1e-10, at %s)", closure, symmetry, energy,
                worst_at.c_str())};
}

Outcome a5()
{
    const auto t0 = std::chrono::steady_clock::now();
    StepConfig st;
    st.max = 0.05;
    const ContinuationRun run = continue_in_h(0.0, -2.0, 0.5, st);
    collect("A5 mu=0", run);
    EventConfig ev;
    ev.bracket_tol = 1e-7;
    const auto events = detect_events(run, default_stability(), ev);

    struct Expected {
        EventKind kind;
        double lo, hi;
    };
    const std::vector<Expected> expected{
        {EventKind::PeriodDoubling, -1.025245, -1.025225}, {EventKind::Degeneracy, -0.85556, -0.85555},
        {EventKind::Degeneracy, 0.043843, 0.043844},       {EventKind::PeriodDoubling, 0.0909615, 0.0909616},
        {EventKind::KreinCollision, 0.109989, 0.109990},
    };
    const double slack = 5e-4;
    bool ok = !run.truncated && events.size() == expected.size();
    std::ostringstream d;
    d << events.size() << " events (expect 5):";
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        const double mid = 0.5 * (e.bracket[0] + e.bracket[1]);
        d << fmt(" %s@%.7f", to_string(e.kind), mid);
        if (i < expected.size()) {
            const auto& x = expected[i];
            ok = ok && e.kind == x.kind && e.bracket[0] >= x.lo - slack && e.bracket[1] <= x.hi + slack;
        }
    }
    const double dt = seconds_since(t0);
    ok = ok && dt < 600.0;
    d << fmt("; window +-%.0e; %.1fs (<600s)", slack, dt);
    return {ok, d.str()};
}

Outcome a6()
{
    const std::vector<std::pair<double, StabilityClass>> table{
        {-2.0, StabilityClass::EllipticElliptic},       {-1.5, StabilityClass::EllipticElliptic},
        {-0.95, StabilityClass::EllipticNegHyperbolic}, {0.0, StabilityClass::HyperbolicNegHyperbolic},
        {1.0, StabilityClass::ComplexHyperbolic},       {8.0, StabilityClass::ComplexHyperbolic},
    };
    bool ok = true;
    std::ostringstream d;
    for (const auto& [h, want] : table) {
        const auto st = orbit_stability(orbit_at(0.0, h));
        all_spectra.push_back({fmt("A6 mu=0 h=%g", h), st.spectrum});
        const StabilityClass got = st.spectrum.stability_class;
        ok = ok && got == want;
        d << fmt("h=%g %s%s; ", h, to_string(got), got == want ? "" : (std::string(" (want ") + to_string(want) + ")").c_str());
    }
    return {ok, d.str()};
}

Outcome a8()
{
    StepConfig st;
    st.max = st.initial = st.grid = 0.01;
    const ContinuationRun run = continue_in_h(1.0, -0.6, -0.2, st);
    collect("A8 mu=1", run);
    double off_circle = 0.0;
    for (const auto& pt : run.path)
        for (const auto& l : pt.spectrum->eigenvalues)
            off_circle = std::max(off_circle, std::abs(std::abs(l) - 1.0));
    EventConfig ev;
    ev.tangential = true;
    ev.bracket_tol = 1e-6;
    std::vector<double> found;
    for (const auto& e : detect_events(run, default_stability(), ev))
        if (e.kind == EventKind::Degeneracy)
            found.push_back(0.5 * (e.bracket[0] + e.bracket[1]));
    const auto oracle = rotating_kepler_degeneracies(3);
    bool ok = !run.truncated && found.size() >= 3 && off_circle <= 1e-6;
    std::ostringstream d;
    for (std::size_t k = 0; k < 3 && k < found.size(); ++k) {
        ok = ok && std::abs(found[k] - oracle[k]) <= 1e-3;
        d << fmt("k=%zu %.7f vs %.7f; ", k + 1, found[k], oracle[k]);
    }
    d << fmt("%zu degeneracies; max ||lambda|-1| %.1e (<=1e-6)", found.size(), off_circle);
    return {ok, d.str()};
}

Outcome a9()
{
    const auto t0 = std::chrono::steady_clock::now();
    const ContinuationRun b1 = continue_in_mu(-2.0, 1e-3, 0.998);
    collect("A9 h_m=-2", b1);
    double res = 0.0, sym = 0.0;
    for (const auto& pt : b1.path) {
        res = std::max(res, pt.orbit.residual);
        sym = std::max(sym, check_orbit(pt.orbit).symmetry);
    }
    const bool full = !b1.truncated && std::abs(b1.path.back().parameter - 0.998) < 1e-12;

    StepConfig st;
    st.max = 0.005;
    const ContinuationRun b2 = continue_in_mu(-0.1, 0.999, 0.963, st);
    collect("A9 h_m=-0.1", b2);
    const bool partial = !b2.truncated && std::abs(b2.path.back().parameter - 0.963) < 1e-12;
    const double dt = seconds_since(t0);
    return {full && partial && res <= 1e-10 && sym <= 1e-8 && dt < 1800.0,
            fmt("h_m=-2: %zu orbits to mu=%.6g, max residual %.1e (<=1e-10), symmetry %.1e (<=1e-8); "
                "h_m=-0.1: %zu orbits to mu=%.6g%s; %.1fs (<1800s)",
                b1.path.size(), b1.path.back().parameter, res, sym, b2.path.size(), b2.path.back().parameter,
                b2.truncated ? (" truncated: " + b2.diagnostic).c_str() : "", dt)};
}

Outcome a10()
{
    const double mu = 0.01215, D = 386000.0, target = -1.52, paper_peri = 4389.0, radius = 1716.0 + 50.0;
    StepConfig st;
    st.max = st.initial = st.grid = 0.01;
    const ContinuationRun run = continue_in_h(mu, -2.5, -1.45, st, {}, EnergyConvention::Barycentric);
    collect("A10 mu=0.01215", run);

    const ContinuationPoint* at = nullptr;
    for (const auto& pt : run.path)
        if (std::abs(pt.parameter - target) < 1e-12)
            at = &pt;
    if (!at)
        return {false, "continuation did not reach h=-1.52: " + run.diagnostic};
    const double peri = hill_to_moon_distance(at->orbit.periapsis, mu) * D;
    const double rel = std::abs(peri - paper_peri) / paper_peri;
    const bool no_collision = at->orbit.periapsis > 1e-6;

    double h_pd = NAN;
    for (const auto& e : detect_events(run, default_stability()))
        if (e.kind == EventKind::PeriodDoubling) {
            h_pd = e.bracket[0];
            break;
        }
    // Last upward crossing of the radius, refined by a fine continuation
    // across the grid cell that contains it.
    auto peri_km = [&](const OrbitRecord& r) { return hill_to_moon_distance(r.periapsis, mu) * D; };
    double h_cross = NAN;
    for (std::size_t i = 1; i < run.path.size(); ++i) {
        if (!(peri_km(run.path[i - 1].orbit) <= radius && peri_km(run.path[i].orbit) > radius))
            continue;
        StepConfig fine;
        fine.max = fine.initial = fine.grid = 1e-5;
        fine.with_stability = false;
        const ContinuationRun cell =
            continue_path(run.map, run.path[i - 1].orbit, run.path[i - 1].parameter, run.path[i].parameter, fine);
        for (std::size_t j = 1; j < cell.path.size(); ++j) {
            const double a = peri_km(cell.path[j - 1].orbit), b = peri_km(cell.path[j].orbit);
            if (a <= radius && b > radius) {
                const double ha = cell.path[j - 1].parameter, hb = cell.path[j].parameter;
                h_cross = ha + (radius - a) / (b - a) * (hb - ha);
            }
        }
    }
    const bool ordered = std::isfinite(h_pd) && std::isfinite(h_cross) && h_cross < h_pd;
    return {no_collision && rel <= 0.1 && ordered,
            fmt("h=-1.52: periapsis %.1f km vs %.0f km (rel %.3f <= 0.1), %s; first PD at h=%.7f; periapsis passes "
                "%.0f km at h=%.7f",
                peri, paper_peri, rel, no_collision ? "no collision" : "COLLISION", h_pd, radius, h_cross)};
}

Outcome a7()
{
    double det = 0.0, triv = 0.0, recip = 0.0, s31 = 0.0;
    std::string det_at, triv_at, recip_at, s31_at;
    int bad = 0;
    for (const auto& [where, s] : all_spectra) {
        const double e_det = std::abs(s.det6 - 1.0), e_s = std::abs(s.s3 - s.s1);
        bad += e_det > 1e-8 || s.trivial_pair_error > 1e-6 || s.reciprocity_residual > 1e-7 || e_s > 1e-7;
        if (e_det > det)
            det = e_det, det_at = where;
        if (s.trivial_pair_error > triv)
            triv = s.trivial_pair_error, triv_at = where;
        if (s.reciprocity_residual > recip)
            recip = s.reciprocity_residual, recip_at = where;
        if (e_s > s31)
            s31 = e_s, s31_at = where;
    }
    return {bad == 0 && !all_spectra.empty(),
            fmt("%zu orbits, %d outside: |det-1| %.1e [%s] (<=1e-8); trivial %.1e [%s] (<=1e-6); reciprocity %.1e [%s] "
                "(<=1e-7); |s3-s1| %.1e [%s] (<=1e-7)",
                all_spectra.size(), bad, det, det_at.c_str(), triv, triv_at.c_str(), recip, recip_at.c_str(), s31,
                s31_at.c_str())};
}

std::set<std::string> split(const std::string& s)
{
    std::set<std::string> out;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, ',');)
        if (!t.empty())
            out.insert(t);
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria A1..A10"};
    std::string expect_fail, only;
    app.add_option("--expect-fail", expect_fail, "Comma-separated criteria that must fail");
    app.add_option("--only", only, "Comma-separated subset to run");
    CLI11_PARSE(app, argc, argv);
    const auto xfail = split(expect_fail);
    const auto subset = split(only);

    // A7 aggregates the spectra of all other criteria, so it runs last.
    const std::vector<std::pair<std::string, std::function<Outcome()>>> order{
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6},
        {"A8", a8}, {"A9", a9}, {"A10", a10}, {"A7", a7},
    };
    std::map<int, std::pair<std::string, Outcome>> results;
    for (const auto& [id, fn] : order) {
        if (!subset.empty() && !subset.count(id))
            continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        results[std::stoi(id.substr(1))] = {id, o};
    }

    int unexpected = 0;
    std::vector<std::string> xfailed;
    for (const auto& [n, r] : results) {
        const auto& [id, o] = r;
        std::printf("%-3s %s  %s\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
        const bool expected_fail = xfail.count(id) > 0;
        if (o.pass == expected_fail)
            ++unexpected;
        if (!o.pass && expected_fail)
            xfailed.push_back(id);
    }
    for (const auto& id : xfail)
        if (!results.count(std::stoi(id.substr(1))))
            std::printf("note: %s listed as expected failure but not run\n", id.c_str());
    if (!xfailed.empty()) {
        std::printf("expected failures:");
        for (const auto& id : xfailed)
            std::printf(" %s", id.c_str());
        std::printf("\n");
    }
    std::printf("%s\n", unexpected == 0 ? "acceptance: OK" : "acceptance: UNEXPECTED RESULTS");
    return unexpected == 0 ? 0 : 1;
}
