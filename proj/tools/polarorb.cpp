// polarorb: scans, single orbits, bridges, bifurcation brackets and Moon-Earth
// tables for the polar family. Exit codes: 0 ok, 2 truncated scan, 3 solver
// failure, 4 bad arguments.

#include "io.hpp"

#include "polar/continuation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

using namespace polar;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_truncated = 2;
constexpr int exit_solver = 3;
constexpr int exit_args = 4;

struct BadArgs : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    double abs_tol = 1e-14;
    double rel_tol = 1e-14;

    SolverConfig solver() const
    {
        SolverConfig cfg;
        cfg.integrator.abs_tol = abs_tol;
        cfg.integrator.rel_tol = rel_tol;
        cfg.integrator.validate();
        return cfg;
    }
    json integrator_json() const { return {{"method", "taylor"}, {"abs_tol", abs_tol}, {"rel_tol", rel_tol}}; }
};

EnergyConvention parse_convention(const std::string& s)
{
    if (s == "hill")
        return EnergyConvention::HillRescaled;
    if (s == "moon")
        return EnergyConvention::MoonCentered;
    if (s == "barycentric")
        return EnergyConvention::Barycentric;
    throw BadArgs("unknown energy convention '" + s + "' (hill, moon, barycentric)");
}

FrameTag parse_frame(const std::string& s)
{
    if (s == "hill")
        return FrameTag::HillRescaled;
    if (s == "moon")
        return FrameTag::MoonCentered;
    if (s == "barycentric")
        return FrameTag::Barycentric;
    throw BadArgs("unknown frame '" + s + "' (hill, moon, barycentric)");
}

void check_mu(double mu)
{
    if (!(mu >= 0.0 && mu <= 1.0))
        throw BadArgs("--mu must lie in [0, 1]");
}

std::string manifest_ref(const std::string& out)
{
    return "manifest: " + std::filesystem::path(io::manifest_path(out)).filename().string();
}

std::vector<std::string> family_columns(bool with_mu)
{
    std::vector<std::string> c;
    if (with_mu)
        c.push_back("mu");
    for (const char* n : {"h", "Q2", "P1", "Q3", "half_period_s", "period_t", "amplitude", "s1", "s2"})
        c.push_back(n);
    for (int i = 1; i <= 4; ++i)
        c.push_back("re_lambda_" + std::to_string(i));
    for (int i = 1; i <= 4; ++i)
        c.push_back("im_lambda_" + std::to_string(i));
    for (const char* n : {"class", "delta_det", "residual"})
        c.push_back(n);
    return c;
}

void family_row(io::Csv& csv, const ContinuationPoint& pt, double h_column, std::optional<double> mu)
{
    const OrbitRecord& r = pt.orbit;
    if (mu)
        csv.add(*mu);
    csv.add(h_column).add(r.section.Q2).add(r.section.P1).add(r.section.Q3);
    csv.add(r.half_period_s).add(r.period_t).add(r.amplitude);
    const double nan = std::nan("");
    if (pt.spectrum) {
        const auto& s = *pt.spectrum;
        csv.add(s.s1).add(s.s2);
        for (const auto& l : s.eigenvalues)
            csv.add(l.real());
        for (const auto& l : s.eigenvalues)
            csv.add(l.imag());
        csv.add(to_string(s.stability_class));
    } else {
        for (int i = 0; i < 10; ++i)
            csv.add(nan);
        csv.add("Unknown");
    }
    csv.add(r.delta).add(r.residual);
    csv.end_row();
}

StepConfig scan_steps(double h_step)
{
    if (!(h_step > 0.0))
        throw BadArgs("step must be positive");
    StepConfig st;
    st.max = h_step;
    st.initial = h_step;
    st.grid = h_step;
    return st;
}

json event_json(const BifurcationEvent& e)
{
    return {{"kind", to_string(e.kind)},
            {"bracket", {e.bracket[0], e.bracket[1]}},
            {"test_values", {e.test_values[0], e.test_values[1]}},
            {"resolved", e.resolved},
            {"tangential", e.tangential},
            {"note", e.note}};
}

template <class F>
int timed(io::Manifest& m, F&& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    const int code = body();
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return code;
}

int cmd_family(const Common& c, double mu, double h_min, double h_max, double h_step, const std::string& conv_s,
               const std::string& out)
{
    check_mu(mu);
    const EnergyConvention conv = parse_convention(conv_s);
    io::Manifest m;
    m.command = "family";
    m.parameters = {{"mu", mu}, {"h_min", h_min}, {"h_max", h_max}, {"h_step", h_step}, {"energy", conv_s}};
    m.integrator = c.integrator_json();
    io::Csv csv(family_columns(false));
    csv.comment(manifest_ref(out));
    csv.comment("energy convention: " + std::string(to_string(conv)));
    const int code = timed(m, [&] {
        const ContinuationRun run = continue_in_h(mu, h_min, h_max, scan_steps(h_step), c.solver(), conv);
        for (const auto& pt : run.path)
            family_row(csv, pt, pt.parameter, std::nullopt);
        m.diagnostic = run.diagnostic;
        return run.truncated ? exit_truncated : exit_ok;
    });
    m.exit_code = code;
    io::write_with_manifest(out, csv.str(), m);
    return code;
}

int cmd_orbit(const Common& c, double mu, double h, int samples, const std::string& frame_s, const std::string& conv_s,
              const std::string& out)
{
    check_mu(mu);
    if (samples < 2)
        throw BadArgs("--samples must be at least 2");
    const FrameTag frame = parse_frame(frame_s);
    const EnergyConvention conv = parse_convention(conv_s);
    if (frame != FrameTag::HillRescaled && mu == 0.0)
        throw BadArgs("unrescaled frames need mu > 0");
    io::Manifest m;
    m.command = "orbit";
    m.parameters = {{"mu", mu}, {"h", h}, {"samples", samples}, {"frame", frame_s}, {"energy", conv_s}};
    m.integrator = c.integrator_json();
    io::Csv csv({"s", "t", "q1", "q2", "q3", "p1", "p2", "p3"});
    csv.comment(manifest_ref(out));
    timed(m, [&] {
        const SolverConfig cfg = c.solver();
        const double h_hat = conv == EnergyConvention::HillRescaled ? h : energy_map(mu, conv).solver_energy(h);
        const OrbitRecord rec = orbit_at(mu, h_hat, cfg);
        csv.comment("frame: " + std::string(to_string(frame)));
        csv.comment("hill_energy: " + io::format_number(h_hat));
        csv.comment("periapsis_hill: " + io::format_number(rec.periapsis));
        csv.comment("apoapsis_hill: " + io::format_number(rec.apoapsis));
        if (mu > 0.0) {
            csv.comment("periapsis_moon_centered: " + io::format_number(hill_to_moon_distance(rec.periapsis, mu)));
            csv.comment("apoapsis_moon_centered: " + io::format_number(hill_to_moon_distance(rec.apoapsis, mu)));
        }
        csv.comment("period_t: " + io::format_number(rec.period_t));
        for (const auto& s : dense_orbit(rec, samples, frame, cfg)) {
            csv.add(s.s).add(s.t);
            for (int i = 0; i < 3; ++i)
                csv.add(s.state.q[i]);
            for (int i = 0; i < 3; ++i)
                csv.add(s.state.p[i]);
            csv.end_row();
        }
        return exit_ok;
    });
    io::write_with_manifest(out, csv.str(), m);
    return exit_ok;
}

int cmd_bridge(const Common& c, double h_unrescaled, double mu_start, double mu_end, double max_step,
               const std::string& out)
{
    if (!(mu_start > 0.0 && mu_start <= 1.0 && mu_end > 0.0 && mu_end <= 1.0))
        throw BadArgs("--mu-start and --mu-end must lie in (0, 1]");
    if (!(max_step > 0.0))
        throw BadArgs("--max-step must be positive");
    io::Manifest m;
    m.command = "bridge";
    m.parameters = {{"h_unrescaled", h_unrescaled}, {"mu_start", mu_start}, {"mu_end", mu_end}, {"max_step", max_step}};
    m.integrator = c.integrator_json();
    io::Csv csv(family_columns(true));
    csv.comment(manifest_ref(out));
    csv.comment("h column: Hill-rescaled solver energy at fixed moon-centered energy " + io::format_number(h_unrescaled));
    const int code = timed(m, [&] {
        StepConfig st;
        st.max = max_step;
        st.initial = std::min(st.initial, max_step);
        const ContinuationRun run = continue_in_mu(h_unrescaled, mu_start, mu_end, st, c.solver());
        for (const auto& pt : run.path)
            family_row(csv, pt, pt.orbit.section.h, pt.parameter);
        m.diagnostic = run.diagnostic;
        return run.truncated ? exit_truncated : exit_ok;
    });
    m.exit_code = code;
    io::write_with_manifest(out, csv.str(), m);
    return code;
}

int cmd_bifurcations(const Common& c, double mu, double h_min, double h_max, double h_step, double tol,
                     bool tangential, const std::string& out)
{
    check_mu(mu);
    if (!(tol > 0.0))
        throw BadArgs("--tol must be positive");
    io::Manifest m;
    m.command = "bifurcations";
    m.parameters = {{"mu", mu}, {"h_min", h_min}, {"h_max", h_max}, {"h_step", h_step}, {"tol", tol},
                    {"tangential", tangential || mu == 1.0}};
    m.integrator = c.integrator_json();
    json doc;
    const int code = timed(m, [&] {
        json events = json::array();
        int rc = exit_ok;
        if (h_min != h_max) {
            const SolverConfig cfg = c.solver();
            const ContinuationRun run = continue_in_h(mu, h_min, h_max, scan_steps(h_step), cfg);
            EventConfig ev;
            ev.bracket_tol = tol;
            ev.tangential = tangential || mu == 1.0;
            auto found = detect_events(run, default_stability(cfg), ev, cfg);
            found.insert(found.end(), run.events.begin(), run.events.end());
            for (const auto& e : found)
                events.push_back(event_json(e));
            m.diagnostic = run.diagnostic;
            rc = run.truncated ? exit_truncated : exit_ok;
        }
        doc = {{"mu", mu}, {"h_min", h_min}, {"h_max", h_max}, {"tol", tol}, {"events", events},
               {"manifest", std::filesystem::path(io::manifest_path(out)).filename().string()}};
        return rc;
    });
    m.exit_code = code;
    io::write_with_manifest(out, doc.dump(2) + "\n", m);
    return code;
}

int cmd_moon_earth(const Common& c, double mu, double h_min, double h_max, double h_step, double distance_km,
                   double radius_km, const std::string& out)
{
    check_mu(mu);
    if (mu == 0.0)
        throw BadArgs("--mu must be positive for physical units");
    if (!(distance_km > 0.0 && radius_km > 0.0))
        throw BadArgs("--distance-km and --moon-radius-km must be positive");
    io::Manifest m;
    m.command = "moon-earth";
    m.parameters = {{"mu", mu}, {"h_min", h_min}, {"h_max", h_max}, {"h_step", h_step},
                    {"distance_km", distance_km}, {"moon_radius_km", radius_km}, {"energy", "barycentric"}};
    m.integrator = c.integrator_json();
    io::Csv csv({"h", "periapsis_km", "apoapsis_km", "class", "flags"});
    csv.comment(manifest_ref(out));
    csv.comment("h: barycentric energy, mu = " + io::format_number(mu));
    const double thresholds[2] = {radius_km, radius_km + 50.0};
    const int code = timed(m, [&] {
        const ContinuationRun run =
            continue_in_h(mu, h_min, h_max, scan_steps(h_step), c.solver(), EnergyConvention::Barycentric);
        double prev = std::nan("");
        for (const auto& pt : run.path) {
            const double peri = hill_to_moon_distance(pt.orbit.periapsis, mu) * distance_km;
            const double apo = hill_to_moon_distance(pt.orbit.apoapsis, mu) * distance_km;
            std::string flags;
            for (double t : thresholds)
                if (std::isfinite(prev) && (prev < t) != (peri < t))
                    flags += (flags.empty() ? "" : ";") + std::string("crosses_") + io::format_number(t) + "_km";
            prev = peri;
            csv.add(pt.parameter).add(peri).add(apo);
            csv.add(pt.spectrum ? to_string(pt.spectrum->stability_class) : "Unknown");
            csv.add(flags);
            csv.end_row();
        }
        m.diagnostic = run.diagnostic;
        return run.truncated ? exit_truncated : exit_ok;
    });
    m.exit_code = code;
    io::write_with_manifest(out, csv.str(), m);
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Periodic polar orbits of the restricted three-body and Hill lunar problems"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--abs-tol", common.abs_tol, "Integrator absolute tolerance")->capture_default_str();
    app.add_option("--rel-tol", common.rel_tol, "Integrator relative tolerance")->capture_default_str();

    double mu = 0.0, h = -2.0, h_min = -2.0, h_max = 0.5, h_step = 0.01, tol = 1e-5;
    int samples = 400;
    std::string out, frame = "hill", energy = "hill";
    std::function<int()> run;

    auto* fam = app.add_subcommand("family", "Continue the family in h at fixed mu");
    fam->add_option("--mu", mu)->required();
    fam->add_option("--h-min", h_min)->required();
    fam->add_option("--h-max", h_max)->required();
    fam->add_option("--h-step", h_step)->capture_default_str();
    fam->add_option("--energy", energy, "hill, moon or barycentric")->capture_default_str();
    fam->add_option("--out", out)->required();
    fam->callback([&] { run = [&] { return cmd_family(common, mu, h_min, h_max, h_step, energy, out); }; });

    auto* orb = app.add_subcommand("orbit", "Dense samples of one orbit");
    orb->set_help_flag("--help", "Print this help message and exit"); // -h would clash with --h
    orb->add_option("--mu", mu)->required();
    orb->add_option("--h", h)->required();
    orb->add_option("--samples", samples)->capture_default_str();
    orb->add_option("--frame", frame, "hill, moon or barycentric")->capture_default_str();
    orb->add_option("--energy", energy, "hill, moon or barycentric")->capture_default_str();
    orb->add_option("--out", out)->required();
    orb->callback([&] { run = [&] { return cmd_orbit(common, mu, h, samples, frame, energy, out); }; });

    double h_un = -2.0, mu_start = 1e-3, mu_end = 0.998, max_step = 0.05;
    auto* br = app.add_subcommand("bridge", "Continue in mu at fixed moon-centered energy");
    br->add_option("--h-unrescaled", h_un)->required();
    br->add_option("--mu-start", mu_start)->required();
    br->add_option("--mu-end", mu_end)->required();
    br->add_option("--max-step", max_step, "Largest step in cbrt(mu)")->capture_default_str();
    br->add_option("--out", out)->required();
    br->callback([&] { run = [&] { return cmd_bridge(common, h_un, mu_start, mu_end, max_step, out); }; });

    bool tangential = false;
    auto* bif = app.add_subcommand("bifurcations", "Bracket bifurcations along a scan in h");
    bif->add_option("--mu", mu)->required();
    bif->add_option("--h-min", h_min)->required();
    bif->add_option("--h-max", h_max)->required();
    bif->add_option("--h-step", h_step)->capture_default_str();
    bif->add_option("--tol", tol)->capture_default_str();
    bif->add_flag("--tangential", tangential, "Also locate touching degeneracies (always on at mu = 1)");
    bif->add_option("--out", out)->required();
    bif->callback([&] {
        run = [&] { return cmd_bifurcations(common, mu, h_min, h_max, h_step, tol, tangential, out); };
    });

    double me_mu = 0.01215, distance = 386000.0, radius = 1716.0, me_min = -2.0, me_max = -1.515, me_step = 0.005;
    auto* me = app.add_subcommand("moon-earth", "Periapsis and apoapsis table in km, barycentric energy");
    me->add_option("--mu", me_mu)->capture_default_str();
    me->add_option("--h-min", me_min)->capture_default_str();
    me->add_option("--h-max", me_max)->capture_default_str();
    me->add_option("--h-step", me_step)->capture_default_str();
    me->add_option("--distance-km", distance)->capture_default_str();
    me->add_option("--moon-radius-km", radius)->capture_default_str();
    me->add_option("--out", out)->required();
    me->callback([&] {
        run = [&] { return cmd_moon_earth(common, me_mu, me_min, me_max, me_step, distance, radius, out); };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_args;
    }

    try {
        return run();
    } catch (const BadArgs& e) {
        std::cerr << "polarorb: " << e.what() << "\n";
        return exit_args;
    } catch (const std::invalid_argument& e) {
        std::cerr << "polarorb: " << e.what() << "\n";
        return exit_args;
    } catch (const std::exception& e) {
        std::cerr << "polarorb: " << e.what() << "\n";
        return exit_solver;
    }
}
