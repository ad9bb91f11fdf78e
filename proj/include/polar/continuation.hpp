#pragma once

// Natural-parameter continuation of the polar family in the energy or in the
// mass ratio, with monodromy-based event detection along the path.

#include "polar/stability.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace polar {

enum class ContinuationParameter { EnergyH, MassRatio };
const char* to_string(ContinuationParameter p);

/// How the user energy is read.
enum class EnergyConvention { HillRescaled, MoonCentered, Barycentric };
const char* to_string(EnergyConvention c);

/// Maps the path parameter to the (mu, rescaled energy) seen by the solver.
struct ParameterMap {
    ContinuationParameter kind = ContinuationParameter::EnergyH;
    EnergyConvention convention = EnergyConvention::HillRescaled;
    /// mu for energy paths, the fixed energy for mass paths.
    double fixed_value = 0.0;

    double mu(double p) const;
    double solver_energy(double p) const;
    /// Internal coordinate in which steps are taken (cbrt(mu) for mass paths).
    double to_internal(double p) const;
    double from_internal(double u) const;
};

ParameterMap energy_map(double mu, EnergyConvention conv = EnergyConvention::HillRescaled);
ParameterMap mass_map(double energy, EnergyConvention conv = EnergyConvention::MoonCentered);

struct StepConfig {
    double initial = 0.02;
    double min = 1e-9;
    double max = 0.05;
    double grow = 1.3;
    double shrink = 0.5;
    /// Correctors using at most this many Newton iterations count as fast.
    int fast_iterations = 2;
    /// Largest accepted distance between predicted and corrected section point.
    double accept_jump = 2e-2;
    /// Residual every accepted record must satisfy.
    double residual = 1e-10;
    bool with_stability = true;
    /// When positive, steps land on every multiple of `grid` from the start.
    double grid = 0.0;
    /// Pseudo-arclength steps allowed once a fold is detected.
    int max_arclength_steps = 400;

    void validate() const;
};

struct ContinuationPoint {
    double parameter = 0.0;
    OrbitRecord orbit;
    std::optional<MonodromySpectrum> spectrum;
};

enum class EventKind { Degeneracy, PeriodDoubling, KreinCollision, Fold };
const char* to_string(EventKind k);

struct BifurcationEvent {
    EventKind kind = EventKind::Degeneracy;
    std::array<double, 2> bracket{};
    std::array<double, 2> test_values{};
    bool resolved = true;
    /// Touching zero without a sign change (found by minimization).
    bool tangential = false;
    std::string note;
};

struct ContinuationRun {
    ContinuationParameter parameter = ContinuationParameter::EnergyH;
    EnergyConvention convention = EnergyConvention::HillRescaled;
    double fixed_value = 0.0;
    std::vector<ContinuationPoint> path;
    std::vector<BifurcationEvent> events;
    std::vector<double> step_history;
    bool truncated = false;
    std::string diagnostic;
    ParameterMap map;
};

/// Converged orbit at (mu, rescaled h): the exact collision seed for mu in
/// {0, 1}, otherwise a homotopy in cbrt(mu) from the nearer endpoint at fixed h.
OrbitRecord orbit_at(double mu, double h, const SolverConfig& cfg = {}, const StepConfig& step = {});

/// Follows the family from `start` (solved at map parameter p_start) to p_end.
ContinuationRun continue_path(const ParameterMap& map, const OrbitRecord& start, double p_start, double p_end,
                              const StepConfig& step = {}, const SolverConfig& cfg = {});

ContinuationRun continue_in_h(double mu, double h_start, double h_end, const StepConfig& step = {},
                              const SolverConfig& cfg = {},
                              EnergyConvention conv = EnergyConvention::HillRescaled);

/// Bridge at fixed energy (moon-centered by default) from mu_start to mu_end.
ContinuationRun continue_in_mu(double energy, double mu_start, double mu_end, const StepConfig& step = {},
                               const SolverConfig& cfg = {},
                               EnergyConvention conv = EnergyConvention::MoonCentered);

struct EventConfig {
    double bracket_tol = 1e-5;
    int max_bisections = 60;
    /// Tangential degeneracies are searched where 2 - max rho dips below this.
    double tangential_window = 0.5;
    double tangential_threshold = 1e-6;
    bool tangential = false;
    StabilityTolerances tolerances;
};

using StabilityFn = std::function<MonodromySpectrum(const OrbitRecord&)>;

/// Sign changes of delta_deg, delta_pd and (elliptic-elliptic side only)
/// delta_krein between consecutive path points, bisected to bracket_tol.
std::vector<BifurcationEvent> detect_events(const ContinuationRun& run, const StabilityFn& stability,
                                            const EventConfig& ev = {}, const SolverConfig& cfg = {});

/// Default stability function: orbit_stability with the given tolerances.
StabilityFn default_stability(const SolverConfig& cfg = {}, const StabilityTolerances& tol = {});

} // namespace polar
