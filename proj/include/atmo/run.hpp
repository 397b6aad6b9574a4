#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "atmo/config.hpp"
#include "atmo/diagnostics.hpp"
#include "atmo/state.hpp"

namespace atmo {

struct RunOptions {
    bool write_files = true;
    /// Reference mode: wall-clock timings are reported as 0 so that every
    /// output file depends on the configuration alone.
    bool reference = false;
    std::ostream* log = nullptr;  ///< progress messages; null for quiet
};

/// Time-step plan shared by the runs of one invocation.
struct TimePlan {
    double dt = 0.0;
    long steps = 0;
    int snapshot_every = 1;
};

/// Uniform steps no longer than dt_limit that end exactly at T, with the
/// step count a multiple of the snapshot interval.
TimePlan plan_time(const RunConfig& cfg, double dt_limit);

/// Everything a solver run needs, built from the configuration.
struct RunSetup {
    SolverMode mode;
    double eps;
    std::unique_ptr<Grid> grid;
    std::unique_ptr<PollutionSource> source;
    StepInputs inputs;
    SimState initial;
};

/// Source of a run: the configured kind with width eps for the anisotropic
/// system; the point deposit (or the configured kind when hydro_pairing =
/// same) for the hydrostatic one.
SourceSpec run_source(const RunConfig& cfg, double eps, SolverMode mode);

/// Initial fields from the presets, velocity projected to the discrete
/// constraint of `mode`.
SimState initial_state(const RunConfig& cfg, double eps, SolverMode mode, const Grid& grid);

std::unique_ptr<RunSetup> make_setup(const RunConfig& cfg, double eps, SolverMode mode);

/// Stable step of the initial state of a setup.
double initial_dt_limit(const RunConfig& cfg, const RunSetup& setup);

struct RunArtifacts {
    std::string run_id;
    SolverMode mode = SolverMode::anisotropic;
    double eps = 0.0;
    TimePlan plan;
    std::vector<SimState> snapshots;  ///< every snapshot_every steps, from t = 0
    EnergyReport energy;
    AprioriNorms norms;
    std::optional<TranslationReport> translation;
    double runtime_s = 0.0;
};

/// Runs one system to T. With write_files, `dir` receives
/// snapshots/step_%06d.vtk, energy.csv, norms.csv, translation.csv and
/// manifest.txt. On a NumericalError the last good state and the partial
/// reports are written before the error propagates.
RunArtifacts run_simulation(const RunConfig& cfg, double eps, SolverMode mode,
                            const std::optional<TimePlan>& plan, const std::filesystem::path& dir,
                            const RunOptions& opt);

struct SweepResult {
    ConvergenceReport report;
    RunArtifacts hydro;
    std::vector<RunArtifacts> aniso;
};

/// Hydrostatic reference plus one anisotropic run per eps on a common time
/// plan; writes sweep.csv (rewritten after every completed eps),
/// apriori.csv, translation.csv and manifest.txt into output_dir and one
/// subdirectory per run.
SweepResult epsilon_sweep(const RunConfig& cfg, const RunOptions& opt);

}  // namespace atmo
