#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "atmo/grid.hpp"
#include "atmo/operators.hpp"
#include "atmo/params.hpp"
#include "atmo/sources.hpp"

namespace atmo {

enum class RunMode { aniso, hydro, sweep };

RunMode parse_run_mode(std::string_view name);
std::string_view to_string(RunMode mode);

struct ThetaConfig {
    enum class Kind { zero, constant, file };
    Kind kind = Kind::zero;
    double c1 = 0.0, c2 = 0.0;
    std::filesystem::path path;
};

enum class VelocityPreset { zero, taylor_green_h, random };
enum class ConcentrationPreset { zero, gaussian_blob, random };

struct InitConfig {
    VelocityPreset velocity = VelocityPreset::taylor_green_h;
    double velocity_amplitude = 1.0;
    ConcentrationPreset concentration = ConcentrationPreset::zero;
    double concentration_amplitude = 1.0;
    Vec3 blob_center{0.5, 0.5, 0.5};
    double blob_width = 0.1;
};

/// Parsed and validated configuration.
struct RunConfig {
    GridSpec grid;
    PhysParams phys;
    Mat3 m = DiffusionTensor::identity();
    std::filesystem::path tensor_file;  ///< empty: use `m`
    SourceSpec source;
    /// Source paired with the hydrostatic run: the point deposit (default)
    /// or the configured kind.
    bool hydro_same_source = false;
    ThetaConfig theta;
    InitConfig init;
    double T = 1.0;
    double cfl = 0.5;
    double dt_max = std::numeric_limits<double>::infinity();
    int snapshot_every = 0;  ///< 0: about 40 snapshots per run
    RunMode mode = RunMode::aniso;
    std::vector<double> eps_list{0.5};
    std::filesystem::path output_dir = "out";
    double tol = 1e-8;
    int max_iter = 1000;
    std::uint64_t seed = 1;
    AdvectionScheme advection = AdvectionScheme::upwind1;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Parses `[section]` / `key = value` text. Relative file paths resolve
/// against `base_dir`. Throws ConfigError (with the line number) for
/// unknown sections or keys, malformed values and invariant violations.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

/// Default eps list of a sweep when none is given.
inline const std::vector<double>& default_sweep_eps() {
    static const std::vector<double> v{0.5, 0.25, 0.125, 0.0625};
    return v;
}

/// Per-cell tensor file: one line per cell in (i, j, k) order with k
/// fastest, six numbers m11 m12 m13 m22 m23 m33; '#' starts a comment.
DiffusionTensor load_tensor_file(const std::filesystem::path& path, const Grid& grid);

/// Traction file: one line per ground cell in (i, j) order with j fastest,
/// two numbers theta1 theta2.
BoundaryForcing load_theta_file(const std::filesystem::path& path, const Grid& grid);

}  // namespace atmo
