#pragma once

#include <string_view>

#include "atmo/field.hpp"
#include "atmo/grid.hpp"
#include "atmo/params.hpp"

namespace atmo {

enum class SourceKind { gaussian, unit_impulse, lorentzian, delta_deposit };

SourceKind parse_source_kind(std::string_view name);
std::string_view to_string(SourceKind kind);

/// Point emission switched on at `switch_time` with rate `intensity`.
/// `width` is the pulse parameter eps: the Gaussian has 2 sigma^2 = eps^2,
/// the unit impulse has support radius 1/eps.
struct SourceSpec {
    SourceKind kind = SourceKind::gaussian;
    double intensity = 1.0;
    double switch_time = 0.1;
    Vec3 location{0.5, 0.5, 0.5};
    double width = 0.5;
};

/// Gaussian normalisation making the pulse integrate to one over R^3.
inline constexpr double gaussian_gamma = 0.17958712212516656;  // pi^(-3/2)

/// A source bound to a grid. The spatial profile is sampled once; the
/// Lorentzian normalisation (integral over the domain) is computed by
/// composite Gauss-Legendre quadrature at construction.
class PollutionSource {
public:
    /// Throws std::invalid_argument if the location is outside the domain or
    /// closer than two cells to a boundary, or if a parameter is invalid.
    PollutionSource(const SourceSpec& spec, const Grid& grid);

    const SourceSpec& spec() const { return spec_; }
    bool active(double t) const { return spec_.intensity != 0.0 && t >= spec_.switch_time; }

    /// I H(t - t_s) times the pulse profile at cell centres.
    ScalarField evaluate(double t) const;
    /// Adds scale * S(t) to `out` without allocating.
    void accumulate(double t, double scale, ScalarField& out) const;

    /// Pulse shape delta(x - x_s) at an arbitrary point (no intensity or
    /// switch). Not defined for the deposit kind.
    double profile_at(const Vec3& x) const;
    /// (S(t), phi): quadrature for the smooth kinds; I H(t - t_s) phi(x_s)
    /// for the Dirac deposit (exact pairing with a point mass).
    template <class F>
    double pair_with(double t, F&& phi, const Grid& grid) const;

    double lorentzian_normalisation() const { return lorentz_gamma_; }
    /// Index of the cell receiving the deposit.
    std::array<int, 3> deposit_cell() const { return deposit_cell_; }

private:
    SourceSpec spec_;
    double lorentz_gamma_ = 1.0;
    std::array<int, 3> deposit_cell_{};
    ScalarField profile_;
};

/// Samples the source at time t on the grid.
ScalarField evaluate_source(const SourceSpec& spec, double t, const Grid& grid);

/// Discrete L2((0,T) x Omega) norm of the sampled source.
double source_norm_bound(const SourceSpec& spec, const Grid& grid, double T);

template <class F>
double PollutionSource::pair_with(double t, F&& phi, const Grid& grid) const {
    if (!active(t)) return 0.0;
    if (spec_.kind == SourceKind::delta_deposit) return spec_.intensity * phi(spec_.location);
    double s = 0.0;
    for (int i = 0; i < grid.nx(); ++i)
        for (int j = 0; j < grid.ny(); ++j)
            for (int k = 0; k < grid.nz(); ++k)
                s += profile_(i, j, k) * phi(Vec3{grid.xc(i), grid.yc(j), grid.zc(k)});
    return spec_.intensity * s * grid.cell_volume();
}

}  // namespace atmo
