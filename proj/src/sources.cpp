#include "atmo/sources.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace atmo {

namespace {

constexpr std::array<double, 8> gl_nodes{-0.9602898564975363, -0.7966664774136267,
                                         -0.5255324099163290, -0.1834346424956498,
                                         0.1834346424956498,  0.5255324099163290,
                                         0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> gl_weights{0.1012285362903763, 0.2223810344533745,
                                           0.3137066458778873, 0.3626837833783620,
                                           0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};

/// Composite 8-point Gauss-Legendre rule on [0, length] with `panels` panels.
std::vector<std::pair<double, double>> composite_rule(double length, int panels) {
    std::vector<std::pair<double, double>> rule;
    const double w = length / panels;
    for (int p = 0; p < panels; ++p)
        for (std::size_t q = 0; q < gl_nodes.size(); ++q)
            rule.emplace_back(w * (p + 0.5 * (gl_nodes[q] + 1.0)), 0.5 * w * gl_weights[q]);
    return rule;
}

double lorentz_shape(double eps, double r2) {
    return eps / (1.0 + std::numbers::pi * std::numbers::pi * eps * eps * r2);
}

}  // namespace

SourceKind parse_source_kind(std::string_view name) {
    if (name == "gaussian") return SourceKind::gaussian;
    if (name == "unit_impulse") return SourceKind::unit_impulse;
    if (name == "lorentzian") return SourceKind::lorentzian;
    if (name == "delta_deposit") return SourceKind::delta_deposit;
    throw std::invalid_argument("unknown source kind '" + std::string(name) + "'");
}

std::string_view to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::gaussian: return "gaussian";
        case SourceKind::unit_impulse: return "unit_impulse";
        case SourceKind::lorentzian: return "lorentzian";
        case SourceKind::delta_deposit: return "delta_deposit";
    }
    return "?";
}

PollutionSource::PollutionSource(const SourceSpec& spec, const Grid& grid) : spec_(spec) {
    if (!(spec.intensity >= 0.0)) throw std::invalid_argument("source intensity must be >= 0");
    if (!(spec.switch_time >= 0.0)) throw std::invalid_argument("source switch time must be >= 0");
    if (spec.kind != SourceKind::delta_deposit && !(spec.width > 0.0))
        throw std::invalid_argument("source width must be positive");
    const Vec3& xs = spec.location;
    const std::array<double, 3> extent{grid.lx(), grid.ly(), grid.height()};
    for (int d = 0; d < 3; ++d) {
        if (!(xs[d] > 0.0 && xs[d] < extent[d]))
            throw std::invalid_argument("source location outside the domain");
        const double margin = 2.0 * grid.spacing(d);
        if (xs[d] < margin || xs[d] > extent[d] - margin)
            throw std::invalid_argument("source location closer than two cells to a boundary");
    }

    if (spec.kind == SourceKind::lorentzian) {
        const auto rx = composite_rule(grid.lx(), 8);
        const auto ry = composite_rule(grid.ly(), 8);
        const auto rz = composite_rule(grid.height(), 8);
        double integral = 0.0;
        for (const auto& [x, wx] : rx)
            for (const auto& [y, wy] : ry)
                for (const auto& [z, wz] : rz) {
                    const double r2 = (x - xs[0]) * (x - xs[0]) + (y - xs[1]) * (y - xs[1]) +
                                      (z - xs[2]) * (z - xs[2]);
                    integral += wx * wy * wz * lorentz_shape(spec.width, r2);
                }
        lorentz_gamma_ = 1.0 / integral;
    }

    deposit_cell_ = {std::min(static_cast<int>(xs[0] / grid.dx()), grid.nx() - 1),
                     std::min(static_cast<int>(xs[1] / grid.dy()), grid.ny() - 1),
                     std::min(static_cast<int>(xs[2] / grid.dz()), grid.nz() - 1)};

    profile_ = ScalarField(grid.nx(), grid.ny(), grid.nz());
    if (spec.kind == SourceKind::delta_deposit) {
        profile_(deposit_cell_[0], deposit_cell_[1], deposit_cell_[2]) = 1.0 / grid.cell_volume();
        return;
    }
    for (int i = 0; i < grid.nx(); ++i)
        for (int j = 0; j < grid.ny(); ++j)
            for (int k = 0; k < grid.nz(); ++k)
                profile_(i, j, k) = profile_at({grid.xc(i), grid.yc(j), grid.zc(k)});
}

double PollutionSource::profile_at(const Vec3& x) const {
    const Vec3& xs = spec_.location;
    const double r2 = (x[0] - xs[0]) * (x[0] - xs[0]) + (x[1] - xs[1]) * (x[1] - xs[1]) +
                      (x[2] - xs[2]) * (x[2] - xs[2]);
    const double eps = spec_.width;
    switch (spec_.kind) {
        case SourceKind::gaussian:
            return gaussian_gamma / (eps * eps * eps) * std::exp(-r2 / (eps * eps));
        case SourceKind::unit_impulse:
            return r2 < 1.0 / (eps * eps) ? 0.5 * eps : 0.0;
        case SourceKind::lorentzian:
            return lorentz_gamma_ * lorentz_shape(eps, r2);
        case SourceKind::delta_deposit:
            break;
    }
    throw std::logic_error("profile_at: the deposit has no pointwise profile");
}

ScalarField PollutionSource::evaluate(double t) const {
    ScalarField out(profile_.ni(), profile_.nj(), profile_.nk());
    accumulate(t, 1.0, out);
    return out;
}

void PollutionSource::accumulate(double t, double scale, ScalarField& out) const {
    if (!active(t)) return;
    const double a = scale * spec_.intensity;
    auto src = profile_.values();
    auto dst = out.values();
    for (std::size_t n = 0; n < dst.size(); ++n) dst[n] += a * src[n];
}

ScalarField evaluate_source(const SourceSpec& spec, double t, const Grid& grid) {
    return PollutionSource(spec, grid).evaluate(t);
}

double source_norm_bound(const SourceSpec& spec, const Grid& grid, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("source_norm_bound: T must be positive");
    const double on_time = std::max(0.0, T - spec.switch_time);
    if (on_time == 0.0 || spec.intensity == 0.0) return 0.0;
    const ScalarField s = evaluate_source(spec, spec.switch_time, grid);
    return std::sqrt(on_time * sum_sq(s.values(), grid.cell_volume()));
}

}  // namespace atmo
