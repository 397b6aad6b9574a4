#include "atmo/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace atmo {

void validate(const PhysParams& p) {
    if (!(p.nu1 > 0.0) || !(p.nu2 > 0.0) || !(p.nu3 > 0.0))
        throw std::invalid_argument("viscosities nu1, nu2, nu3 must be positive");
    if (!(p.eps > 0.0) || p.eps > 1.0) throw std::invalid_argument("eps must lie in (0, 1]");
    if (!std::isfinite(p.f0) || !std::isfinite(p.l0) || !std::isfinite(p.l_slope))
        throw std::invalid_argument("rotation parameters must be finite");
}

CoriolisPair coriolis_at(const PhysParams& p, double x2) {
    const double lat = p.coriolis_mode == CoriolisMode::beta_plane ? p.l0 + p.l_slope * x2 : p.l0;
    return {2.0 * p.f0 * std::sin(lat), 2.0 * p.f0 * std::cos(lat)};
}

CoriolisPair coriolis_bounds(const PhysParams& p, double ly) {
    if (p.coriolis_mode == CoriolisMode::f_plane) {
        auto c = coriolis_at(p, 0.0);
        return {std::abs(c.alpha), std::abs(c.beta)};
    }
    // sin/cos of an affine latitude: sample densely and add the exact
    // extrema when a stationary point falls inside the interval.
    CoriolisPair out{0.0, 0.0};
    constexpr int samples = 256;
    for (int s = 0; s <= samples; ++s) {
        auto c = coriolis_at(p, ly * s / samples);
        out.alpha = std::max(out.alpha, std::abs(c.alpha));
        out.beta = std::max(out.beta, std::abs(c.beta));
    }
    const double lo = std::min(p.l0, p.l0 + p.l_slope * ly);
    const double hi = std::max(p.l0, p.l0 + p.l_slope * ly);
    const double half_pi = std::numbers::pi / 2.0;
    for (double n = std::ceil(lo / half_pi); n * half_pi <= hi; n += 1.0) {
        if (static_cast<long>(n) % 2 != 0)
            out.alpha = std::max(out.alpha, 2.0 * std::abs(p.f0));
        else
            out.beta = std::max(out.beta, 2.0 * std::abs(p.f0));
    }
    return out;
}

DiffusionTensor::DiffusionTensor(int nx, int ny, int nz, std::vector<Mat3> per_cell)
    : cells_(std::move(per_cell)), uniform_(false), nx_(nx), ny_(ny), nz_(nz) {
    if (cells_.size() != static_cast<std::size_t>(nx) * ny * nz)
        throw std::invalid_argument("diffusion tensor: expected " +
                                    std::to_string(static_cast<std::size_t>(nx) * ny * nz) +
                                    " cell matrices, got " + std::to_string(cells_.size()));
}

void DiffusionTensor::check_grid(const Grid& grid) const {
    if (uniform_) return;
    if (nx_ != grid.nx() || ny_ != grid.ny() || nz_ != grid.nz())
        throw std::invalid_argument("diffusion tensor sized for a different grid");
}

std::array<double, 3> symmetric_eigenvalues(const Mat3& a) {
    const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if (p1 == 0.0) {
        std::array<double, 3> d{a[0][0], a[1][1], a[2][2]};
        std::sort(d.begin(), d.end());
        return d;
    }
    const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
                      (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Mat3 b{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) b[r][c] = (a[r][c] - (r == c ? q : 0.0)) / p;
    const double det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                         b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                         b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    const double r = std::clamp(det_b / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double largest = q + 2.0 * p * std::cos(phi);
    const double smallest = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    const double middle = 3.0 * q - largest - smallest;
    return {smallest, middle, largest};
}

namespace {

void check_symmetric(const Mat3& m) {
    double scale = 0.0;
    for (const auto& row : m)
        for (double v : row) scale = std::max(scale, std::abs(v));
    for (int r = 0; r < 3; ++r)
        for (int c = r + 1; c < 3; ++c)
            if (std::abs(m[r][c] - m[c][r]) > 1e-12 * scale)
                throw std::invalid_argument("diffusion tensor is not symmetric");
}

}  // namespace

double coercivity_constant(const Mat3& m) {
    check_symmetric(m);
    const double lambda = symmetric_eigenvalues(m)[0];
    if (!(lambda > 0.0))
        throw std::domain_error("diffusion tensor is not coercive: smallest eigenvalue " +
                                std::to_string(lambda));
    return lambda;
}

double coercivity_constant(const DiffusionTensor& m) {
    double lambda = std::numeric_limits<double>::infinity();
    for (const Mat3& cell : m.matrices()) lambda = std::min(lambda, coercivity_constant(cell));
    return lambda;
}

Mat3 scale_diffusion(const Mat3& m, double eps) {
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("eps must lie in (0, 1]");
    Mat3 k = m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const int vertical = (r == 2) + (c == 2);
            if (vertical == 1) k[r][c] = eps * m[r][c];
            if (vertical == 2) k[r][c] = eps * eps * m[r][c];
        }
    return k;
}

bool BoundaryForcing::is_zero() const {
    auto zero = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };
    return zero(theta1.values()) && zero(theta2.values());
}

PhysicalFields unscale_state(const StaggeredVelocity& u, const ScalarField& c, double eps,
                             const Grid& grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("unscale_state: eps must be positive");
    PhysicalFields out{u, c, {}};
    for (double& v : out.v.u3.values()) v *= eps;
    for (double& v : out.concentration.values()) v /= eps;
    out.z_levels.reserve(grid.nz());
    for (int k = 0; k < grid.nz(); ++k) out.z_levels.push_back(eps * grid.zc(k));
    return out;
}

std::pair<StaggeredVelocity, ScalarField> scale_state(const PhysicalFields& phys, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("scale_state: eps must be positive");
    StaggeredVelocity u = phys.v;
    ScalarField c = phys.concentration;
    for (double& v : u.u3.values()) v /= eps;
    for (double& v : c.values()) v *= eps;
    return {std::move(u), std::move(c)};
}

}  // namespace atmo
