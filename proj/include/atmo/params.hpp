#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "atmo/field.hpp"
#include "atmo/grid.hpp"

namespace atmo {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

enum class CoriolisMode { f_plane, beta_plane };

/// Rescaled viscosities, aspect ratio and rotation profile.
///
/// Latitude is affine in x2: l(x2) = l0 + l_slope * x2 on a beta plane and
/// l0 on an f-plane. The Coriolis coefficients are alpha = 2 f0 sin(l) and
/// beta = 2 f0 cos(l).
struct PhysParams {
    double nu1 = 1e-2;
    double nu2 = 1e-2;
    double nu3 = 1e-2;
    double eps = 0.5;
    double f0 = 1.0;
    CoriolisMode coriolis_mode = CoriolisMode::f_plane;
    double l0 = 0.78539816339744830962;  // pi/4
    double l_slope = 0.0;

    Vec3 nu() const { return {nu1, nu2, nu3}; }
};

/// Throws std::invalid_argument when a viscosity is not positive or eps is
/// outside (0, 1].
void validate(const PhysParams& params);

struct CoriolisPair {
    double alpha;
    double beta;
};

CoriolisPair coriolis_at(const PhysParams& params, double x2);

/// Largest |alpha| and |beta| over x2 in [0, ly].
CoriolisPair coriolis_bounds(const PhysParams& params, double ly);

/// Symmetric diffusivity matrix M, either one matrix for the whole domain
/// or one per cell. Face values of a per-cell tensor are arithmetic means
/// of the two neighbouring cells.
class DiffusionTensor {
public:
    DiffusionTensor() : DiffusionTensor(identity()) {}
    explicit DiffusionTensor(const Mat3& m) : cells_{m}, uniform_(true) {}
    DiffusionTensor(int nx, int ny, int nz, std::vector<Mat3> per_cell);

    static Mat3 identity() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }
    static Mat3 from_upper(double m11, double m12, double m13, double m22, double m23, double m33) {
        return {{{m11, m12, m13}, {m12, m22, m23}, {m13, m23, m33}}};
    }

    bool uniform() const { return uniform_; }
    const Mat3& at(int i, int j, int k) const {
        if (uniform_) return cells_.front();
        return cells_[(static_cast<std::size_t>(i) * ny_ + j) * nz_ + k];
    }
    /// Entry (row, col) averaged onto the face between cells a and b.
    double face(int row, int col, int ai, int aj, int ak, int bi, int bj, int bk) const {
        if (uniform_) return cells_.front()[row][col];
        return 0.5 * (at(ai, aj, ak)[row][col] + at(bi, bj, bk)[row][col]);
    }
    std::span<const Mat3> matrices() const { return cells_; }
    /// Throws if the tensor is per-cell and sized for a different grid.
    void check_grid(const Grid& grid) const;

private:
    std::vector<Mat3> cells_;
    bool uniform_;
    int nx_ = 0;
    int ny_ = 0;
    int nz_ = 0;
};

/// Eigenvalues of a symmetric 3x3 matrix in ascending order (closed-form
/// trigonometric solution of the characteristic cubic).
std::array<double, 3> symmetric_eigenvalues(const Mat3& m);

/// Smallest eigenvalue of M (minimum over cells for a per-cell tensor).
/// Throws std::invalid_argument if M is asymmetric beyond 1e-12 relative,
/// std::domain_error if the result is not positive.
double coercivity_constant(const DiffusionTensor& m);
double coercivity_constant(const Mat3& m);

/// Physical diffusivity K obtained from M by the aspect-ratio rescaling:
/// horizontal block unchanged, mixed horizontal/vertical entries times eps,
/// K33 = eps^2 M33. Reporting only; the solvers work with M.
Mat3 scale_diffusion(const Mat3& m, double eps);

/// Wind traction theta_H = (theta1, theta2) on the ground, cell centred.
struct BoundaryForcing {
    Array2 theta1;
    Array2 theta2;

    BoundaryForcing() = default;
    BoundaryForcing(int nx, int ny) : theta1(nx, ny), theta2(nx, ny) {}
    static BoundaryForcing constant(int nx, int ny, double c1, double c2) {
        BoundaryForcing f;
        f.theta1 = Array2(nx, ny, c1);
        f.theta2 = Array2(nx, ny, c2);
        return f;
    }
    bool is_zero() const;
};

/// Physical (unscaled) view of a rescaled state: horizontal velocities are
/// unchanged, v_z = eps u3, P = C / eps, and the physical height of each
/// cell-centre level is z = eps x3.
struct PhysicalFields {
    StaggeredVelocity v;
    ScalarField concentration;
    std::vector<double> z_levels;
};

PhysicalFields unscale_state(const StaggeredVelocity& u, const ScalarField& c, double eps,
                             const Grid& grid);

/// Inverse of unscale_state: u3 = v_z / eps, C = eps P.
std::pair<StaggeredVelocity, ScalarField> scale_state(const PhysicalFields& phys, double eps);

}  // namespace atmo
