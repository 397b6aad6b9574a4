#pragma once

#include <array>
#include <cstddef>
#include <optional>

namespace atmo {

/// Uniform discretization request for the rescaled box (0,lx) x (0,ly) x (0,h).
struct GridSpec {
    int nx = 32;
    int ny = 32;
    int nz = 16;
    double lx = 1.0;
    double ly = 1.0;
    double h = 1.0;
};

/// Which piece of the boundary a face belongs to.
///
///   ground  : x3 = 0      (Gamma_G)
///   upper   : x3 = h      (Gamma_U)
///   lateral : x1 or x2 walls (Gamma_L)
///
/// Gamma_A, the part "above ground", is upper + lateral.
enum class BoundaryPart { ground, upper, lateral };

inline bool above_ground(BoundaryPart part) { return part != BoundaryPart::ground; }

struct BoundaryCounts {
    std::size_t ground = 0;
    std::size_t upper = 0;
    std::size_t lateral = 0;
};

/// MAC grid over the rescaled domain.
///
/// Cell (i,j,k) has center ((i+1/2)dx, (j+1/2)dy, (k+1/2)dz). Velocity
/// component d lives on the faces normal to axis d: u1 on (nx+1) x ny x nz
/// x1-faces, u2 on nx x (ny+1) x nz x2-faces, u3 on nx x ny x (nz+1)
/// x3-faces. Face index i on axis 0 sits at x1 = i*dx.
class Grid {
public:
    explicit Grid(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }
    int nx() const { return spec_.nx; }
    int ny() const { return spec_.ny; }
    int nz() const { return spec_.nz; }
    double lx() const { return spec_.lx; }
    double ly() const { return spec_.ly; }
    double height() const { return spec_.h; }

    double dx() const { return dx_; }
    double dy() const { return dy_; }
    double dz() const { return dz_; }
    double spacing(int axis) const { return axis == 0 ? dx_ : (axis == 1 ? dy_ : dz_); }
    int cells(int axis) const { return axis == 0 ? spec_.nx : (axis == 1 ? spec_.ny : spec_.nz); }
    double cell_volume() const { return dx_ * dy_ * dz_; }
    std::size_t cell_count() const;

    double xc(int i) const { return (i + 0.5) * dx_; }
    double yc(int j) const { return (j + 0.5) * dy_; }
    double zc(int k) const { return (k + 0.5) * dz_; }
    double xf(int i) const { return i * dx_; }
    double yf(int j) const { return j * dy_; }
    double zf(int k) const { return k * dz_; }

    /// Position of the centre of face (i,j,k) normal to `axis`.
    std::array<double, 3> face_center(int axis, int i, int j, int k) const;

    /// Boundary classification of face (i,j,k) normal to `axis`; empty for
    /// interior faces. Faces normal to x1/x2 on the walls are lateral, the
    /// x3 = 0 faces are ground and x3 = h faces are upper.
    std::optional<BoundaryPart> classify_face(int axis, int i, int j, int k) const;

    /// Enumerates every face of the grid and tallies the boundary parts.
    BoundaryCounts count_boundary_faces() const;

private:
    GridSpec spec_;
    double dx_;
    double dy_;
    double dz_;
};

/// Validates the spec and builds the grid. Throws std::invalid_argument for
/// fewer than 4 cells along an axis or a nonpositive extent.
Grid build_grid(const GridSpec& spec);

}  // namespace atmo
