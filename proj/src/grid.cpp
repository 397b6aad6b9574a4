#include "atmo/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace atmo {

Grid::Grid(const GridSpec& spec)
    : spec_(spec), dx_(spec.lx / spec.nx), dy_(spec.ly / spec.ny), dz_(spec.h / spec.nz) {}

std::size_t Grid::cell_count() const {
    return static_cast<std::size_t>(spec_.nx) * spec_.ny * spec_.nz;
}

std::array<double, 3> Grid::face_center(int axis, int i, int j, int k) const {
    switch (axis) {
        case 0: return {xf(i), yc(j), zc(k)};
        case 1: return {xc(i), yf(j), zc(k)};
        default: return {xc(i), yc(j), zf(k)};
    }
}

std::optional<BoundaryPart> Grid::classify_face(int axis, int i, int j, int k) const {
    switch (axis) {
        case 0:
            if (i == 0 || i == spec_.nx) return BoundaryPart::lateral;
            return std::nullopt;
        case 1:
            if (j == 0 || j == spec_.ny) return BoundaryPart::lateral;
            return std::nullopt;
        default:
            if (k == 0) return BoundaryPart::ground;
            if (k == spec_.nz) return BoundaryPart::upper;
            return std::nullopt;
    }
}

BoundaryCounts Grid::count_boundary_faces() const {
    BoundaryCounts counts;
    for (int axis = 0; axis < 3; ++axis) {
        const int ni = spec_.nx + (axis == 0);
        const int nj = spec_.ny + (axis == 1);
        const int nk = spec_.nz + (axis == 2);
        for (int i = 0; i < ni; ++i)
            for (int j = 0; j < nj; ++j)
                for (int k = 0; k < nk; ++k) {
                    auto part = classify_face(axis, i, j, k);
                    if (!part) continue;
                    switch (*part) {
                        case BoundaryPart::ground: ++counts.ground; break;
                        case BoundaryPart::upper: ++counts.upper; break;
                        case BoundaryPart::lateral: ++counts.lateral; break;
                    }
                }
    }
    return counts;
}

Grid build_grid(const GridSpec& spec) {
    if (spec.nx < 4 || spec.ny < 4 || spec.nz < 4)
        throw std::invalid_argument("grid: need at least 4 cells per axis, got " +
                                    std::to_string(spec.nx) + "x" + std::to_string(spec.ny) +
                                    "x" + std::to_string(spec.nz));
    if (!(spec.lx > 0.0) || !(spec.ly > 0.0) || !(spec.h > 0.0))
        throw std::invalid_argument("grid: extents lx, ly, h must be positive");
    Grid grid(spec);
    if (!std::isfinite(grid.dx()) || !std::isfinite(grid.dy()) || !std::isfinite(grid.dz()))
        throw std::invalid_argument("grid: cell sizes are not finite");
    return grid;
}

}  // namespace atmo
