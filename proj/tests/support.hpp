#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>

#include "atmo/field.hpp"
#include "atmo/grid.hpp"
#include "atmo/params.hpp"

namespace test {

inline constexpr double pi = std::numbers::pi;

inline atmo::Grid grid(int nx, int ny, int nz, double lx = 1.0, double ly = 1.0, double h = 1.0) {
    return atmo::build_grid({nx, ny, nz, lx, ly, h});
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform(double a = 0.0, double b = 1.0) {
        return a + (b - a) * static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }
    void fill(atmo::Array3& a, double lo, double hi) {
        for (double& v : a.values()) v = uniform(lo, hi);
    }
    /// Random SPD matrix Q diag(l) Q^T with eigenvalues in [lo, hi].
    atmo::Mat3 spd(double lo, double hi) {
        atmo::Mat3 a{};
        for (auto& r : a)
            for (double& v : r) v = uniform(-1.0, 1.0);
        // Gram-Schmidt for Q.
        atmo::Mat3 q{};
        for (int c = 0; c < 3; ++c) {
            std::array<double, 3> v{a[0][c], a[1][c], a[2][c]};
            for (int p = 0; p < c; ++p) {
                double d = 0.0;
                for (int r = 0; r < 3; ++r) d += v[r] * q[r][p];
                for (int r = 0; r < 3; ++r) v[r] -= d * q[r][p];
            }
            const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            for (int r = 0; r < 3; ++r) q[r][c] = v[r] / n;
        }
        const std::array<double, 3> l{uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
        atmo::Mat3 m{};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                for (int p = 0; p < 3; ++p) m[r][c] += q[r][p] * l[p] * q[c][p];
        // Exact symmetry.
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < r; ++c) m[r][c] = m[c][r];
        return m;
    }

private:
    std::mt19937_64 gen_;
};

/// Cell-centred samples of f.
inline atmo::ScalarField sample(const atmo::Grid& g, const std::function<double(double, double, double)>& f) {
    atmo::ScalarField out(g.nx(), g.ny(), g.nz());
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j)
            for (int k = 0; k < g.nz(); ++k) out(i, j, k) = f(g.xc(i), g.yc(j), g.zc(k));
    return out;
}

/// Face samples of a vector field, component d at its own faces.
inline atmo::StaggeredVelocity sample_faces(
    const atmo::Grid& g, const std::array<std::function<double(double, double, double)>, 3>& f) {
    atmo::StaggeredVelocity u(g.nx(), g.ny(), g.nz());
    for (int d = 0; d < 3; ++d) {
        atmo::Array3& a = u.component(d);
        for (int i = 0; i < a.ni(); ++i)
            for (int j = 0; j < a.nj(); ++j)
                for (int k = 0; k < a.nk(); ++k) {
                    const auto p = g.face_center(d, i, j, k);
                    a(i, j, k) = f[d](p[0], p[1], p[2]);
                }
    }
    return u;
}

inline double max_diff(const atmo::Array3& a, const atmo::Array3& b) {
    double m = 0.0;
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t n = 0; n < av.size(); ++n) m = std::max(m, std::abs(av[n] - bv[n]));
    return m;
}

/// Least-squares slope of log(err) against log(h).
inline double order(const std::vector<double>& h, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace test
