#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <stdexcept>
#include <vector>

namespace atmo {

/// Dense 3D array, k fastest. Vertical columns are contiguous so line
/// solves along x3 touch consecutive memory.
class Array3 {
public:
    Array3() = default;
    Array3(int ni, int nj, int nk, double value = 0.0)
        : ni_(ni), nj_(nj), nk_(nk), data_(static_cast<std::size_t>(ni) * nj * nk, value) {}

    int ni() const { return ni_; }
    int nj() const { return nj_; }
    int nk() const { return nk_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * nj_ + j) * nk_ + k;
    }
    double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    bool same_shape(const Array3& o) const { return ni_ == o.ni_ && nj_ == o.nj_ && nk_ == o.nk_; }

    bool operator==(const Array3&) const = default;

private:
    int ni_ = 0;
    int nj_ = 0;
    int nk_ = 0;
    std::vector<double> data_;
};

/// 3D array with one layer of ghost values on every side; indices run
/// from -1 to n inclusive.
class Padded3 {
public:
    Padded3() = default;
    Padded3(int ni, int nj, int nk) : ni_(ni), nj_(nj), nk_(nk), store_(ni + 2, nj + 2, nk + 2) {}

    /// Copies `a` into the interior; ghosts start at zero.
    explicit Padded3(const Array3& a) : Padded3(a.ni(), a.nj(), a.nk()) {
        for (int i = 0; i < ni_; ++i)
            for (int j = 0; j < nj_; ++j)
                for (int k = 0; k < nk_; ++k) (*this)(i, j, k) = a(i, j, k);
    }

    int ni() const { return ni_; }
    int nj() const { return nj_; }
    int nk() const { return nk_; }

    double& operator()(int i, int j, int k) { return store_(i + 1, j + 1, k + 1); }
    double operator()(int i, int j, int k) const { return store_(i + 1, j + 1, k + 1); }

    Array3 interior() const {
        Array3 out(ni_, nj_, nk_);
        for (int i = 0; i < ni_; ++i)
            for (int j = 0; j < nj_; ++j)
                for (int k = 0; k < nk_; ++k) out(i, j, k) = (*this)(i, j, k);
        return out;
    }

private:
    int ni_ = 0;
    int nj_ = 0;
    int nk_ = 0;
    Array3 store_;
};

/// Cell-centred scalar on an nx x ny x nz grid (concentration, pressure,
/// sampled sources).
using ScalarField = Array3;

/// Horizontal nx x ny field (surface pressure, ground traction).
class Array2 {
public:
    Array2() = default;
    Array2(int ni, int nj, double value = 0.0)
        : ni_(ni), nj_(nj), data_(static_cast<std::size_t>(ni) * nj, value) {}

    int ni() const { return ni_; }
    int nj() const { return nj_; }
    std::size_t size() const { return data_.size(); }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * nj_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * nj_ + j]; }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool operator==(const Array2&) const = default;

private:
    int ni_ = 0;
    int nj_ = 0;
    std::vector<double> data_;
};

/// Face-centred rescaled velocity (u1, u2, u3) on the MAC grid.
struct StaggeredVelocity {
    Array3 u1;  ///< (nx+1) x ny x nz
    Array3 u2;  ///< nx x (ny+1) x nz
    Array3 u3;  ///< nx x ny x (nz+1)

    StaggeredVelocity() = default;
    StaggeredVelocity(int nx, int ny, int nz)
        : u1(nx + 1, ny, nz), u2(nx, ny + 1, nz), u3(nx, ny, nz + 1) {}
    StaggeredVelocity(Array3 a, Array3 b, Array3 c)
        : u1(std::move(a)), u2(std::move(b)), u3(std::move(c)) {}

    Array3& component(int d) { return d == 0 ? u1 : (d == 1 ? u2 : u3); }
    const Array3& component(int d) const { return d == 0 ? u1 : (d == 1 ? u2 : u3); }

    bool operator==(const StaggeredVelocity&) const = default;
};

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Sum of squares times `weight`; the discrete L2 norm squared when the
/// weight is the cell volume.
inline double sum_sq(std::span<const double> v, double weight) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s * weight;
}

inline void require_same_shape(const Array3& a, const Array3& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string("size mismatch: ") + what);
}

}  // namespace atmo
