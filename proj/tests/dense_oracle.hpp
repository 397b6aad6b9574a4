#pragma once

// Dense semi-discrete reference for one step of the anisotropic scheme.
// Every operator is assembled as an explicit matrix from affine face and
// cell lookups that encode the boundary rules directly; nothing here calls
// the library operators.

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

/// Affine functional sum coef * x[index] + c.
struct Lin {
    std::vector<std::pair<int, double>> t;
    double c = 0.0;
};

inline Lin unit(int index) { return {{{index, 1.0}}, 0.0}; }
inline Lin operator+(Lin a, const Lin& b) {
    a.t.insert(a.t.end(), b.t.begin(), b.t.end());
    a.c += b.c;
    return a;
}
inline Lin operator*(double s, Lin a) {
    for (auto& [i, v] : a.t) v *= s;
    a.c *= s;
    return a;
}
inline Lin operator-(const Lin& a, const Lin& b) { return a + (-1.0) * b; }
inline double eval(const Lin& a, const std::vector<double>& x) {
    double s = a.c;
    for (auto [i, v] : a.t) s += v * x[i];
    return s;
}

class Matrix {
public:
    Matrix(int r, int c) : r_(r), c_(c), a_(static_cast<std::size_t>(r) * c, 0.0) {}
    int rows() const { return r_; }
    int cols() const { return c_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * c_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * c_ + j]; }
    void add_row(int i, const Lin& l, double s = 1.0) {
        for (auto [j, v] : l.t) (*this)(i, j) += s * v;
    }
    std::vector<double> operator*(const std::vector<double>& x) const {
        std::vector<double> y(r_, 0.0);
        for (int i = 0; i < r_; ++i) {
            double s = 0.0;
            for (int j = 0; j < c_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
    Matrix operator*(const Matrix& b) const {
        Matrix out(r_, b.c_);
        for (int i = 0; i < r_; ++i)
            for (int p = 0; p < c_; ++p) {
                const double v = (*this)(i, p);
                if (v == 0.0) continue;
                for (int j = 0; j < b.c_; ++j) out(i, j) += v * b(p, j);
            }
        return out;
    }

private:
    int r_, c_;
    std::vector<double> a_;
};

/// Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
    const int n = a.rows();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (a(piv, col) == 0.0) throw std::runtime_error("oracle: singular matrix");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int j = r + 1; j < n; ++j) s -= a(r, j) * x[j];
        x[r] = s / a(r, r);
    }
    return x;
}

struct Setup {
    int n[3];
    double h[3];
    double nu[3];
    double eps;
    double f0, l0, l_slope;
    double theta[2];  ///< uniform ground traction
    double m[3][3];   ///< uniform diffusion tensor
    double intensity, src_width, src_switch;
    std::array<double, 3> src_at;
};

/// Unknown layout: u1, u2, u3 faces (component d has n_d + 1 entries
/// along axis d, k fastest), then the cells.
class Scheme {
public:
    explicit Scheme(const Setup& s) : s_(s) {
        int off = 0;
        for (int d = 0; d < 3; ++d) {
            for (int a = 0; a < 3; ++a) dim_[d][a] = s.n[a] + (a == d ? 1 : 0);
            off_[d] = off;
            off += dim_[d][0] * dim_[d][1] * dim_[d][2];
        }
        nvel_ = off;
        ncell_ = s.n[0] * s.n[1] * s.n[2];
    }

    int nvel() const { return nvel_; }
    int ncell() const { return ncell_; }
    int face(int d, int i, int j, int k) const {
        return off_[d] + (i * dim_[d][1] + j) * dim_[d][2] + k;
    }
    int cell(int i, int j, int k) const { return (i * s_.n[1] + j) * s_.n[2] + k; }
    const int* dims(int d) const { return dim_[d]; }

    /// Face unknown or ghost of component d. The normal faces on the walls
    /// are fixed at zero.
    Lin U(int d, std::array<int, 3> p) const {
        for (int a = 0; a < 3; ++a) {
            if (a == d) continue;
            if (p[a] == -1 || p[a] == s_.n[a]) {
                auto q = p;
                q[a] = p[a] == -1 ? 0 : s_.n[a] - 1;
                Lin in = U(d, q);
                if (a == 2 && p[a] == -1) {
                    // ground: nu3 (u_0 - u_ghost) / dz = theta
                    in.c -= s_.theta[d] * s_.h[2] / s_.nu[2];
                    return in;
                }
                return -1.0 * in;
            }
        }
        if (p[d] == 0 || p[d] == s_.n[d]) return {};
        if (p[d] < 0 || p[d] > s_.n[d]) throw std::logic_error("oracle: lookup out of range");
        return unit(face(d, p[0], p[1], p[2]));
    }

    bool interior_face(int d, const std::array<int, 3>& p) const {
        return p[d] > 0 && p[d] < s_.n[d];
    }

    /// Cell value or ghost of the concentration.
    Lin Cv(int i, int j, int k) const {
        const int nx = s_.n[0], ny = s_.n[1], nz = s_.n[2];
        if (j < 0) return -1.0 * Cv(i, 0, k);
        if (j >= ny) return -1.0 * Cv(i, ny - 1, k);
        if (i < 0) return -1.0 * Cv(0, j, k);
        if (i >= nx) return -1.0 * Cv(nx - 1, j, k);
        if (k >= nz) return -1.0 * Cv(i, j, nz - 1);
        if (k < 0) {
            // M31 d1C + M32 d2C + M33 (C_0 - C_ghost) / dz = 0
            const Lin d1 = (0.5 / s_.h[0]) * (Cv(i + 1, j, 0) - Cv(i - 1, j, 0));
            const Lin d2 = (0.5 / s_.h[1]) * (Cv(i, j + 1, 0) - Cv(i, j - 1, 0));
            return Cv(i, j, 0) + (s_.h[2] / s_.m[2][2]) * (s_.m[2][0] * d1 + s_.m[2][1] * d2);
        }
        return unit(nvel_ + cell(i, j, k));
    }

    double alpha(double y) const { return 2.0 * s_.f0 * std::sin(s_.l0 + s_.l_slope * y); }
    double beta(double y) const { return 2.0 * s_.f0 * std::cos(s_.l0 + s_.l_slope * y); }
    double yc(int j) const { return (j + 0.5) * s_.h[1]; }
    double yf(int j) const { return j * s_.h[1]; }

    /// Velocity Laplacian Delta_nu as (matrix over all unknowns, constant).
    std::pair<Matrix, std::vector<double>> laplacian() const {
        Matrix L(nvel_, nvel_ + ncell_);
        std::vector<double> b(nvel_, 0.0);
        for_faces([&](int d, std::array<int, 3> p) {
            Lin row;
            for (int a = 0; a < 3; ++a) {
                auto pp = p, pm = p;
                ++pp[a];
                --pm[a];
                row = row + (s_.nu[a] / (s_.h[a] * s_.h[a])) * (U(d, pp) - 2.0 * U(d, p) + U(d, pm));
            }
            const int r = face(d, p[0], p[1], p[2]);
            L.add_row(r, row);
            b[r] = row.c;
        });
        return {std::move(L), b};
    }

    /// (u . grad) u_d in donor-cell advective form with the transporting
    /// velocities of `x` frozen, as a matrix acting on the advected field.
    std::pair<Matrix, std::vector<double>> velocity_advection(const std::vector<double>& x) const {
        Matrix A(nvel_, nvel_ + ncell_);
        std::vector<double> b(nvel_, 0.0);
        for_faces([&](int d, std::array<int, 3> p) {
            Lin row;
            for (int a = 0; a < 3; ++a)
                for (int side : {+1, -1}) {
                    // transport through the control-volume face of axis a
                    double w;
                    if (a == d) {
                        auto q = p;
                        q[a] += side;
                        w = 0.5 * (eval(U(d, p), x) + eval(U(d, q), x));
                    } else {
                        auto lo = p, hi = p;
                        lo[d] -= 1;
                        if (side > 0) {
                            lo[a] += 1;
                            hi[a] += 1;
                        }
                        w = 0.5 * (eval(U(a, lo), x) + eval(U(a, hi), x));
                    }
                    const double out = side * w;
                    if (out < 0.0) {
                        auto q = p;
                        q[a] += side;
                        row = row + (out / s_.h[a]) * (U(d, q) - U(d, p));
                    }
                }
            const int r = face(d, p[0], p[1], p[2]);
            A.add_row(r, row);
            b[r] = row.c;
        });
        return {std::move(A), b};
    }

    /// Coriolis matrix W: du1 = alpha u2 - eps beta u3, du2 = -alpha u1,
    /// du3 = beta/eps u1, with four-point pairings.
    Matrix coriolis() const {
        Matrix W(nvel_, nvel_);
        const int nx = s_.n[0], ny = s_.n[1], nz = s_.n[2];
        for (int i = 1; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                for (int k = 0; k < nz; ++k) {
                    const int r = face(0, i, j, k);
                    for (int ii = i - 1; ii <= i; ++ii) {
                        for (int jj = j; jj <= j + 1; ++jj) {
                            if (jj == 0 || jj == ny) continue;
                            const double a = 0.25 * alpha(0.5 * (yc(j) + yf(jj)));
                            const int c = face(1, ii, jj, k);
                            W(r, c) += a;
                            W(c, r) -= a;
                        }
                        for (int kk = k; kk <= k + 1; ++kk) {
                            if (kk == 0 || kk == nz) continue;
                            const double bt = 0.25 * beta(yc(j));
                            const int c = face(2, ii, j, kk);
                            W(r, c) -= s_.eps * bt;
                            W(c, r) += bt / s_.eps;
                        }
                    }
                }
        return W;
    }

    /// Cell divergence (ncell x nvel).
    Matrix divergence() const {
        Matrix D(ncell_, nvel_);
        for (int i = 0; i < s_.n[0]; ++i)
            for (int j = 0; j < s_.n[1]; ++j)
                for (int k = 0; k < s_.n[2]; ++k) {
                    const int r = cell(i, j, k);
                    for (int d = 0; d < 3; ++d) {
                        std::array<int, 3> lo{i, j, k}, hi{i, j, k};
                        ++hi[d];
                        D(r, face(d, hi[0], hi[1], hi[2])) += 1.0 / s_.h[d];
                        D(r, face(d, lo[0], lo[1], lo[2])) -= 1.0 / s_.h[d];
                    }
                }
        return D;
    }

    /// A grad on interior faces (nvel x ncell), A = diag(1, 1, eps^-2).
    Matrix mobility_gradient() const {
        Matrix G(nvel_, ncell_);
        for_faces([&](int d, std::array<int, 3> p) {
            const double a = d == 2 ? 1.0 / (s_.eps * s_.eps) : 1.0;
            auto lo = p;
            --lo[d];
            const int r = face(d, p[0], p[1], p[2]);
            G(r, cell(p[0], p[1], p[2])) += a / s_.h[d];
            G(r, cell(lo[0], lo[1], lo[2])) -= a / s_.h[d];
        });
        return G;
    }

    /// div(M grad C) as (ncell x (nvel + ncell) matrix, constant).
    std::pair<Matrix, std::vector<double>> tensor_diffusion() const {
        const int nx = s_.n[0], ny = s_.n[1], nz = s_.n[2];
        Matrix K(ncell_, nvel_ + ncell_);
        std::vector<double> b(ncell_, 0.0);
        // face flux for the face of axis d below cell p
        auto flux = [&](int d, std::array<int, 3> p) {
            if (d == 2 && p[2] == 0) return Lin{};
            auto lo = p;
            --lo[d];
            Lin g[3];
            g[d] = (1.0 / s_.h[d]) * (Cv(p[0], p[1], p[2]) - Cv(lo[0], lo[1], lo[2]));
            for (int e = 0; e < 3; ++e) {
                if (e == d) continue;
                Lin s;
                for (auto q : {lo, p}) {
                    auto qp = q, qm = q;
                    ++qp[e];
                    --qm[e];
                    s = s + (Cv(qp[0], qp[1], qp[2]) - Cv(qm[0], qm[1], qm[2]));
                }
                g[e] = (0.25 / s_.h[e]) * s;
            }
            return s_.m[d][0] * g[0] + s_.m[d][1] * g[1] + s_.m[d][2] * g[2];
        };
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                for (int k = 0; k < nz; ++k) {
                    Lin row;
                    for (int d = 0; d < 3; ++d) {
                        std::array<int, 3> p{i, j, k}, q{i, j, k};
                        ++q[d];
                        row = row + (1.0 / s_.h[d]) * (flux(d, q) - flux(d, p));
                    }
                    K.add_row(cell(i, j, k), row);
                    b[cell(i, j, k)] = row.c;
                }
        return {std::move(K), b};
    }

    /// u . grad C, donor cell, zero-gradient neighbours at the walls.
    Matrix scalar_advection(const std::vector<double>& x) const {
        Matrix A(ncell_, nvel_ + ncell_);
        for (int i = 0; i < s_.n[0]; ++i)
            for (int j = 0; j < s_.n[1]; ++j)
                for (int k = 0; k < s_.n[2]; ++k) {
                    const std::array<int, 3> p{i, j, k};
                    const int r = cell(i, j, k);
                    for (int d = 0; d < 3; ++d)
                        for (int side : {+1, -1}) {
                            auto f = p;
                            if (side > 0) ++f[d];
                            const double out = side * x[face(d, f[0], f[1], f[2])];
                            auto q = p;
                            q[d] += side;
                            if (out >= 0.0 || q[d] < 0 || q[d] >= s_.n[d]) continue;
                            A(r, nvel_ + cell(q[0], q[1], q[2])) += out / s_.h[d];
                            A(r, nvel_ + r) -= out / s_.h[d];
                        }
                }
        return A;
    }

    double source(int i, int j, int k, double t) const {
        if (t < s_.src_switch) return 0.0;
        const double x[3] = {(i + 0.5) * s_.h[0], (j + 0.5) * s_.h[1], (k + 0.5) * s_.h[2]};
        double r2 = 0.0;
        for (int d = 0; d < 3; ++d) r2 += (x[d] - s_.src_at[d]) * (x[d] - s_.src_at[d]);
        const double e = s_.src_width;
        return s_.intensity * std::pow(M_PI * e * e, -1.5) * std::exp(-r2 / (e * e));
    }

    /// Projection q solving K q = -D u with K = -D A grad; returns (u, q).
    std::pair<std::vector<double>, std::vector<double>> project(const std::vector<double>& u) const {
        const Matrix D = divergence();
        const Matrix G = mobility_gradient();
        Matrix K = D * G;
        const double w = 1.0 / ncell_;
        for (int r = 0; r < ncell_; ++r)
            for (int c = 0; c < ncell_; ++c) K(r, c) = -K(r, c) + w;
        std::vector<double> rhs = D * u;
        for (double& v : rhs) v = -v;
        const std::vector<double> q = solve(K, rhs);
        std::vector<double> out = u;
        const std::vector<double> gq = G * q;
        for (int f = 0; f < nvel_; ++f) out[f] -= gq[f];
        return {out, q};
    }

    struct Step {
        std::vector<double> u, p, c;
    };

    /// x = (velocity, concentration) at time t.
    Step step(const std::vector<double>& x, double t, double dt) const {
        auto [L, bl] = laplacian();
        auto [A, ba] = velocity_advection(x);
        std::vector<double> lx = L * x, ax = A * x;
        std::vector<double> ustar(nvel_, 0.0);
        for (int f = 0; f < nvel_; ++f) ustar[f] = x[f] + dt * ((lx[f] + bl[f]) - (ax[f] + ba[f]));

        const Matrix W = coriolis();
        Matrix lhs(nvel_, nvel_);
        for (int r = 0; r < nvel_; ++r)
            for (int c = 0; c < nvel_; ++c) lhs(r, c) = (r == c ? 1.0 : 0.0) - 0.5 * dt * W(r, c);
        std::vector<double> rhs = W * ustar;
        for (int f = 0; f < nvel_; ++f) rhs[f] = ustar[f] + 0.5 * dt * rhs[f];
        const std::vector<double> urot = solve(lhs, rhs);

        auto [unew, q] = project(urot);
        Step out;
        out.u = unew;
        out.p = q;
        for (double& v : out.p) v /= dt;

        auto [K, bk] = tensor_diffusion();
        const Matrix Ac = scalar_advection(x);
        const std::vector<double> kx = K * x, acx = Ac * x;
        out.c.resize(ncell_);
        for (int i = 0; i < s_.n[0]; ++i)
            for (int j = 0; j < s_.n[1]; ++j)
                for (int k = 0; k < s_.n[2]; ++k) {
                    const int r = cell(i, j, k);
                    out.c[r] = x[nvel_ + r] + dt * (kx[r] + bk[r] - acx[r] + source(i, j, k, t));
                }
        return out;
    }

private:
    template <class F>
    void for_faces(F&& f) const {
        for (int d = 0; d < 3; ++d)
            for (int i = 0; i < dim_[d][0]; ++i)
                for (int j = 0; j < dim_[d][1]; ++j)
                    for (int k = 0; k < dim_[d][2]; ++k) {
                        const std::array<int, 3> p{i, j, k};
                        if (interior_face(d, p)) f(d, p);
                    }
    }

    Setup s_;
    int dim_[3][3];
    int off_[3];
    int nvel_, ncell_;
};

}  // namespace oracle
