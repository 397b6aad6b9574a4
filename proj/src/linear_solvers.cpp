#include "atmo/linear_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace atmo {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    return s;
}

void remove_mean(std::span<double> v) {
    if (v.empty()) return;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    for (double& x : v) x -= mean;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

SolveStats pcg(const LinearMap& apply, const LinearMap& precondition, std::span<const double> b_in,
               std::span<double> x, double tol, int max_iter, bool mean_zero) {
    const std::size_t n = b_in.size();
    if (x.size() != n) throw std::invalid_argument("pcg: size mismatch");
    std::vector<double> b(b_in.begin(), b_in.end());
    if (mean_zero) {
        remove_mean(b);
        remove_mean(x);
    }
    std::vector<double> r(n), z(n), p(n), ap(n);
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    if (mean_zero) remove_mean(r);

    SolveStats stats;
    stats.residual = max_abs(r);
    if (stats.residual <= tol) {
        stats.converged = true;
        return stats;
    }
    precondition(r, z);
    if (mean_zero) remove_mean(z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double a = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        stats.iterations = it;
        stats.residual = max_abs(r);
        if (stats.residual <= tol) {
            stats.converged = true;
            break;
        }
        precondition(r, z);
        if (mean_zero) remove_mean(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (mean_zero) remove_mean(x);
    // Recursive residuals drift; confirm against the true one.
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    stats.residual = max_abs(r);
    stats.converged = stats.residual <= tol;
    return stats;
}

StencilOperator::StencilOperator(int ni, int nj, int nk, double cx, double cy, double cz,
                                 double shift, Sides sides)
    : ni_(ni), nj_(nj), nk_(nk), cx_(cx), cy_(cy), cz_(cz), shift_(shift), sides_(sides) {
    if (ni < 1 || nj < 1 || nk < 1) throw std::invalid_argument("stencil: empty block");
    diag_.resize(size());
    cprime_.resize(size());
    inv_denom_.resize(size());
    const double off = -cz_;
    for (int i = 0; i < ni_; ++i)
        for (int j = 0; j < nj_; ++j) {
            const std::size_t col = (static_cast<std::size_t>(i) * nj_ + j) * nk_;
            for (int k = 0; k < nk_; ++k) diag_[col + k] = diagonal(i, j, k);
            for (int k = 0; k < nk_; ++k) {
                const double denom = diag_[col + k] - (k > 0 ? off * cprime_[col + k - 1] : 0.0);
                inv_denom_[col + k] = 1.0 / denom;
                cprime_[col + k] = k < nk_ - 1 ? off / denom : 0.0;
            }
        }

    // Coarse operator P^T K P with P the column-constant prolongation:
    // vertical links cancel, horizontal links scale by nk.
    const int m_count = ni_ * nj_;
    band_ = nj_;
    const int w = band_ + 1;
    chol_.assign(static_cast<std::size_t>(m_count) * w, 0.0);
    auto a = [&](int m, int b) {
        const int i = m / nj_, j = m % nj_;
        if (b == 0) {
            double d = 0.0;
            const std::size_t col = static_cast<std::size_t>(m) * nk_;
            for (int k = 0; k < nk_; ++k) d += diag_[col + k];
            d -= 2.0 * cz_ * (nk_ - 1);
            if (m == 0 && singular()) d *= 2.0;
            return d;
        }
        if (b == 1 && j > 0) return -cy_ * nk_;
        if (b == nj_ && i > 0) return -cx_ * nk_;
        return 0.0;
    };
    auto L = [&](int m, int b) -> double& { return chol_[static_cast<std::size_t>(m) * w + b]; };
    for (int m = 0; m < m_count; ++m) {
        for (int b = std::min(band_, m); b >= 1; --b) {
            const int c = m - b;
            double s = a(m, b);
            for (int q = b + 1; q <= std::min(band_, m); ++q) {
                const int bc = q - b;  // column p = m - q relative to c
                if (bc <= band_) s -= L(m, q) * L(c, bc);
            }
            L(m, b) = s / L(c, 0);
        }
        double d = a(m, 0);
        for (int q = 1; q <= std::min(band_, m); ++q) d -= L(m, q) * L(m, q);
        if (!(d > 0.0)) throw std::runtime_error("stencil: coarse operator is not positive definite");
        L(m, 0) = std::sqrt(d);
    }
}

bool StencilOperator::singular() const {
    auto all_neumann = sides_.x_lo == SideCondition::neumann &&
                       sides_.x_hi == SideCondition::neumann &&
                       sides_.y_lo == SideCondition::neumann &&
                       sides_.y_hi == SideCondition::neumann &&
                       sides_.z_lo == SideCondition::neumann && sides_.z_hi == SideCondition::neumann;
    return shift_ == 0.0 && all_neumann;
}

double StencilOperator::diagonal(int i, int j, int k) const {
    auto side = [](bool has_nb, SideCondition cond, double c) {
        if (has_nb) return c;
        return cond == SideCondition::dirichlet ? 2.0 * c : 0.0;
    };
    return shift_ + side(i > 0, sides_.x_lo, cx_) + side(i < ni_ - 1, sides_.x_hi, cx_) +
           side(j > 0, sides_.y_lo, cy_) + side(j < nj_ - 1, sides_.y_hi, cy_) +
           side(k > 0, sides_.z_lo, cz_) + side(k < nk_ - 1, sides_.z_hi, cz_);
}

void StencilOperator::apply(std::span<const double> q, std::span<double> out) const {
    const std::size_t sj = static_cast<std::size_t>(nk_);
    const std::size_t si = static_cast<std::size_t>(nj_) * nk_;
    for (int i = 0; i < ni_; ++i)
        for (int j = 0; j < nj_; ++j) {
            const std::size_t col = i * si + j * sj;
            for (int k = 0; k < nk_; ++k) {
                const std::size_t c = col + k;
                double s = diag_[c] * q[c];
                if (i > 0) s -= cx_ * q[c - si];
                if (i < ni_ - 1) s -= cx_ * q[c + si];
                if (j > 0) s -= cy_ * q[c - sj];
                if (j < nj_ - 1) s -= cy_ * q[c + sj];
                if (k > 0) s -= cz_ * q[c - 1];
                if (k < nk_ - 1) s -= cz_ * q[c + 1];
                out[c] = s;
            }
        }
}

void StencilOperator::line_relax(std::span<const double> r, std::span<double> z) const {
    const double off = -cz_;
    for (std::size_t col = 0; col < size(); col += nk_) {
        double prev = 0.0;
        for (int k = 0; k < nk_; ++k) {
            const std::size_t c = col + k;
            prev = (r[c] - off * prev) * inv_denom_[c];
            z[c] = prev;
        }
        for (int k = nk_ - 2; k >= 0; --k) z[col + k] -= cprime_[col + k] * z[col + k + 1];
    }
}

void StencilOperator::coarse_solve(std::span<const double> r2, std::span<double> y2) const {
    const int m_count = ni_ * nj_;
    const int w = band_ + 1;
    auto L = [&](int m, int b) { return chol_[static_cast<std::size_t>(m) * w + b]; };
    for (int m = 0; m < m_count; ++m) {
        double s = r2[m];
        for (int b = 1; b <= std::min(band_, m); ++b) s -= L(m, b) * y2[m - b];
        y2[m] = s / L(m, 0);
    }
    for (int m = m_count - 1; m >= 0; --m) {
        double s = y2[m];
        for (int b = 1; b <= band_ && m + b < m_count; ++b) s -= L(m + b, b) * y2[m + b];
        y2[m] = s / L(m, 0);
    }
}

void StencilOperator::precondition(std::span<const double> r, std::span<double> z) const {
    line_relax(r, z);
    const std::size_t m_count = static_cast<std::size_t>(ni_) * nj_;
    std::vector<double> rc(m_count), yc(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        double s = 0.0;
        for (int k = 0; k < nk_; ++k) s += r[m * nk_ + k];
        rc[m] = s;
    }
    coarse_solve(rc, yc);
    for (std::size_t m = 0; m < m_count; ++m)
        for (int k = 0; k < nk_; ++k) z[m * nk_ + k] += yc[m];
}

}  // namespace atmo
