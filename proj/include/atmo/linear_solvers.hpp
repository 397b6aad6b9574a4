#pragma once

#include <functional>
#include <span>
#include <vector>

namespace atmo {

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;  ///< max-norm of the final residual
    bool converged = false;
};

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned conjugate gradients for a symmetric positive
/// (semi)definite operator. Stops when max|b - A x| <= tol. With
/// `mean_zero` the operator is assumed to have the constants as null space:
/// right-hand side, preconditioned residuals and the result are kept
/// mean-free. `x` holds the initial guess on entry.
SolveStats pcg(const LinearMap& apply, const LinearMap& precondition, std::span<const double> b,
               std::span<double> x, double tol, int max_iter, bool mean_zero);

enum class SideCondition { neumann, dirichlet };

/// SPD seven-point operator on an ni x nj x nk cell block (k fastest):
///
///   (K q)_c = shift q_c + sum_d coef_d sum_{neighbours n} (q_c - q_n)
///
/// Missing neighbours follow the side condition: Neumann drops the link,
/// Dirichlet uses the odd ghost -q_c (value zero on the face).
class StencilOperator {
public:
    struct Sides {
        SideCondition x_lo = SideCondition::neumann, x_hi = SideCondition::neumann;
        SideCondition y_lo = SideCondition::neumann, y_hi = SideCondition::neumann;
        SideCondition z_lo = SideCondition::neumann, z_hi = SideCondition::neumann;
    };

    StencilOperator(int ni, int nj, int nk, double cx, double cy, double cz, double shift,
                    Sides sides);

    std::size_t size() const { return static_cast<std::size_t>(ni_) * nj_ * nk_; }
    void apply(std::span<const double> q, std::span<double> out) const;
    /// Exact tridiagonal solve along every vertical column of the operator
    /// with the horizontal links lumped onto the diagonal.
    void line_relax(std::span<const double> r, std::span<double> z) const;
    /// Exact solve of the column-summed (Galerkin, column-constant) 2D
    /// operator, one value per column. A singular operator is pinned at
    /// the first column.
    void coarse_solve(std::span<const double> r2, std::span<double> y2) const;
    /// Additive two-level preconditioner: line_relax plus the column
    /// constant correction from coarse_solve.
    void precondition(std::span<const double> r, std::span<double> z) const;

    bool singular() const;

private:
    double diagonal(int i, int j, int k) const;

    int ni_, nj_, nk_;
    double cx_, cy_, cz_, shift_;
    Sides sides_;
    std::vector<double> diag_;
    std::vector<double> cprime_, inv_denom_;  ///< column Thomas factors
    int band_ = 0;
    std::vector<double> chol_;  ///< banded Cholesky factor of the coarse operator
};

}  // namespace atmo
