#pragma once

#include <span>
#include <vector>

#include "atmo/state.hpp"

namespace atmo {

// ---- energy -------------------------------------------------------------

/// E = 1/2 (||u_H||^2 + eps^2 ||u3||^2 + ||C||^2); the hydrostatic energy
/// drops the u3 term.
double energy(const SimState& s, double eps, const Grid& grid, SolverMode mode);

/// Discrete ||grad_nu u_H||^2 + eps^2 ||grad_nu u3||^2 (anisotropic only)
/// as the summation-by-parts form -<u, Delta_nu u> with homogeneous
/// boundary ghosts: interior links carry the full cell weight, wall links
/// half of it.
double velocity_dissipation(const StaggeredVelocity& u, const PhysParams& params,
                            const Grid& grid, SolverMode mode);

/// -<C, div(M grad C)> with the scheme's concentration operator.
double concentration_dissipation(const ScalarField& c, const DiffusionTensor& m,
                                 const Grid& grid);

/// Face-vector form of (M grad C, grad C) and of ||grad C||^2: on every
/// face the full gradient vector g (normal difference plus averaged
/// transverse differences) is paired with the face tensor, summed with
/// the face weight and averaged over the three face families.
struct CoercivityAudit {
    double form = 0.0;      ///< sum (M g, g) w
    double grad_sq = 0.0;   ///< sum |g|^2 w
    double lambda = 0.0;    ///< coercivity constant of M
    double slack() const { return form - lambda * grad_sq; }
};
CoercivityAudit coercivity_audit(const ScalarField& c, const DiffusionTensor& m, const Grid& grid);

/// |<theta_H, u_H>_{Gamma_G}| with u_H on the lowest faces.
double boundary_work_rate(const StaggeredVelocity& u, const BoundaryForcing& theta,
                          const Grid& grid);

struct EnergyRecord {
    double t = 0.0;
    double E = 0.0;
    double D = 0.0;      ///< cumulative dissipation
    double W = 0.0;      ///< cumulative boundary work
    double Q = 0.0;      ///< cumulative source work
    double slack = 0.0;  ///< E(0) + W + Q - E(t) - D
    double conc_form = 0.0;   ///< face-vector (M grad C, grad C) at t
    double conc_bound = 0.0;  ///< lambda ||grad C||^2 at t
};

struct EnergyReport {
    std::vector<EnergyRecord> records;
    double lambda = 0.0;
    /// c dt D(T) with c = 1: size of the first-order time-discretisation
    /// defect the ledger can carry.
    double tol_scheme = 0.0;
    double min_slack() const;
};

/// Streaming energy ledger; feed states in time order. Integrals in time
/// are trapezoidal between consecutive states.
class EnergyLedger {
public:
    EnergyLedger(const PhysParams& params, const DiffusionTensor& m, const BoundaryForcing& theta,
                 const PollutionSource* source, const Grid& grid, SolverMode mode);

    void add(const SimState& s);
    const EnergyReport& report() const { return report_; }
    bool empty() const { return report_.records.empty(); }

private:
    PhysParams params_;
    const DiffusionTensor* m_;
    const BoundaryForcing* theta_;
    const PollutionSource* source_;
    const Grid* grid_;
    SolverMode mode_;
    double prev_d_ = 0.0, prev_w_ = 0.0, prev_q_ = 0.0;
    EnergyReport report_;
};

/// Energy ledger of a stored history. Throws std::invalid_argument when
/// the history is empty.
EnergyReport energy_balance(std::span<const SimState> history, const PhysParams& params,
                            const DiffusionTensor& m, const BoundaryForcing& theta,
                            const PollutionSource* source, const Grid& grid, SolverMode mode);

// ---- a-priori norms -----------------------------------------------------

struct AprioriNorms {
    double sup_u1 = 0.0, sup_u2 = 0.0, sup_eps_u3 = 0.0, sup_C = 0.0;  ///< sup_t L2
    double h1_u1 = 0.0, h1_u2 = 0.0, h1_eps_u3 = 0.0, h1_C = 0.0;      ///< L2_t H1
    double l2_u3 = 0.0, l2_C = 0.0;                                    ///< L2_t L2
};

class AprioriAccumulator {
public:
    AprioriAccumulator(double eps, const Grid& grid, SolverMode mode)
        : eps_(eps), grid_(&grid), mode_(mode) {}
    void add(const SimState& s);
    AprioriNorms result() const;
    bool empty() const { return count_ == 0; }

private:
    double eps_;
    const Grid* grid_;
    SolverMode mode_;
    long count_ = 0;
    double t_prev_ = 0.0;
    std::array<double, 6> prev_{};  ///< H1^2 of u1,u2,eps u3,C; L2^2 of u3,C
    std::array<double, 6> integral_{};
    std::array<double, 4> sup_{};
};

AprioriNorms apriori_norms(std::span<const SimState> history, double eps, const Grid& grid,
                           SolverMode mode);

// ---- time translation ---------------------------------------------------

struct TranslationReport {
    std::vector<double> h;
    std::vector<double> modulus;
    /// Least-squares slope of log(modulus) against log(h); NaN when a
    /// modulus vanishes.
    double exponent = 0.0;
};

/// (I - Delta_h)^{-1} C with C = 0 on Gamma_A and a Neumann ground.
ScalarField helmholtz_smooth(const ScalarField& c, const Grid& grid);

/// ||C(t+h) - C(t)|| in L2(0, T-h) of the Helmholtz-smoothed difference.
/// Snapshots must be uniformly spaced by `spacing`; every h must be a
/// multiple of it and below T/2. Throws for fewer than 3 values of h.
TranslationReport translation_modulus(std::span<const ScalarField> c_history, double spacing,
                                      std::span<const double> h_list, const Grid& grid);

// ---- convergence --------------------------------------------------------

struct SpaceTimeErrors {
    double err_uH = 0.0;
    double err_u3 = 0.0;
    double err_C = 0.0;
};

/// L2((0,T) x Omega) distances between two histories on the same
/// snapshot schedule (trapezoid in time). Throws std::invalid_argument for
/// mismatched schedules or grids.
SpaceTimeErrors space_time_errors(std::span<const SimState> a, std::span<const SimState> b,
                                  const Grid& grid);

struct ConvergenceRow {
    double eps = 0.0;
    double err_uH = 0.0;
    double err_u3 = 0.0;
    double err_C = 0.0;
    double energy_slack_min = 0.0;
    double runtime_s = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;  ///< decreasing eps
    double rate_uH = 0.0, rate_u3 = 0.0, rate_C = 0.0;
};

/// Rows sorted by decreasing eps and fitted log-log rates (NaN with fewer
/// than two rows or a zero error).
void finalize_report(ConvergenceReport& report);

struct AnisoRun {
    double eps;
    std::span<const SimState> history;
};
ConvergenceReport convergence_metrics(std::span<const AnisoRun> aniso_runs,
                                      std::span<const SimState> hydro, const Grid& grid);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace atmo
