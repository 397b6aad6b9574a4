#pragma once

#include <limits>

#include "atmo/state.hpp"

namespace atmo {

/// Largest explicit step: cfl times the minimum of the advective,
/// viscous, concentration-diffusion and Coriolis limits, capped by dt_max.
double stable_dt(const SimState& state, const PhysParams& params, const DiffusionTensor& m,
                 const Grid& grid, double cfl,
                 double dt_max = std::numeric_limits<double>::infinity());

struct ProjectionResult {
    StaggeredVelocity u;
    ScalarField p;
    SolveStats stats;
};

/// Projects u* onto discretely divergence-free fields with the mobility
/// A = diag(1, 1, eps^-2): solves -div(A grad q) = -div(u*) (Neumann,
/// mean-free q = dt p) and sets u = u* - A grad q. Converged means
/// max|div u| <= tol. `p_guess` warm-starts the solve.
/// Throws NumericalError on non-convergence and std::invalid_argument if
/// the divergence has nonzero mean (normal boundary flux in u*).
ProjectionResult pressure_projection_anisotropic(const StaggeredVelocity& u_star, double eps,
                                                 double dt, const Grid& grid, double tol,
                                                 int max_iter,
                                                 const ScalarField* p_guess = nullptr);

/// Crank-Nicolson (Cayley) update for the Coriolis terms alone:
/// (I - dt/2 W) u_new = (I + dt/2 W) u, solved by fixed-point iteration.
/// Preserves ||u_H||^2 + eps^2 ||u3||^2 up to round-off.
StaggeredVelocity coriolis_update(const StaggeredVelocity& u, const PhysParams& params, double dt,
                                  const Grid& grid, SolverMode mode);

/// One step of the anisotropic system: explicit predictor (advection,
/// viscosity, forcing), Coriolis update, anisotropic projection, then the
/// explicit concentration update with the old velocity.
SimState step_anisotropic(const SimState& state, const StepInputs& in, double dt,
                          const Grid& grid);

/// Divergence-free initial velocity for the anisotropic system.
StaggeredVelocity project_initial_anisotropic(const StaggeredVelocity& u, double eps,
                                              const Grid& grid, double tol, int max_iter);

}  // namespace atmo
