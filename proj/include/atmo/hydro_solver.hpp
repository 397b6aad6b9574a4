#pragma once

#include "atmo/state.hpp"

namespace atmo {

struct SurfaceProjectionResult {
    StaggeredVelocity u;  ///< u1, u2 corrected; u3 copied from the input
    Array2 ps;
    SolveStats stats;
};

/// Barotropic projection: makes the depth integral of u_H horizontally
/// nondivergent by subtracting one surface-pressure gradient at every
/// level. Converged means max|div_H sum_k u_H dz| <= tol.
SurfaceProjectionResult surface_pressure_projection(const StaggeredVelocity& u_star, double dt,
                                                    const Grid& grid, double tol, int max_iter,
                                                    const Array2* ps_guess = nullptr);

/// Vertical velocity from u3 = 0 on the ground and the cumulative
/// horizontal divergence: u3(k+1) = u3(k) - dz div_H u(k).
Array3 diagnose_w(const StaggeredVelocity& u, const Grid& grid);

/// Depth-integrated horizontal divergence, one value per column.
Array2 barotropic_divergence(const StaggeredVelocity& u, const Grid& grid);

/// One step of the hydrostatic system: predictor for u_H, Coriolis update,
/// surface projection, diagnostic u3, concentration update.
SimState step_hydrostatic(const SimState& state, const StepInputs& in, double dt,
                          const Grid& grid);

/// Initial velocity satisfying the barotropic constraint, with u3 diagnosed.
StaggeredVelocity project_initial_hydrostatic(const StaggeredVelocity& u, const Grid& grid,
                                              double tol, int max_iter);

}  // namespace atmo
