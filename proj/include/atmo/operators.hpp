#pragma once

#include "atmo/field.hpp"
#include "atmo/grid.hpp"
#include "atmo/params.hpp"

namespace atmo {

enum class AdvectionScheme { upwind1, centered2 };

/// Which system a velocity field belongs to. The anisotropic system
/// prognoses u3 and imposes u3 = 0 on every wall; the hydrostatic one
/// diagnoses u3 and constrains it only on the ground.
enum class SolverMode { anisotropic, hydrostatic };

/// Ground condition for cell-centred scalars; Gamma_A is always Dirichlet.
enum class GroundBc { neumann, dirichlet };

/// Velocity with one ghost layer per component, as produced by the
/// boundary conditions. Face values on boundary-normal faces are real
/// (not ghosts) and are zero after the conditions are applied.
struct GhostedVelocity {
    Padded3 u1;
    Padded3 u2;
    Padded3 u3;

    StaggeredVelocity interior() const { return {u1.interior(), u2.interior(), u3.interior()}; }
};

/// Cell-centred MAC divergence.
ScalarField divergence(const StaggeredVelocity& u, const Grid& grid);

/// Face gradient of a cell-centred pressure. Boundary faces carry zero,
/// matching the homogeneous Neumann condition of the projection.
StaggeredVelocity grad_pressure(const ScalarField& p, const Grid& grid);

/// Velocity boundary conditions:
///   u1 = u2 = 0 on Gamma_A (normal faces zeroed, tangential ghosts odd),
///   u3 = 0 on the ground, and in anisotropic mode also on the top and
///   lateral walls,
///   ground ghosts of u_H chosen so nu3 (u_first - u_ghost) / dz = theta_H.
GhostedVelocity apply_velocity_bcs(const StaggeredVelocity& u, const BoundaryForcing& theta,
                                   double nu3, const Grid& grid, SolverMode mode);

/// Ghosts by linear extrapolation and boundary faces left untouched; used
/// to evaluate operators on analytic fields that ignore the walls.
GhostedVelocity extrapolated_ghosts(const StaggeredVelocity& u);

/// Ghost extension of a cell scalar with odd (C = 0) reflection on Gamma_A
/// and the requested ground condition.
Padded3 scalar_ghosts(const ScalarField& c, GroundBc ground);

/// nu1 d11 f + nu2 d22 f + nu3 d33 f on cell centres, 7-point stencil with
/// ghost values from `ground` and Dirichlet on Gamma_A.
ScalarField anisotropic_laplacian(const ScalarField& f, const Vec3& nu, const Grid& grid,
                                  GroundBc ground = GroundBc::neumann);

/// Same stencil on a padded array (ghosts already set); evaluated at every
/// stored entry of the interior.
Array3 laplacian_padded(const Padded3& f, const Vec3& nu, const Vec3& spacing);

/// Delta_nu applied componentwise to a ghosted velocity. Boundary-normal
/// faces (which are not unknowns) get zero; in hydrostatic mode u3 gets
/// zero everywhere since it is diagnostic.
StaggeredVelocity velocity_laplacian(const GhostedVelocity& u, const Vec3& nu, const Grid& grid,
                                     SolverMode mode);

/// Concentration ghosts: C = 0 (odd reflection) on Gamma_A; on the ground
/// the ghost solves M31 d1C + M32 d2C + M33 (C_first - C_ghost)/dz = 0 with
/// the horizontal derivatives taken from the first interior layer.
Padded3 apply_concentration_bcs(const ScalarField& c, const DiffusionTensor& m, const Grid& grid);

/// Face fluxes F_d = sum_j M_dj d_j C of a ghost-extended concentration.
/// Normal derivatives are face differences; transverse derivatives are
/// averages of the central differences in the two adjacent cells. The
/// ground flux is exactly zero.
struct DiffusionFluxes {
    Array3 f1;  ///< (nx+1) x ny x nz
    Array3 f2;  ///< nx x (ny+1) x nz
    Array3 f3;  ///< nx x ny x (nz+1)
};
DiffusionFluxes diffusion_fluxes(const Padded3& cg, const DiffusionTensor& m, const Grid& grid);

/// Cell divergence of face fluxes.
ScalarField flux_divergence(const DiffusionFluxes& f, const Grid& grid);

/// div(M grad C) in conservative flux form with the concentration boundary
/// conditions applied. Throws std::domain_error if M is not coercive.
ScalarField diffuse_concentration(const ScalarField& c, const DiffusionTensor& m,
                                  const Grid& grid);

/// u . grad C in advective donor-cell form. Faces on the walls carry no
/// flux for an admissible velocity, so C ghosts are zero-gradient copies.
ScalarField advect_scalar(const StaggeredVelocity& u, const ScalarField& c,
                          AdvectionScheme scheme, const Grid& grid);

/// (u . grad) u_d for every component on its own control volume. The
/// transporting face velocities are averaged from the neighbouring faces
/// so the control-volume divergence is the mean of two cell divergences.
StaggeredVelocity advect_velocity(const GhostedVelocity& u, AdvectionScheme scheme,
                                  const Grid& grid);

/// Coriolis tendency of the rescaled momentum equations:
///   d_t u1 +=  alpha u2 - eps beta u3
///   d_t u2 += -alpha u1
///   d_t u3 +=  (beta / eps) u1            (anisotropic only)
/// Cross-component values are four-point averages; each coupled pair uses
/// one coefficient so the operator is skew in the energy inner product
/// ||u_H||^2 + eps^2 ||u3||^2.
StaggeredVelocity coriolis_tendency(const StaggeredVelocity& u, const PhysParams& params,
                                    const Grid& grid, SolverMode mode);

/// Sets every boundary-normal face to zero (u1 on x1 walls, u2 on x2
/// walls, u3 on ground and top).
void zero_normal_faces(StaggeredVelocity& u, SolverMode mode);

}  // namespace atmo
