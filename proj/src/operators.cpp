#include "atmo/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace atmo {

namespace {

void check_velocity(const StaggeredVelocity& u, const Grid& g) {
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    if (u.u1.ni() != nx + 1 || u.u1.nj() != ny || u.u1.nk() != nz || u.u2.ni() != nx ||
        u.u2.nj() != ny + 1 || u.u2.nk() != nz || u.u3.ni() != nx || u.u3.nj() != ny ||
        u.u3.nk() != nz + 1)
        throw std::invalid_argument("size mismatch: velocity does not match grid");
}

void check_cells(const ScalarField& c, const Grid& g) {
    if (c.ni() != g.nx() || c.nj() != g.ny() || c.nk() != g.nz())
        throw std::invalid_argument("size mismatch: scalar field does not match grid");
}

/// Face value of the 2D traction on an x1-face (i, j): mean of adjacent cells.
double theta_on_xface(const Array2& theta, int i, int j) {
    const int nx = theta.ni();
    if (i <= 0) return theta(0, j);
    if (i >= nx) return theta(nx - 1, j);
    return 0.5 * (theta(i - 1, j) + theta(i, j));
}

double theta_on_yface(const Array2& theta, int i, int j) {
    const int ny = theta.nj();
    if (j <= 0) return theta(i, 0);
    if (j >= ny) return theta(i, ny - 1);
    return 0.5 * (theta(i, j - 1) + theta(i, j));
}

// Donor-cell or centred face value times the outward face velocity, in
// advective form: flux * (phi_face - phi_centre).
inline double face_term(double flux, double phi_p, double phi_nb, AdvectionScheme scheme) {
    if (scheme == AdvectionScheme::centered2) return 0.5 * flux * (phi_nb - phi_p);
    return flux < 0.0 ? flux * (phi_nb - phi_p) : 0.0;
}

}  // namespace

ScalarField divergence(const StaggeredVelocity& u, const Grid& g) {
    check_velocity(u, g);
    const double rdx = 1.0 / g.dx(), rdy = 1.0 / g.dy(), rdz = 1.0 / g.dz();
    ScalarField out(g.nx(), g.ny(), g.nz());
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j)
            for (int k = 0; k < g.nz(); ++k)
                out(i, j, k) = (u.u1(i + 1, j, k) - u.u1(i, j, k)) * rdx +
                               (u.u2(i, j + 1, k) - u.u2(i, j, k)) * rdy +
                               (u.u3(i, j, k + 1) - u.u3(i, j, k)) * rdz;
    return out;
}

StaggeredVelocity grad_pressure(const ScalarField& p, const Grid& g) {
    check_cells(p, g);
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    StaggeredVelocity out(nx, ny, nz);
    for (int i = 1; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) out.u1(i, j, k) = (p(i, j, k) - p(i - 1, j, k)) / g.dx();
    for (int i = 0; i < nx; ++i)
        for (int j = 1; j < ny; ++j)
            for (int k = 0; k < nz; ++k) out.u2(i, j, k) = (p(i, j, k) - p(i, j - 1, k)) / g.dy();
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 1; k < nz; ++k) out.u3(i, j, k) = (p(i, j, k) - p(i, j, k - 1)) / g.dz();
    return out;
}

void zero_normal_faces(StaggeredVelocity& u, SolverMode mode) {
    const int nx = u.u2.ni(), ny = u.u1.nj(), nz = u.u1.nk();
    for (int j = 0; j < ny; ++j)
        for (int k = 0; k < nz; ++k) {
            u.u1(0, j, k) = 0.0;
            u.u1(nx, j, k) = 0.0;
        }
    for (int i = 0; i < nx; ++i)
        for (int k = 0; k < nz; ++k) {
            u.u2(i, 0, k) = 0.0;
            u.u2(i, ny, k) = 0.0;
        }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            u.u3(i, j, 0) = 0.0;
            if (mode == SolverMode::anisotropic) u.u3(i, j, nz) = 0.0;
        }
}

GhostedVelocity apply_velocity_bcs(const StaggeredVelocity& u_in, const BoundaryForcing& theta,
                                   double nu3, const Grid& g, SolverMode mode) {
    check_velocity(u_in, g);
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    const double dz = g.dz();
    const bool forced = theta.theta1.size() > 0;
    if (forced && (theta.theta1.ni() != nx || theta.theta1.nj() != ny ||
                   theta.theta2.ni() != nx || theta.theta2.nj() != ny))
        throw std::invalid_argument("size mismatch: boundary forcing does not match grid");

    StaggeredVelocity u = u_in;
    zero_normal_faces(u, mode);
    GhostedVelocity out{Padded3(u.u1), Padded3(u.u2), Padded3(u.u3)};

    // u1: tangential to x2 walls and to ground/top.
    Padded3& a = out.u1;
    for (int i = 0; i <= nx; ++i) {
        for (int k = 0; k < nz; ++k) {
            a(i, -1, k) = -a(i, 0, k);
            a(i, ny, k) = -a(i, ny - 1, k);
        }
        for (int j = 0; j < ny; ++j) {
            a(i, j, nz) = -a(i, j, nz - 1);
            const double th = forced ? theta_on_xface(theta.theta1, i, j) : 0.0;
            a(i, j, -1) = a(i, j, 0) - th * dz / nu3;
        }
    }
    // u2: tangential to x1 walls and to ground/top.
    Padded3& b = out.u2;
    for (int j = 0; j <= ny; ++j) {
        for (int k = 0; k < nz; ++k) {
            b(-1, j, k) = -b(0, j, k);
            b(nx, j, k) = -b(nx - 1, j, k);
        }
        for (int i = 0; i < nx; ++i) {
            b(i, j, nz) = -b(i, j, nz - 1);
            const double th = forced ? theta_on_yface(theta.theta2, i, j) : 0.0;
            b(i, j, -1) = b(i, j, 0) - th * dz / nu3;
        }
    }
    // u3: tangential to the lateral walls. Odd reflection where the
    // anisotropic system imposes u3 = 0 on Gamma_L, even otherwise.
    Padded3& c = out.u3;
    const double sign = mode == SolverMode::anisotropic ? -1.0 : 1.0;
    for (int k = 0; k <= nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            c(-1, j, k) = sign * c(0, j, k);
            c(nx, j, k) = sign * c(nx - 1, j, k);
        }
        for (int i = 0; i < nx; ++i) {
            c(i, -1, k) = sign * c(i, 0, k);
            c(i, ny, k) = sign * c(i, ny - 1, k);
        }
    }
    return out;
}

GhostedVelocity extrapolated_ghosts(const StaggeredVelocity& u) {
    auto extend = [](const Array3& f) {
        Padded3 p(f);
        const int ni = f.ni(), nj = f.nj(), nk = f.nk();
        for (int j = 0; j < nj; ++j)
            for (int k = 0; k < nk; ++k) {
                p(-1, j, k) = 2.0 * p(0, j, k) - p(1, j, k);
                p(ni, j, k) = 2.0 * p(ni - 1, j, k) - p(ni - 2, j, k);
            }
        for (int i = -1; i <= ni; ++i)
            for (int k = 0; k < nk; ++k) {
                p(i, -1, k) = 2.0 * p(i, 0, k) - p(i, 1, k);
                p(i, nj, k) = 2.0 * p(i, nj - 1, k) - p(i, nj - 2, k);
            }
        for (int i = -1; i <= ni; ++i)
            for (int j = -1; j <= nj; ++j) {
                p(i, j, -1) = 2.0 * p(i, j, 0) - p(i, j, 1);
                p(i, j, nk) = 2.0 * p(i, j, nk - 1) - p(i, j, nk - 2);
            }
        return p;
    };
    return {extend(u.u1), extend(u.u2), extend(u.u3)};
}

Padded3 scalar_ghosts(const ScalarField& c, GroundBc ground) {
    const int nx = c.ni(), ny = c.nj(), nz = c.nk();
    Padded3 p(c);
    const double gsign = ground == GroundBc::neumann ? 1.0 : -1.0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            p(i, j, nz) = -p(i, j, nz - 1);
            p(i, j, -1) = gsign * p(i, j, 0);
        }
    for (int j = 0; j < ny; ++j)
        for (int k = -1; k <= nz; ++k) {
            p(-1, j, k) = -p(0, j, k);
            p(nx, j, k) = -p(nx - 1, j, k);
        }
    for (int i = -1; i <= nx; ++i)
        for (int k = -1; k <= nz; ++k) {
            p(i, -1, k) = -p(i, 0, k);
            p(i, ny, k) = -p(i, ny - 1, k);
        }
    return p;
}

Array3 laplacian_padded(const Padded3& f, const Vec3& nu, const Vec3& h) {
    const double cx = nu[0] / (h[0] * h[0]);
    const double cy = nu[1] / (h[1] * h[1]);
    const double cz = nu[2] / (h[2] * h[2]);
    Array3 out(f.ni(), f.nj(), f.nk());
    for (int i = 0; i < f.ni(); ++i)
        for (int j = 0; j < f.nj(); ++j)
            for (int k = 0; k < f.nk(); ++k) {
                const double c2 = 2.0 * f(i, j, k);
                out(i, j, k) = cx * (f(i + 1, j, k) - c2 + f(i - 1, j, k)) +
                               cy * (f(i, j + 1, k) - c2 + f(i, j - 1, k)) +
                               cz * (f(i, j, k + 1) - c2 + f(i, j, k - 1));
            }
    return out;
}

ScalarField anisotropic_laplacian(const ScalarField& f, const Vec3& nu, const Grid& g,
                                  GroundBc ground) {
    check_cells(f, g);
    return laplacian_padded(scalar_ghosts(f, ground), nu, {g.dx(), g.dy(), g.dz()});
}

StaggeredVelocity velocity_laplacian(const GhostedVelocity& u, const Vec3& nu, const Grid& g,
                                     SolverMode mode) {
    const Vec3 h{g.dx(), g.dy(), g.dz()};
    StaggeredVelocity out{laplacian_padded(u.u1, nu, h), laplacian_padded(u.u2, nu, h),
                          mode == SolverMode::anisotropic
                              ? laplacian_padded(u.u3, nu, h)
                              : Array3(g.nx(), g.ny(), g.nz() + 1)};
    zero_normal_faces(out, SolverMode::anisotropic);
    return out;
}

Padded3 apply_concentration_bcs(const ScalarField& c, const DiffusionTensor& m, const Grid& g) {
    check_cells(c, g);
    m.check_grid(g);
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    Padded3 p(c);
    auto at_x = [&](int i, int j) { return (i < 0 || i >= nx) ? -c(i < 0 ? 0 : nx - 1, j, 0) : c(i, j, 0); };
    auto at_y = [&](int i, int j) { return (j < 0 || j >= ny) ? -c(i, j < 0 ? 0 : ny - 1, 0) : c(i, j, 0); };
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            p(i, j, nz) = -p(i, j, nz - 1);
            const Mat3& mc = m.at(i, j, 0);
            const double d1 = (at_x(i + 1, j) - at_x(i - 1, j)) / (2.0 * g.dx());
            const double d2 = (at_y(i, j + 1) - at_y(i, j - 1)) / (2.0 * g.dy());
            p(i, j, -1) = c(i, j, 0) + g.dz() * (mc[2][0] * d1 + mc[2][1] * d2) / mc[2][2];
        }
    for (int j = 0; j < ny; ++j)
        for (int k = -1; k <= nz; ++k) {
            p(-1, j, k) = -p(0, j, k);
            p(nx, j, k) = -p(nx - 1, j, k);
        }
    for (int i = -1; i <= nx; ++i)
        for (int k = -1; k <= nz; ++k) {
            p(i, -1, k) = -p(i, 0, k);
            p(i, ny, k) = -p(i, ny - 1, k);
        }
    return p;
}

DiffusionFluxes diffusion_fluxes(const Padded3& c, const DiffusionTensor& m, const Grid& g) {
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    DiffusionFluxes out{Array3(nx + 1, ny, nz), Array3(nx, ny + 1, nz), Array3(nx, ny, nz + 1)};

    for (int i = 0; i <= nx; ++i) {
        const int a = std::max(i - 1, 0), b = std::min(i, nx - 1);
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const double g1 = (c(i, j, k) - c(i - 1, j, k)) / dx;
                const double g2 = (c(i - 1, j + 1, k) - c(i - 1, j - 1, k) + c(i, j + 1, k) -
                                   c(i, j - 1, k)) / (4.0 * dy);
                const double g3 = (c(i - 1, j, k + 1) - c(i - 1, j, k - 1) + c(i, j, k + 1) -
                                   c(i, j, k - 1)) / (4.0 * dz);
                out.f1(i, j, k) = m.face(0, 0, a, j, k, b, j, k) * g1 +
                                  m.face(0, 1, a, j, k, b, j, k) * g2 +
                                  m.face(0, 2, a, j, k, b, j, k) * g3;
            }
    }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j <= ny; ++j) {
            const int a = std::max(j - 1, 0), b = std::min(j, ny - 1);
            for (int k = 0; k < nz; ++k) {
                const double g2 = (c(i, j, k) - c(i, j - 1, k)) / dy;
                const double g1 = (c(i + 1, j - 1, k) - c(i - 1, j - 1, k) + c(i + 1, j, k) -
                                   c(i - 1, j, k)) / (4.0 * dx);
                const double g3 = (c(i, j - 1, k + 1) - c(i, j - 1, k - 1) + c(i, j, k + 1) -
                                   c(i, j, k - 1)) / (4.0 * dz);
                out.f2(i, j, k) = m.face(1, 0, i, a, k, i, b, k) * g1 +
                                  m.face(1, 1, i, a, k, i, b, k) * g2 +
                                  m.face(1, 2, i, a, k, i, b, k) * g3;
            }
        }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 1; k <= nz; ++k) {
                const int a = k - 1, b = std::min(k, nz - 1);
                const double g3 = (c(i, j, k) - c(i, j, k - 1)) / dz;
                const double g1 = (c(i + 1, j, k - 1) - c(i - 1, j, k - 1) + c(i + 1, j, k) -
                                   c(i - 1, j, k)) / (4.0 * dx);
                const double g2 = (c(i, j + 1, k - 1) - c(i, j - 1, k - 1) + c(i, j + 1, k) -
                                   c(i, j - 1, k)) / (4.0 * dy);
                out.f3(i, j, k) = m.face(2, 0, i, j, a, i, j, b) * g1 +
                                  m.face(2, 1, i, j, a, i, j, b) * g2 +
                                  m.face(2, 2, i, j, a, i, j, b) * g3;
            }
    // Ground faces (k = 0) keep F3 = 0: no flux through Gamma_G.
    return out;
}

ScalarField flux_divergence(const DiffusionFluxes& f, const Grid& g) {
    ScalarField out(g.nx(), g.ny(), g.nz());
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j)
            for (int k = 0; k < g.nz(); ++k)
                out(i, j, k) = (f.f1(i + 1, j, k) - f.f1(i, j, k)) / g.dx() +
                               (f.f2(i, j + 1, k) - f.f2(i, j, k)) / g.dy() +
                               (f.f3(i, j, k + 1) - f.f3(i, j, k)) / g.dz();
    return out;
}

ScalarField diffuse_concentration(const ScalarField& c, const DiffusionTensor& m, const Grid& g) {
    coercivity_constant(m);
    return flux_divergence(diffusion_fluxes(apply_concentration_bcs(c, m, g), m, g), g);
}

ScalarField advect_scalar(const StaggeredVelocity& u, const ScalarField& c,
                          AdvectionScheme scheme, const Grid& g) {
    check_velocity(u, g);
    check_cells(c, g);
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    const double rdx = 1.0 / g.dx(), rdy = 1.0 / g.dy(), rdz = 1.0 / g.dz();
    ScalarField out(nx, ny, nz);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const double cp = c(i, j, k);
                const double ce = c(std::min(i + 1, nx - 1), j, k), cw = c(std::max(i - 1, 0), j, k);
                const double cn = c(i, std::min(j + 1, ny - 1), k), cs = c(i, std::max(j - 1, 0), k);
                const double ct = c(i, j, std::min(k + 1, nz - 1)), cb = c(i, j, std::max(k - 1, 0));
                out(i, j, k) = (face_term(u.u1(i + 1, j, k), cp, ce, scheme) +
                                face_term(-u.u1(i, j, k), cp, cw, scheme)) * rdx +
                               (face_term(u.u2(i, j + 1, k), cp, cn, scheme) +
                                face_term(-u.u2(i, j, k), cp, cs, scheme)) * rdy +
                               (face_term(u.u3(i, j, k + 1), cp, ct, scheme) +
                                face_term(-u.u3(i, j, k), cp, cb, scheme)) * rdz;
            }
    return out;
}

StaggeredVelocity advect_velocity(const GhostedVelocity& v, AdvectionScheme scheme, const Grid& g) {
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    const double rdx = 1.0 / g.dx(), rdy = 1.0 / g.dy(), rdz = 1.0 / g.dz();
    const Padded3& a = v.u1;
    const Padded3& b = v.u2;
    const Padded3& c = v.u3;
    StaggeredVelocity out(nx, ny, nz);

    // u1 control volume spans cells i-1 and i.
    for (int i = 1; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const double p = a(i, j, k);
                const double fe = 0.5 * (a(i, j, k) + a(i + 1, j, k));
                const double fw = 0.5 * (a(i - 1, j, k) + a(i, j, k));
                const double fn = 0.5 * (b(i - 1, j + 1, k) + b(i, j + 1, k));
                const double fs = 0.5 * (b(i - 1, j, k) + b(i, j, k));
                const double ft = 0.5 * (c(i - 1, j, k + 1) + c(i, j, k + 1));
                const double fb = 0.5 * (c(i - 1, j, k) + c(i, j, k));
                out.u1(i, j, k) =
                    (face_term(fe, p, a(i + 1, j, k), scheme) + face_term(-fw, p, a(i - 1, j, k), scheme)) * rdx +
                    (face_term(fn, p, a(i, j + 1, k), scheme) + face_term(-fs, p, a(i, j - 1, k), scheme)) * rdy +
                    (face_term(ft, p, a(i, j, k + 1), scheme) + face_term(-fb, p, a(i, j, k - 1), scheme)) * rdz;
            }
    // u2 control volume spans cells j-1 and j.
    for (int i = 0; i < nx; ++i)
        for (int j = 1; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const double p = b(i, j, k);
                const double fe = 0.5 * (a(i + 1, j - 1, k) + a(i + 1, j, k));
                const double fw = 0.5 * (a(i, j - 1, k) + a(i, j, k));
                const double fn = 0.5 * (b(i, j, k) + b(i, j + 1, k));
                const double fs = 0.5 * (b(i, j - 1, k) + b(i, j, k));
                const double ft = 0.5 * (c(i, j - 1, k + 1) + c(i, j, k + 1));
                const double fb = 0.5 * (c(i, j - 1, k) + c(i, j, k));
                out.u2(i, j, k) =
                    (face_term(fe, p, b(i + 1, j, k), scheme) + face_term(-fw, p, b(i - 1, j, k), scheme)) * rdx +
                    (face_term(fn, p, b(i, j + 1, k), scheme) + face_term(-fs, p, b(i, j - 1, k), scheme)) * rdy +
                    (face_term(ft, p, b(i, j, k + 1), scheme) + face_term(-fb, p, b(i, j, k - 1), scheme)) * rdz;
            }
    // u3 control volume spans cells k-1 and k.
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 1; k < nz; ++k) {
                const double p = c(i, j, k);
                const double fe = 0.5 * (a(i + 1, j, k - 1) + a(i + 1, j, k));
                const double fw = 0.5 * (a(i, j, k - 1) + a(i, j, k));
                const double fn = 0.5 * (b(i, j + 1, k - 1) + b(i, j + 1, k));
                const double fs = 0.5 * (b(i, j, k - 1) + b(i, j, k));
                const double ft = 0.5 * (c(i, j, k) + c(i, j, k + 1));
                const double fb = 0.5 * (c(i, j, k - 1) + c(i, j, k));
                out.u3(i, j, k) =
                    (face_term(fe, p, c(i + 1, j, k), scheme) + face_term(-fw, p, c(i - 1, j, k), scheme)) * rdx +
                    (face_term(fn, p, c(i, j + 1, k), scheme) + face_term(-fs, p, c(i, j - 1, k), scheme)) * rdy +
                    (face_term(ft, p, c(i, j, k + 1), scheme) + face_term(-fb, p, c(i, j, k - 1), scheme)) * rdz;
            }
    return out;
}

StaggeredVelocity coriolis_tendency(const StaggeredVelocity& u, const PhysParams& prm,
                                    const Grid& g, SolverMode mode) {
    check_velocity(u, g);
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    StaggeredVelocity out(nx, ny, nz);

    // alpha couples u1 faces (i, j) with u2 faces (i', j'), i' in {i-1, i},
    // j' in {j, j+1}; the coefficient is evaluated midway between the two.
    for (int i = 1; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int jj = j; jj <= j + 1; ++jj) {
                if (jj == 0 || jj == ny) continue;
                const double alpha = coriolis_at(prm, 0.5 * (g.yc(j) + g.yf(jj))).alpha;
                for (int ii = i - 1; ii <= i; ++ii)
                    for (int k = 0; k < nz; ++k) {
                        out.u1(i, j, k) += 0.25 * alpha * u.u2(ii, jj, k);
                        out.u2(ii, jj, k) -= 0.25 * alpha * u.u1(i, j, k);
                    }
            }
    if (mode == SolverMode::anisotropic) {
        const double eps = prm.eps;
        for (int j = 0; j < ny; ++j) {
            const double beta = coriolis_at(prm, g.yc(j)).beta;
            for (int i = 1; i < nx; ++i)
                for (int ii = i - 1; ii <= i; ++ii)
                    for (int k = 0; k < nz; ++k)
                        for (int kk = k; kk <= k + 1; ++kk) {
                            if (kk == 0 || kk == nz) continue;
                            out.u1(i, j, k) -= 0.25 * eps * beta * u.u3(ii, j, kk);
                            out.u3(ii, j, kk) += 0.25 * beta / eps * u.u1(i, j, k);
                        }
        }
    }
    return out;
}

}  // namespace atmo
