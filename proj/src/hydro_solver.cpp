#include "atmo/hydro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "atmo/aniso_solver.hpp"
#include "step_common.hpp"

namespace atmo {

Array2 barotropic_divergence(const StaggeredVelocity& u, const Grid& g) {
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    Array2 out(nx, ny);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            double s = 0.0;
            for (int k = 0; k < nz; ++k)
                s += (u.u1(i + 1, j, k) - u.u1(i, j, k)) / g.dx() +
                     (u.u2(i, j + 1, k) - u.u2(i, j, k)) / g.dy();
            out(i, j) = s * g.dz();
        }
    return out;
}

SurfaceProjectionResult surface_pressure_projection(const StaggeredVelocity& u_star, double dt,
                                                    const Grid& g, double tol, int max_iter,
                                                    const Array2* ps_guess) {
    if (!(dt > 0.0) || !(tol > 0.0)) throw std::invalid_argument("projection: dt, tol must be > 0");
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    const double h = g.height();
    const Array2 div = barotropic_divergence(u_star, g);
    const auto d = div.values();
    double mean = 0.0, ss = 0.0, umax = 0.0;
    for (double v : d) {
        mean += v;
        ss += v * v;
    }
    mean /= static_cast<double>(d.size());
    const double rms = std::sqrt(ss / static_cast<double>(d.size()));
    for (int c = 0; c < 2; ++c) umax = std::max(umax, max_abs(u_star.component(c).values()));
    if (std::abs(mean) > 1e-10 * rms + 1e-13 * umax * h / std::min(g.dx(), g.dy()))
        throw std::invalid_argument("projection: incompatible right-hand side (net boundary flux)");

    // h K2 q = -div_H U with K2 = -div_H grad_H; the residual is then
    // -div_H(U_new) / h, so the solve runs at tol / h.
    std::vector<double> b(d.size());
    for (std::size_t c = 0; c < b.size(); ++c) b[c] = -d[c] / h;
    Array2 q(nx, ny);
    if (ps_guess && ps_guess->ni() == nx && ps_guess->nj() == ny) {
        auto qv = q.values();
        auto pv = ps_guess->values();
        for (std::size_t c = 0; c < qv.size(); ++c) qv[c] = dt * pv[c];
    }
    const StencilOperator K(nx, ny, 1, 1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()), 0.0, 0.0,
                            {});
    SurfaceProjectionResult out;
    out.stats = pcg([&](auto x, auto y) { K.apply(x, y); },
                    [&](auto r, auto z) { K.precondition(r, z); }, b, q.values(), tol / h,
                    max_iter, true);
    out.stats.residual *= h;
    if (!out.stats.converged)
        throw NumericalError("surface pressure projection did not converge: residual " +
                                 detail::sci(out.stats.residual) + " after " +
                                 std::to_string(out.stats.iterations) + " iterations",
                             -1);

    out.u = u_star;
    for (int i = 1; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            const double gx = (q(i, j) - q(i - 1, j)) / g.dx();
            for (int k = 0; k < nz; ++k) out.u.u1(i, j, k) -= gx;
        }
    for (int i = 0; i < nx; ++i)
        for (int j = 1; j < ny; ++j) {
            const double gy = (q(i, j) - q(i, j - 1)) / g.dy();
            for (int k = 0; k < nz; ++k) out.u.u2(i, j, k) -= gy;
        }
    out.ps = std::move(q);
    for (double& v : out.ps.values()) v /= dt;
    return out;
}

Array3 diagnose_w(const StaggeredVelocity& u, const Grid& g) {
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    Array3 w(nx, ny, nz + 1);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const double div_h = (u.u1(i + 1, j, k) - u.u1(i, j, k)) / g.dx() +
                                     (u.u2(i, j + 1, k) - u.u2(i, j, k)) / g.dy();
                w(i, j, k + 1) = w(i, j, k) - g.dz() * div_h;
            }
    return w;
}

SimState step_hydrostatic(const SimState& s, const StepInputs& in, double dt, const Grid& g) {
    detail::check_step(s, in, dt, g);
    const detail::ForcingRates f = detail::forcing_rates(in, s.t, g);
    StaggeredVelocity u = detail::momentum_predictor(s, in, dt, g, SolverMode::hydrostatic, f);
    u = coriolis_update(u, in.params, dt, g, SolverMode::hydrostatic);

    SimState next;
    try {
        SurfaceProjectionResult pr =
            surface_pressure_projection(u, dt, g, in.tol, in.max_iter, &s.ps);
        next.u = std::move(pr.u);
        next.ps = std::move(pr.ps);
        next.last_solve = pr.stats;
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at step " + std::to_string(s.step + 1),
                             s.step + 1);
    }
    next.u.u3 = diagnose_w(next.u, g);
    next.C = detail::concentration_update(s, in, dt, g, f);
    next.t = s.t + dt;
    next.step = s.step + 1;
    detail::check_finite(next);
    return next;
}

StaggeredVelocity project_initial_hydrostatic(const StaggeredVelocity& u, const Grid& g,
                                              double tol, int max_iter) {
    StaggeredVelocity w = u;
    zero_normal_faces(w, SolverMode::anisotropic);
    StaggeredVelocity out = surface_pressure_projection(w, 1.0, g, tol, max_iter).u;
    out.u3 = diagnose_w(out, g);
    return out;
}

}  // namespace atmo
