#include "atmo/aniso_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "step_common.hpp"

namespace atmo {

SimState zero_state(const Grid& g, SolverMode mode) {
    SimState s;
    s.u = StaggeredVelocity(g.nx(), g.ny(), g.nz());
    s.C = ScalarField(g.nx(), g.ny(), g.nz());
    if (mode == SolverMode::anisotropic)
        s.p = ScalarField(g.nx(), g.ny(), g.nz());
    else
        s.ps = Array2(g.nx(), g.ny());
    return s;
}

double stable_dt(const SimState& s, const PhysParams& prm, const DiffusionTensor& m,
                 const Grid& g, double cfl, double dt_max) {
    if (s.u.u1.size() == 0 || g.cell_count() == 0)
        throw std::invalid_argument("stable_dt: empty state");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("stable_dt: cfl must be in (0,1]");
    const double inf = std::numeric_limits<double>::infinity();
    const std::array<double, 3> h{g.dx(), g.dy(), g.dz()};

    const double rate_adv = max_abs(s.u.u1.values()) / h[0] + max_abs(s.u.u2.values()) / h[1] +
                            max_abs(s.u.u3.values()) / h[2];
    const double rate_visc =
        2.0 * (prm.nu1 / (h[0] * h[0]) + prm.nu2 / (h[1] * h[1]) + prm.nu3 / (h[2] * h[2]));
    double rate_conc = 0.0;
    for (const Mat3& mc : m.matrices()) {
        double r = 0.0;
        for (int d = 0; d < 3; ++d)
            for (int e = 0; e < 3; ++e)
                r += d == e ? 2.0 * mc[d][d] / (h[d] * h[d])
                            : 2.0 * std::abs(mc[d][e]) / (h[d] * h[e]);
        rate_conc = std::max(rate_conc, r);
    }
    const CoriolisPair cb = coriolis_bounds(prm, g.ly());
    const double rate_cor = cb.alpha + prm.eps * cb.beta;

    double dt = inf;
    for (double r : {rate_adv, rate_visc, rate_conc, rate_cor})
        if (r > 0.0) dt = std::min(dt, 1.0 / r);
    return std::min(cfl * dt, dt_max);
}

ProjectionResult pressure_projection_anisotropic(const StaggeredVelocity& u_star, double eps,
                                                 double dt, const Grid& g, double tol,
                                                 int max_iter, const ScalarField* p_guess) {
    if (!(eps > 0.0)) throw std::invalid_argument("projection: eps must be positive");
    if (!(dt > 0.0) || !(tol > 0.0)) throw std::invalid_argument("projection: dt, tol must be > 0");
    const ScalarField div = divergence(u_star, g);
    const auto d = div.values();
    const double n = static_cast<double>(d.size());
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    const double rms = std::sqrt(sum_sq(d, 1.0) / n);
    double umax = 0.0;
    for (int c = 0; c < 3; ++c) umax = std::max(umax, max_abs(u_star.component(c).values()));
    const double hmin = std::min({g.dx(), g.dy(), g.dz()});
    if (std::abs(mean) > 1e-10 * rms + 1e-13 * umax / hmin)
        throw std::invalid_argument("projection: incompatible right-hand side (net boundary flux)");

    std::vector<double> b(d.size());
    for (std::size_t c = 0; c < b.size(); ++c) b[c] = -d[c];
    ScalarField q(g.nx(), g.ny(), g.nz());
    if (p_guess && p_guess->same_shape(q)) {
        auto qv = q.values();
        auto pv = p_guess->values();
        for (std::size_t c = 0; c < qv.size(); ++c) qv[c] = dt * pv[c];
    }
    // The operator depends on the grid and eps only; reuse it across steps.
    struct Cached {
        std::array<double, 6> key{};
        std::optional<StencilOperator> op;
    };
    thread_local Cached cache;
    const std::array<double, 6> key{double(g.nx()), double(g.ny()), double(g.nz()),
                                    g.dx(), g.dy(), eps * g.dz()};
    if (!cache.op || cache.key != key) {
        cache.op.emplace(g.nx(), g.ny(), g.nz(), 1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()),
                         1.0 / (eps * eps * g.dz() * g.dz()), 0.0, StencilOperator::Sides{});
        cache.key = key;
    }
    const StencilOperator& K = *cache.op;
    ProjectionResult out;
    out.stats = pcg([&](auto x, auto y) { K.apply(x, y); },
                    [&](auto r, auto z) { K.precondition(r, z); }, b, q.values(), tol, max_iter,
                    true);
    if (!out.stats.converged)
        throw NumericalError("pressure projection did not converge: residual " +
                                 detail::sci(out.stats.residual) + " after " +
                                 std::to_string(out.stats.iterations) + " iterations",
                             -1);

    const StaggeredVelocity gq = grad_pressure(q, g);
    out.u = u_star;
    const double a3 = 1.0 / (eps * eps);
    for (int c = 0; c < 3; ++c) {
        auto uv = out.u.component(c).values();
        auto gv = gq.component(c).values();
        const double a = c == 2 ? a3 : 1.0;
        for (std::size_t f = 0; f < uv.size(); ++f) uv[f] -= a * gv[f];
    }
    out.p = std::move(q);
    for (double& v : out.p.values()) v /= dt;
    return out;
}

StaggeredVelocity coriolis_update(const StaggeredVelocity& u, const PhysParams& prm, double dt,
                                  const Grid& g, SolverMode mode) {
    const StaggeredVelocity wu = coriolis_tendency(u, prm, g, mode);
    double scale = 0.0;
    for (int c = 0; c < 3; ++c) scale = std::max(scale, max_abs(u.component(c).values()));
    if (scale == 0.0) return u;

    // v = u + dt/2 W (u + v); W is linear so W(u + v) = Wu + Wv.
    StaggeredVelocity v = u;
    for (int it = 0; it < 500; ++it) {
        const StaggeredVelocity wv = coriolis_tendency(v, prm, g, mode);
        double change = 0.0;
        for (int c = 0; c < 3; ++c) {
            auto vv = v.component(c).values();
            auto uv = u.component(c).values();
            auto a = wu.component(c).values();
            auto b = wv.component(c).values();
            for (std::size_t f = 0; f < vv.size(); ++f) {
                const double next = uv[f] + 0.5 * dt * (a[f] + b[f]);
                change = std::max(change, std::abs(next - vv[f]));
                vv[f] = next;
            }
        }
        if (change <= 1e-15 * scale) return v;
    }
    throw NumericalError("Coriolis update did not converge (time step too large)", -1);
}

SimState step_anisotropic(const SimState& s, const StepInputs& in, double dt, const Grid& g) {
    detail::check_step(s, in, dt, g);
    const detail::ForcingRates f = detail::forcing_rates(in, s.t, g);
    StaggeredVelocity u = detail::momentum_predictor(s, in, dt, g, SolverMode::anisotropic, f);
    u = coriolis_update(u, in.params, dt, g, SolverMode::anisotropic);

    SimState next;
    try {
        ProjectionResult pr = pressure_projection_anisotropic(u, in.params.eps, dt, g, in.tol,
                                                              in.max_iter, &s.p);
        next.u = std::move(pr.u);
        next.p = std::move(pr.p);
        next.last_solve = pr.stats;
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at step " + std::to_string(s.step + 1),
                             s.step + 1);
    }
    next.C = detail::concentration_update(s, in, dt, g, f);
    next.t = s.t + dt;
    next.step = s.step + 1;
    detail::check_finite(next);
    return next;
}

StaggeredVelocity project_initial_anisotropic(const StaggeredVelocity& u, double eps,
                                              const Grid& g, double tol, int max_iter) {
    StaggeredVelocity w = u;
    zero_normal_faces(w, SolverMode::anisotropic);
    return pressure_projection_anisotropic(w, eps, 1.0, g, tol, max_iter).u;
}

namespace detail {

ForcingRates forcing_rates(const StepInputs& in, double t, const Grid& g) {
    ForcingRates f{StaggeredVelocity(g.nx(), g.ny(), g.nz()), ScalarField(g.nx(), g.ny(), g.nz())};
    if (in.forcing) in.forcing(t, f.du, f.dc);
    return f;
}

StaggeredVelocity momentum_predictor(const SimState& s, const StepInputs& in, double dt,
                                     const Grid& g, SolverMode mode, const ForcingRates& f) {
    const GhostedVelocity gu = apply_velocity_bcs(s.u, in.theta, in.params.nu3, g, mode);
    const StaggeredVelocity adv = advect_velocity(gu, in.advection, g);
    const StaggeredVelocity lap = velocity_laplacian(gu, in.params.nu(), g, mode);
    StaggeredVelocity u = s.u;
    const int ncomp = mode == SolverMode::anisotropic ? 3 : 2;
    for (int c = 0; c < ncomp; ++c) {
        auto uv = u.component(c).values();
        auto a = adv.component(c).values();
        auto l = lap.component(c).values();
        auto fv = f.du.component(c).values();
        for (std::size_t n = 0; n < uv.size(); ++n) uv[n] += dt * (l[n] - a[n] + fv[n]);
    }
    zero_normal_faces(u, mode);
    return u;
}

ScalarField concentration_update(const SimState& s, const StepInputs& in, double dt,
                                 const Grid& g, const ForcingRates& f) {
    const ScalarField adv = advect_scalar(s.u, s.C, in.advection, g);
    const ScalarField dif =
        flux_divergence(diffusion_fluxes(apply_concentration_bcs(s.C, in.M, g), in.M, g), g);
    ScalarField rate(g.nx(), g.ny(), g.nz());
    if (in.source) in.source->accumulate(s.t, 1.0, rate);
    ScalarField c = s.C;
    auto cv = c.values();
    auto r = rate.values();
    auto a = adv.values();
    auto d = dif.values();
    auto fv = f.dc.values();
    for (std::size_t n = 0; n < cv.size(); ++n) cv[n] += dt * (d[n] - a[n] + r[n] + fv[n]);
    return c;
}

void check_step(const SimState& s, const StepInputs& in, double dt, const Grid& g) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    const double limit = stable_dt(s, in.params, in.M, g, 1.0);
    if (dt > limit * (1.0 + 1e-12))
        throw NumericalError("CFL violation at step " + std::to_string(s.step + 1) + ": dt " +
                                 std::to_string(dt) + " exceeds stable limit " +
                                 std::to_string(limit),
                             s.step + 1);
}

void check_finite(const SimState& s) {
    bool ok = all_finite(s.C.values());
    for (int c = 0; c < 3; ++c) ok = ok && all_finite(s.u.component(c).values());
    if (!ok)
        throw NumericalError("non-finite value at step " + std::to_string(s.step), s.step);
}

}  // namespace detail

}  // namespace atmo
