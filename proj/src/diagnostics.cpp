#include "atmo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace atmo {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    return s;
}

double face_mean(const Array2& f, int i, int j, int axis) {
    if (axis == 0) {
        if (i <= 0) return f(0, j);
        if (i >= f.ni()) return f(f.ni() - 1, j);
        return 0.5 * (f(i - 1, j) + f(i, j));
    }
    if (j <= 0) return f(i, 0);
    if (j >= f.nj()) return f(i, f.nj() - 1);
    return 0.5 * (f(i, j - 1) + f(i, j));
}

/// -<u3, Delta u3> over the interior x3-faces.
double u3_gradient_sq(const GhostedVelocity& gu, const Vec3& nu, const Grid& g) {
    const Array3 lap = laplacian_padded(gu.u3, nu, {g.dx(), g.dy(), g.dz()});
    double s = 0.0;
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j)
            for (int k = 1; k < g.nz(); ++k) s -= gu.u3(i, j, k) * lap(i, j, k);
    return s * g.cell_volume();
}

}  // namespace

double energy(const SimState& s, double eps, const Grid& g, SolverMode mode) {
    const double v = g.cell_volume();
    double e = sum_sq(s.u.u1.values(), v) + sum_sq(s.u.u2.values(), v) + sum_sq(s.C.values(), v);
    if (mode == SolverMode::anisotropic) e += eps * eps * sum_sq(s.u.u3.values(), v);
    return 0.5 * e;
}

double velocity_dissipation(const StaggeredVelocity& u, const PhysParams& prm, const Grid& g,
                            SolverMode mode) {
    const GhostedVelocity gu = apply_velocity_bcs(u, BoundaryForcing{}, prm.nu3, g, mode);
    const StaggeredVelocity lap = velocity_laplacian(gu, prm.nu(), g, mode);
    double d = -dot(u.u1.values(), lap.u1.values()) - dot(u.u2.values(), lap.u2.values());
    if (mode == SolverMode::anisotropic)
        d -= prm.eps * prm.eps * dot(u.u3.values(), lap.u3.values());
    return d * g.cell_volume();
}

double concentration_dissipation(const ScalarField& c, const DiffusionTensor& m, const Grid& g) {
    const ScalarField div = flux_divergence(diffusion_fluxes(apply_concentration_bcs(c, m, g), m, g), g);
    return -dot(c.values(), div.values()) * g.cell_volume();
}

CoercivityAudit coercivity_audit(const ScalarField& c, const DiffusionTensor& m, const Grid& g) {
    CoercivityAudit out;
    out.lambda = coercivity_constant(m);
    const Padded3 cg = apply_concentration_bcs(c, m, g);
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    const double v = g.cell_volume();

    auto accumulate = [&](const Vec3& gv, int ai, int aj, int ak, int bi, int bj, int bk, double w) {
        double form = 0.0, sq = 0.0;
        for (int r = 0; r < 3; ++r) {
            sq += gv[r] * gv[r];
            for (int col = 0; col < 3; ++col)
                form += m.face(r, col, ai, aj, ak, bi, bj, bk) * gv[r] * gv[col];
        }
        out.form += form * w;
        out.grad_sq += sq * w;
    };
    for (int i = 0; i <= nx; ++i) {
        const int a = std::max(i - 1, 0), b = std::min(i, nx - 1);
        const double w = (i == 0 || i == nx) ? 0.5 * v : v;
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const Vec3 gv{(cg(i, j, k) - cg(i - 1, j, k)) / dx,
                              (cg(i - 1, j + 1, k) - cg(i - 1, j - 1, k) + cg(i, j + 1, k) -
                               cg(i, j - 1, k)) / (4.0 * dy),
                              (cg(i - 1, j, k + 1) - cg(i - 1, j, k - 1) + cg(i, j, k + 1) -
                               cg(i, j, k - 1)) / (4.0 * dz)};
                accumulate(gv, a, j, k, b, j, k, w);
            }
    }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j <= ny; ++j) {
            const int a = std::max(j - 1, 0), b = std::min(j, ny - 1);
            const double w = (j == 0 || j == ny) ? 0.5 * v : v;
            for (int k = 0; k < nz; ++k) {
                const Vec3 gv{(cg(i + 1, j - 1, k) - cg(i - 1, j - 1, k) + cg(i + 1, j, k) -
                               cg(i - 1, j, k)) / (4.0 * dx),
                              (cg(i, j, k) - cg(i, j - 1, k)) / dy,
                              (cg(i, j - 1, k + 1) - cg(i, j - 1, k - 1) + cg(i, j, k + 1) -
                               cg(i, j, k - 1)) / (4.0 * dz)};
                accumulate(gv, i, a, k, i, b, k, w);
            }
        }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k <= nz; ++k) {
                const int a = std::max(k - 1, 0), b = std::min(k, nz - 1);
                const double w = (k == 0 || k == nz) ? 0.5 * v : v;
                const Vec3 gv{(cg(i + 1, j, k - 1) - cg(i - 1, j, k - 1) + cg(i + 1, j, k) -
                               cg(i - 1, j, k)) / (4.0 * dx),
                              (cg(i, j + 1, k - 1) - cg(i, j - 1, k - 1) + cg(i, j + 1, k) -
                               cg(i, j - 1, k)) / (4.0 * dy),
                              (cg(i, j, k) - cg(i, j, k - 1)) / dz};
                accumulate(gv, i, j, a, i, j, b, w);
            }
    out.form /= 3.0;
    out.grad_sq /= 3.0;
    return out;
}

double boundary_work_rate(const StaggeredVelocity& u, const BoundaryForcing& theta, const Grid& g) {
    if (theta.theta1.size() == 0) return 0.0;
    double s = 0.0;
    for (int i = 0; i <= g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) s += face_mean(theta.theta1, i, j, 0) * u.u1(i, j, 0);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j <= g.ny(); ++j) s += face_mean(theta.theta2, i, j, 1) * u.u2(i, j, 0);
    return std::abs(s * g.dx() * g.dy());
}

double EnergyReport::min_slack() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : records) m = std::min(m, r.slack);
    return records.empty() ? 0.0 : m;
}

EnergyLedger::EnergyLedger(const PhysParams& params, const DiffusionTensor& m,
                           const BoundaryForcing& theta, const PollutionSource* source,
                           const Grid& grid, SolverMode mode)
    : params_(params), m_(&m), theta_(&theta), source_(source), grid_(&grid), mode_(mode) {
    report_.lambda = coercivity_constant(m);
}

void EnergyLedger::add(const SimState& s) {
    const Grid& g = *grid_;
    EnergyRecord rec;
    rec.t = s.t;
    rec.E = energy(s, params_.eps, g, mode_);
    const double d = velocity_dissipation(s.u, params_, g, mode_) +
                     concentration_dissipation(s.C, *m_, g);
    const double w = boundary_work_rate(s.u, *theta_, g);
    double q = 0.0;
    if (source_ && source_->active(s.t)) {
        ScalarField sv(g.nx(), g.ny(), g.nz());
        source_->accumulate(s.t, 1.0, sv);
        q = dot(sv.values(), s.C.values()) * g.cell_volume();
    }
    const CoercivityAudit audit = coercivity_audit(s.C, *m_, g);
    rec.conc_form = audit.form;
    rec.conc_bound = audit.lambda * audit.grad_sq;

    auto& recs = report_.records;
    if (!recs.empty()) {
        const EnergyRecord& prev = recs.back();
        const double dt = s.t - prev.t;
        rec.D = prev.D + 0.5 * dt * (prev_d_ + d);
        rec.W = prev.W + 0.5 * dt * (prev_w_ + w);
        rec.Q = prev.Q + 0.5 * dt * (prev_q_ + q);
        report_.tol_scheme = std::max(report_.tol_scheme, dt * rec.D);
        rec.slack = recs.front().E + rec.W + rec.Q - rec.E - rec.D;
    }
    prev_d_ = d;
    prev_w_ = w;
    prev_q_ = q;
    recs.push_back(rec);
}

EnergyReport energy_balance(std::span<const SimState> history, const PhysParams& params,
                            const DiffusionTensor& m, const BoundaryForcing& theta,
                            const PollutionSource* source, const Grid& grid, SolverMode mode) {
    if (history.empty()) throw std::invalid_argument("energy_balance: empty history");
    EnergyLedger ledger(params, m, theta, source, grid, mode);
    for (const SimState& s : history) ledger.add(s);
    return ledger.report();
}

void AprioriAccumulator::add(const SimState& s) {
    const Grid& g = *grid_;
    const double v = g.cell_volume();
    const Vec3 unit{1.0, 1.0, 1.0};
    const GhostedVelocity gu = apply_velocity_bcs(s.u, BoundaryForcing{}, 1.0, g, mode_);
    const StaggeredVelocity lap = velocity_laplacian(gu, unit, g, SolverMode::anisotropic);
    const ScalarField lap_c = anisotropic_laplacian(s.C, unit, g);

    const double l2_u1 = sum_sq(s.u.u1.values(), v), l2_u2 = sum_sq(s.u.u2.values(), v);
    const double l2_u3 = sum_sq(s.u.u3.values(), v), l2_c = sum_sq(s.C.values(), v);
    const double e2 = eps_ * eps_;
    const std::array<double, 6> now{
        l2_u1 - dot(s.u.u1.values(), lap.u1.values()) * v,
        l2_u2 - dot(s.u.u2.values(), lap.u2.values()) * v,
        e2 * (l2_u3 + u3_gradient_sq(gu, unit, g)),
        l2_c - dot(s.C.values(), lap_c.values()) * v,
        l2_u3,
        l2_c};
    const std::array<double, 4> sup_now{l2_u1, l2_u2, e2 * l2_u3, l2_c};
    for (int n = 0; n < 4; ++n) sup_[n] = std::max(sup_[n], std::sqrt(sup_now[n]));
    if (count_ > 0) {
        const double dt = s.t - t_prev_;
        for (std::size_t n = 0; n < now.size(); ++n) integral_[n] += 0.5 * dt * (prev_[n] + now[n]);
    }
    prev_ = now;
    t_prev_ = s.t;
    ++count_;
}

AprioriNorms AprioriAccumulator::result() const {
    if (count_ == 0) throw std::invalid_argument("apriori_norms: empty history");
    AprioriNorms out;
    out.sup_u1 = sup_[0];
    out.sup_u2 = sup_[1];
    out.sup_eps_u3 = sup_[2];
    out.sup_C = sup_[3];
    out.h1_u1 = std::sqrt(integral_[0]);
    out.h1_u2 = std::sqrt(integral_[1]);
    out.h1_eps_u3 = std::sqrt(integral_[2]);
    out.h1_C = std::sqrt(integral_[3]);
    out.l2_u3 = std::sqrt(integral_[4]);
    out.l2_C = std::sqrt(integral_[5]);
    return out;
}

AprioriNorms apriori_norms(std::span<const SimState> history, double eps, const Grid& grid,
                           SolverMode mode) {
    AprioriAccumulator acc(eps, grid, mode);
    for (const SimState& s : history) acc.add(s);
    return acc.result();
}

ScalarField helmholtz_smooth(const ScalarField& c, const Grid& g) {
    ScalarField out(g.nx(), g.ny(), g.nz());
    const double scale = max_abs(c.values());
    if (scale == 0.0) return out;
    StencilOperator::Sides sides;
    sides.x_lo = sides.x_hi = sides.y_lo = sides.y_hi = sides.z_hi = SideCondition::dirichlet;
    const StencilOperator K(g.nx(), g.ny(), g.nz(), 1.0 / (g.dx() * g.dx()),
                            1.0 / (g.dy() * g.dy()), 1.0 / (g.dz() * g.dz()), 1.0, sides);
    // Round-off floor of the residual: entries of K times |C|.
    const double diag = 1.0 + 4.0 / (g.dx() * g.dx()) + 4.0 / (g.dy() * g.dy()) +
                        4.0 / (g.dz() * g.dz());
    const double tol = 1e-14 * diag * scale;
    const SolveStats st = pcg([&](auto x, auto y) { K.apply(x, y); },
                              [&](auto r, auto z) { K.precondition(r, z); }, c.values(),
                              out.values(), tol, 20000, false);
    if (!st.converged) throw NumericalError("Helmholtz smoothing did not converge", -1);
    return out;
}

TranslationReport translation_modulus(std::span<const ScalarField> hist, double spacing,
                                      std::span<const double> h_list, const Grid& g) {
    if (h_list.size() < 3) throw std::invalid_argument("translation_modulus: need at least 3 shifts");
    if (hist.size() < 2 || !(spacing > 0.0))
        throw std::invalid_argument("translation_modulus: history too short");
    const double T = spacing * static_cast<double>(hist.size() - 1);
    std::vector<int> shifts;
    for (double h : h_list) {
        const double m = h / spacing;
        const double mr = std::round(m);
        if (!(h > 0.0) || std::abs(m - mr) > 1e-9 * std::max(1.0, m))
            throw std::invalid_argument("translation_modulus: h must be a positive multiple of the snapshot spacing");
        if (!(h < 0.5 * T)) throw std::invalid_argument("translation_modulus: h must be below T/2");
        shifts.push_back(static_cast<int>(mr));
    }
    std::vector<ScalarField> smooth;
    smooth.reserve(hist.size());
    for (const ScalarField& c : hist) smooth.push_back(helmholtz_smooth(c, g));

    TranslationReport rep;
    const double v = g.cell_volume();
    for (std::size_t n = 0; n < shifts.size(); ++n) {
        const int m = shifts[n];
        const int count = static_cast<int>(hist.size()) - m;
        double integral = 0.0;
        for (int s = 0; s < count; ++s) {
            auto a = smooth[s + m].values();
            auto b = smooth[s].values();
            double d2 = 0.0;
            for (std::size_t c = 0; c < a.size(); ++c) d2 += (a[c] - b[c]) * (a[c] - b[c]);
            const double w = (s == 0 || s == count - 1) ? 0.5 : 1.0;
            integral += w * d2 * v * spacing;
        }
        rep.h.push_back(h_list[n]);
        rep.modulus.push_back(std::sqrt(integral));
    }
    rep.exponent = loglog_slope(rep.h, rep.modulus);
    return rep;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) return nan;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return nan;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return nan;
    return (n * sxy - sx * sy) / den;
}

SpaceTimeErrors space_time_errors(std::span<const SimState> a, std::span<const SimState> b,
                                  const Grid& g) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("convergence: mismatched snapshot schedules");
    const double T = std::max(1.0, std::abs(a.back().t));
    for (std::size_t n = 0; n < a.size(); ++n)
        if (std::abs(a[n].t - b[n].t) > 1e-9 * T)
            throw std::invalid_argument("convergence: mismatched snapshot schedules");
    auto diff_sq = [](const Array3& x, const Array3& y) {
        require_same_shape(x, y, "convergence histories");
        double s = 0.0;
        auto xv = x.values();
        auto yv = y.values();
        for (std::size_t c = 0; c < xv.size(); ++c) s += (xv[c] - yv[c]) * (xv[c] - yv[c]);
        return s;
    };
    const double v = g.cell_volume();
    std::array<double, 3> integral{}, prev{};
    for (std::size_t n = 0; n < a.size(); ++n) {
        const std::array<double, 3> now{
            (diff_sq(a[n].u.u1, b[n].u.u1) + diff_sq(a[n].u.u2, b[n].u.u2)) * v,
            diff_sq(a[n].u.u3, b[n].u.u3) * v, diff_sq(a[n].C, b[n].C) * v};
        if (n > 0) {
            const double dt = a[n].t - a[n - 1].t;
            for (int c = 0; c < 3; ++c) integral[c] += 0.5 * dt * (prev[c] + now[c]);
        }
        prev = now;
    }
    return {std::sqrt(integral[0]), std::sqrt(integral[1]), std::sqrt(integral[2])};
}

void finalize_report(ConvergenceReport& rep) {
    std::stable_sort(rep.rows.begin(), rep.rows.end(),
                     [](const ConvergenceRow& x, const ConvergenceRow& y) { return x.eps > y.eps; });
    std::vector<double> eps, uh, u3, c;
    for (const auto& r : rep.rows) {
        eps.push_back(r.eps);
        uh.push_back(r.err_uH);
        u3.push_back(r.err_u3);
        c.push_back(r.err_C);
    }
    rep.rate_uH = loglog_slope(eps, uh);
    rep.rate_u3 = loglog_slope(eps, u3);
    rep.rate_C = loglog_slope(eps, c);
}

ConvergenceReport convergence_metrics(std::span<const AnisoRun> runs,
                                      std::span<const SimState> hydro, const Grid& g) {
    ConvergenceReport rep;
    for (const AnisoRun& run : runs) {
        const SpaceTimeErrors e = space_time_errors(run.history, hydro, g);
        ConvergenceRow row;
        row.eps = run.eps;
        row.err_uH = e.err_uH;
        row.err_u3 = e.err_u3;
        row.err_C = e.err_C;
        rep.rows.push_back(row);
    }
    finalize_report(rep);
    return rep;
}

}  // namespace atmo
