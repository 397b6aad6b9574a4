#include "atmo/weak_form.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace atmo {

namespace profiles {

Profile one() {
    return [](double) { return Jet{1.0, 0.0, 0.0}; };
}

Profile bump(double L) {
    const double w = std::numbers::pi / L;
    return [w](double x) {
        const double s = std::sin(w * x);
        return Jet{s * s, w * std::sin(2.0 * w * x), 2.0 * w * w * std::cos(2.0 * w * x)};
    };
}

Profile bump_slope(double L) {
    const double w = std::numbers::pi / L;
    return [w](double x) {
        return Jet{w * std::sin(2.0 * w * x), 2.0 * w * w * std::cos(2.0 * w * x),
                   -4.0 * w * w * w * std::sin(2.0 * w * x)};
    };
}

Profile sine(double L) {
    const double w = std::numbers::pi / L;
    return [w](double x) {
        const double s = std::sin(w * x);
        return Jet{s, w * std::cos(w * x), -w * w * s};
    };
}

Profile quarter_cosine(double h) {
    const double w = 0.5 * std::numbers::pi / h;
    return [w](double z) {
        const double c = std::cos(w * z);
        return Jet{c, -w * std::sin(w * z), -w * w * c};
    };
}

Profile overturn(double h) {
    return [h](double z) {
        const double s = z / h;
        return Jet{h * (s - 3.0 * s * s * s + 2.0 * s * s * s * s),
                   1.0 - 9.0 * s * s + 8.0 * s * s * s, (-18.0 * s + 24.0 * s * s) / h};
    };
}

Profile overturn_slope(double h) {
    return [h](double z) {
        const double s = z / h;
        return Jet{1.0 - 9.0 * s * s + 8.0 * s * s * s, (-18.0 * s + 24.0 * s * s) / h,
                   (-18.0 + 48.0 * s) / (h * h)};
    };
}

Profile top_square(double h) {
    return [h](double z) { return Jet{(h - z) * (h - z), -2.0 * (h - z), 2.0}; };
}

}  // namespace profiles

SeparableField& SeparableField::add(double coef, Profile x, Profile y, Profile z) {
    terms_.push_back({coef, std::move(x), std::move(y), std::move(z)});
    return *this;
}

double SeparableField::value(const Vec3& p) const {
    double s = 0.0;
    for (const Term& t : terms_) s += t.coef * t.x(p[0])[0] * t.y(p[1])[0] * t.z(p[2])[0];
    return s;
}

Vec3 SeparableField::gradient(const Vec3& p) const {
    Vec3 g{0.0, 0.0, 0.0};
    for (const Term& t : terms_) {
        const Jet a = t.x(p[0]), b = t.y(p[1]), c = t.z(p[2]);
        g[0] += t.coef * a[1] * b[0] * c[0];
        g[1] += t.coef * a[0] * b[1] * c[0];
        g[2] += t.coef * a[0] * b[0] * c[1];
    }
    return g;
}

Mat3 SeparableField::hessian(const Vec3& p) const {
    Mat3 h{};
    for (const Term& t : terms_) {
        const std::array<Jet, 3> j{t.x(p[0]), t.y(p[1]), t.z(p[2])};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double v = t.coef;
                for (int d = 0; d < 3; ++d) {
                    const int order = (d == r) + (d == c);
                    v *= j[d][order];
                }
                h[r][c] += v;
            }
    }
    return h;
}

double SeparableField::laplacian(const Vec3& p, const Vec3& nu) const {
    const Mat3 h = hessian(p);
    return nu[0] * h[0][0] + nu[1] * h[1][1] + nu[2] * h[2][2];
}

SeparableField SeparableField::scaled(double a) const {
    SeparableField out = *this;
    for (Term& t : out.terms_) t.coef *= a;
    return out;
}

double TimeFactor::value(double t) const {
    if (t >= t_end) return 0.0;
    const double r = (t_end - t) / t_end;
    return r * r;
}

double TimeFactor::derivative(double t) const {
    if (t >= t_end) return 0.0;
    return -2.0 * (t_end - t) / (t_end * t_end);
}

double TimeFactor::integral(double a, double b) const {
    a = std::min(a, t_end);
    b = std::min(b, t_end);
    if (b <= a) return 0.0;
    const double ra = t_end - a, rb = t_end - b;
    return (ra * ra * ra - rb * rb * rb) / (3.0 * t_end * t_end);
}

TestFunction TestFunction::scaled(double a) const {
    TestFunction out = *this;
    for (auto& f : out.u) f = f.scaled(a);
    out.c = out.c.scaled(a);
    return out;
}

std::vector<TestFunction> standard_test_family(const Grid& g, double T, double spacing) {
    if (!(T > spacing) || !(spacing > 0.0))
        throw std::invalid_argument("test family: need 0 < spacing < T");
    using namespace profiles;
    const double lx = g.lx(), ly = g.ly(), h = g.height();
    const TimeFactor eta{T - spacing};
    std::vector<TestFunction> fam(3);

    fam[0].name = "streamfunction";
    fam[0].u[0].add(1.0, bump(lx), bump_slope(ly), quarter_cosine(h));
    fam[0].u[1].add(-1.0, bump_slope(lx), bump(ly), quarter_cosine(h));
    fam[0].eta = eta;

    fam[1].name = "overturning";
    fam[1].u[0].add(1.0, bump(lx), bump(ly), overturn_slope(h));
    fam[1].u[2].add(-1.0, bump_slope(lx), bump(ly), overturn(h));
    fam[1].eta = eta;

    fam[2].name = "concentration";
    fam[2].c.add(1.0, bump(lx), bump(ly), top_square(h));
    fam[2].eta = eta;
    return fam;
}

void validate_test_function(const TestFunction& f, const Grid& g, double T) {
    if (f.eta.value(T) != 0.0 || f.eta.derivative(T) != 0.0)
        throw std::invalid_argument("test function '" + f.name + "' does not vanish at T");
    const std::array<double, 3> ext{g.lx(), g.ly(), g.height()};
    double scale = 1e-300;
    const int n = 7;
    auto at = [&](int a, int b, int c) {
        return Vec3{ext[0] * a / (n - 1.0), ext[1] * b / (n - 1.0), ext[2] * c / (n - 1.0)};
    };
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < 3; ++d) {
                    const Vec3 gr = f.u[d].gradient(at(a, b, c));
                    for (double v : gr) scale = std::max(scale, std::abs(v));
                }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                const Vec3 p = at(a, b, c);
                const double div = f.u[0].gradient(p)[0] + f.u[1].gradient(p)[1] +
                                   f.u[2].gradient(p)[2];
                if (std::abs(div) > 1e-10 * scale)
                    throw std::invalid_argument("test function '" + f.name +
                                                "' is not divergence free");
                const bool wall = a == 0 || a == n - 1 || b == 0 || b == n - 1 || c == n - 1;
                if (!wall) continue;
                for (int d = 0; d < 2; ++d)
                    if (std::abs(f.u[d].value(p)) > 1e-12)
                        throw std::invalid_argument("test function '" + f.name +
                                                    "' does not vanish on the walls");
                if (std::abs(f.c.value(p)) > 1e-12)
                    throw std::invalid_argument("test function '" + f.name +
                                                "' does not vanish on Gamma_A");
            }
}

double WeakTerms::defect_u() const {
    return (u_time + u_visc + u_adv + u_coriolis + u_eps_beta + u_eps2) -
           (u_init + u_traction + u_forcing);
}
double WeakTerms::defect_c() const { return (c_time + c_adv + c_diff) - (c_init + c_source + c_forcing); }
double WeakTerms::residual_u() const { return std::abs(defect_u()); }
double WeakTerms::residual_c() const { return std::abs(defect_c()); }

namespace {

/// Visits the links of a component stored on faces normal to `normal`
/// (dims n) along `axis`. Calls f(A, B, mid, weight) with B = A + e_axis.
/// Links across a wall use the ghost layer and carry half weight; faces on
/// the component's own walls are skipped for transverse links.
template <class F>
void for_each_link(const std::array<int, 3>& n, int normal, int axis, const Grid& g, F&& f) {
    std::array<int, 3> lo{}, hi{};
    for (int d = 0; d < 3; ++d) {
        if (d == axis) {
            lo[d] = d == normal ? 0 : -1;
            hi[d] = d == normal ? n[d] - 2 : n[d] - 1;
        } else if (d == normal) {
            lo[d] = 1;
            hi[d] = n[d] - 2;
        } else {
            lo[d] = 0;
            hi[d] = n[d] - 1;
        }
    }
    for (int i = lo[0]; i <= hi[0]; ++i)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int k = lo[2]; k <= hi[2]; ++k) {
                const std::array<int, 3> a{i, j, k};
                std::array<int, 3> b = a;
                ++b[axis];
                Vec3 mid{};
                for (int d = 0; d < 3; ++d) {
                    const double h = g.spacing(d);
                    if (d == axis)
                        mid[d] = d == normal ? (a[d] + 0.5) * h : (a[d] + 1.0) * h;
                    else
                        mid[d] = d == normal ? a[d] * h : (a[d] + 0.5) * h;
                }
                const bool wall = axis != normal && (a[axis] == -1 || a[axis] == n[axis] - 1);
                f(a, b, mid, wall ? 0.5 : 1.0);
            }
}

std::array<int, 3> face_dims(const Grid& g, int normal) {
    std::array<int, 3> n{g.nx(), g.ny(), g.nz()};
    ++n[normal];
    return n;
}

Vec3 face_point(const Grid& g, int normal, int i, int j, int k) {
    const auto p = g.face_center(normal, i, j, k);
    return {p[0], p[1], p[2]};
}

struct Precomputed {
    std::array<Array3, 3> phi_face;                  // phi_c on its own faces
    std::array<std::array<std::vector<double>, 3>, 3> link;  // [component][axis]
    std::array<Array3, 3> phi_cell;                  // phi_c at centres
    std::array<std::array<Array3, 3>, 3> dphi_cell;  // [component][axis]
    Array3 chi_cell;
    std::array<Array3, 3> dchi_cell;
    std::array<Array3, 3> dchi_face;  // d_axis chi on axis faces, face weight folded in
    double traction = 0.0;            // <theta, phi_H> on the ground
    double source = 0.0;              // (delta, chi) times intensity
};

struct Accum {
    static constexpr int count = 11;
    std::array<double, count> prev{}, integral{};
};

enum Slot { s_u_time, s_u_visc, s_u_adv, s_u_cor, s_u_eb, s_u_e2, s_u_force, s_c_time, s_c_adv, s_c_diff, s_c_force };

}  // namespace

struct WeakResidual::Impl {
    SolverMode mode;
    std::vector<TestFunction> family;
    const StepInputs* in;
    const Grid* grid;
    std::vector<Precomputed> pre;
    std::vector<Accum> acc;
    std::vector<WeakTerms> init;
    long count = 0;
    double t_prev = 0.0;
    double t_last = 0.0;
};

WeakResidual::WeakResidual(SolverMode mode, std::vector<TestFunction> family, const StepInputs& in,
                           const Grid& g)
    : impl_(std::make_unique<Impl>()) {
    Impl& m = *impl_;
    m.mode = mode;
    m.family = std::move(family);
    m.in = &in;
    m.grid = &g;
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    const double v = g.cell_volume();
    const Vec3 nu = in.params.nu();
    for (const TestFunction& f : m.family) {
        Precomputed p;
        for (int c = 0; c < 3; ++c) {
            const auto n = face_dims(g, c);
            p.phi_face[c] = Array3(n[0], n[1], n[2]);
            for (int i = 0; i < n[0]; ++i)
                for (int j = 0; j < n[1]; ++j)
                    for (int k = 0; k < n[2]; ++k)
                        p.phi_face[c](i, j, k) = f.u[c].value(face_point(g, c, i, j, k));
            for (int a = 0; a < 3; ++a) {
                auto& vec = p.link[c][a];
                const double coef = nu[a] / g.spacing(a) * v;
                for_each_link(n, c, a, g, [&](auto, auto, const Vec3& mid, double w) {
                    vec.push_back(coef * w * f.u[c].gradient(mid)[a]);
                });
            }
            p.phi_cell[c] = Array3(nx, ny, nz);
            for (int a = 0; a < 3; ++a) p.dphi_cell[c][a] = Array3(nx, ny, nz);
        }
        p.chi_cell = Array3(nx, ny, nz);
        for (int a = 0; a < 3; ++a) p.dchi_cell[a] = Array3(nx, ny, nz);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                for (int k = 0; k < nz; ++k) {
                    const Vec3 x{g.xc(i), g.yc(j), g.zc(k)};
                    for (int c = 0; c < 3; ++c) {
                        p.phi_cell[c](i, j, k) = f.u[c].value(x);
                        const Vec3 gr = f.u[c].gradient(x);
                        for (int a = 0; a < 3; ++a) p.dphi_cell[c][a](i, j, k) = gr[a];
                    }
                    p.chi_cell(i, j, k) = f.c.value(x);
                    const Vec3 gc = f.c.gradient(x);
                    for (int a = 0; a < 3; ++a) p.dchi_cell[a](i, j, k) = gc[a];
                }
        for (int a = 0; a < 3; ++a) {
            const auto n = face_dims(g, a);
            p.dchi_face[a] = Array3(n[0], n[1], n[2]);
            for (int i = 0; i < n[0]; ++i)
                for (int j = 0; j < n[1]; ++j)
                    for (int k = 0; k < n[2]; ++k) {
                        const int idx = a == 0 ? i : (a == 1 ? j : k);
                        const double w = (idx == 0 || idx == n[a] - 1) ? 0.5 * v : v;
                        p.dchi_face[a](i, j, k) = w * f.c.gradient(face_point(g, a, i, j, k))[a];
                    }
        }
        if (in.theta.theta1.size() > 0)
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j) {
                    const Vec3 x{g.xc(i), g.yc(j), 0.0};
                    p.traction += (in.theta.theta1(i, j) * f.u[0].value(x) +
                                   in.theta.theta2(i, j) * f.u[1].value(x)) *
                                  g.dx() * g.dy();
                }
        if (in.source && !f.c.empty()) {
            const double ts = in.source->spec().switch_time;
            p.source = in.source->pair_with(ts, [&](const Vec3& x) { return f.c.value(x); }, g);
        }
        m.pre.push_back(std::move(p));
    }
    m.acc.resize(m.family.size());
    m.init.resize(m.family.size());
}

WeakResidual::~WeakResidual() = default;

void WeakResidual::add(const SimState& s) {
    Impl& m = *impl_;
    const Grid& g = *m.grid;
    const StepInputs& in = *m.in;
    if (m.count == 0 && s.t != 0.0)
        throw std::invalid_argument("weak_residual: history must start at t = 0");
    const bool aniso = m.mode == SolverMode::anisotropic;
    const double eps = in.params.eps;
    const double e2 = aniso ? eps * eps : 0.0;
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    const double v = g.cell_volume();

    const GhostedVelocity gu = apply_velocity_bcs(s.u, in.theta, in.params.nu3, g, m.mode);
    const std::array<const Padded3*, 3> comp{&gu.u1, &gu.u2, &gu.u3};
    const DiffusionFluxes flux = diffusion_fluxes(apply_concentration_bcs(s.C, in.M, g), in.M, g);

    StaggeredVelocity du(nx, ny, nz);
    ScalarField dc(nx, ny, nz);
    const bool forced = static_cast<bool>(in.forcing);
    if (forced) in.forcing(s.t, du, dc);

    // Cell-centred velocity.
    Array3 uc[3] = {Array3(nx, ny, nz), Array3(nx, ny, nz), Array3(nx, ny, nz)};
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                uc[0](i, j, k) = 0.5 * (s.u.u1(i, j, k) + s.u.u1(i + 1, j, k));
                uc[1](i, j, k) = 0.5 * (s.u.u2(i, j, k) + s.u.u2(i, j + 1, k));
                uc[2](i, j, k) = 0.5 * (s.u.u3(i, j, k) + s.u.u3(i, j, k + 1));
            }

    auto face_pair = [&](const Array3& a, const Array3& b) {
        double r = 0.0;
        auto av = a.values();
        auto bv = b.values();
        for (std::size_t n = 0; n < av.size(); ++n) r += av[n] * bv[n];
        return r * v;
    };

    for (std::size_t f = 0; f < m.family.size(); ++f) {
        const Precomputed& p = m.pre[f];
        const TimeFactor& eta = m.family[f].eta;
        const int ncomp = aniso ? 3 : 2;

        std::array<double, 3> pu{}, glink{}, adv{}, force{};
        for (int c = 0; c < ncomp; ++c) {
            pu[c] = face_pair(s.u.component(c), p.phi_face[c]);
            if (forced) force[c] = face_pair(du.component(c), p.phi_face[c]);
            const Padded3& fp = *comp[c];
            const auto n = face_dims(g, c);
            for (int a = 0; a < 3; ++a) {
                const auto& vec = p.link[c][a];
                std::size_t idx = 0;
                double sum = 0.0;
                for_each_link(n, c, a, g, [&](const auto& A, const auto& B, const Vec3&, double) {
                    sum += (fp(B[0], B[1], B[2]) - fp(A[0], A[1], A[2])) * vec[idx++];
                });
                glink[c] += sum;
            }
        }
        double cor = 0.0, eb = 0.0, pc = 0.0, advc = 0.0, difc = 0.0, forcec = 0.0;
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                const CoriolisPair ab = coriolis_at(in.params, g.yc(j));
                for (int k = 0; k < nz; ++k) {
                    const double U[3] = {uc[0](i, j, k), uc[1](i, j, k), uc[2](i, j, k)};
                    for (int c = 0; c < ncomp; ++c) {
                        double conv = 0.0;
                        for (int a = 0; a < 3; ++a) conv += U[a] * p.dphi_cell[c][a](i, j, k);
                        adv[c] -= U[c] * conv;
                    }
                    cor += ab.alpha * (-U[1] * p.phi_cell[0](i, j, k) + U[0] * p.phi_cell[1](i, j, k));
                    if (aniso)
                        eb += ab.beta * (U[2] * p.phi_cell[0](i, j, k) - U[0] * p.phi_cell[2](i, j, k));
                    const double cval = s.C(i, j, k);
                    pc += cval * p.chi_cell(i, j, k);
                    double conv = 0.0;
                    for (int a = 0; a < 3; ++a) conv += U[a] * p.dchi_cell[a](i, j, k);
                    advc -= cval * conv;
                    if (forced) forcec += dc(i, j, k) * p.chi_cell(i, j, k);
                }
            }
        difc = (face_pair(flux.f1, p.dchi_face[0]) + face_pair(flux.f2, p.dchi_face[1]) +
                face_pair(flux.f3, p.dchi_face[2])) /
               v;
        cor *= v;
        eb *= eps * v;
        pc *= v;
        advc *= v;
        forcec *= v;
        for (double& x : adv) x *= v;

        const double et = eta.value(s.t), ed = eta.derivative(s.t);
        std::array<double, Accum::count> now{};
        now[s_u_time] = -ed * (pu[0] + pu[1]);
        now[s_u_visc] = et * (glink[0] + glink[1]);
        now[s_u_adv] = et * (adv[0] + adv[1]);
        now[s_u_cor] = et * cor;
        now[s_u_eb] = et * eb;
        now[s_u_e2] = e2 * (-ed * pu[2] + et * (adv[2] + glink[2]));
        now[s_u_force] = et * (force[0] + force[1] + e2 * force[2]);
        now[s_c_time] = -ed * pc;
        now[s_c_adv] = et * advc;
        now[s_c_diff] = et * difc;
        now[s_c_force] = et * forcec;

        Accum& ac = m.acc[f];
        if (m.count == 0) {
            m.init[f].u_init = eta.value(0.0) * (pu[0] + pu[1] + e2 * pu[2]);
            m.init[f].c_init = eta.value(0.0) * pc;
        } else {
            const double dt = s.t - m.t_prev;
            for (int n = 0; n < Accum::count; ++n) ac.integral[n] += 0.5 * dt * (ac.prev[n] + now[n]);
        }
        ac.prev = now;
    }
    m.t_prev = s.t;
    m.t_last = s.t;
    ++m.count;
}

std::vector<WeakTerms> WeakResidual::finish() const {
    const Impl& m = *impl_;
    if (m.count == 0) throw std::invalid_argument("weak_residual: empty history");
    std::vector<WeakTerms> out;
    for (std::size_t f = 0; f < m.family.size(); ++f) {
        WeakTerms w = m.init[f];
        const auto& I = m.acc[f].integral;
        const TimeFactor& eta = m.family[f].eta;
        w.name = m.family[f].name;
        w.u_time = I[s_u_time];
        w.u_visc = I[s_u_visc];
        w.u_adv = I[s_u_adv];
        w.u_coriolis = I[s_u_cor];
        w.u_eps_beta = I[s_u_eb];
        w.u_eps2 = I[s_u_e2];
        w.u_forcing = I[s_u_force];
        w.c_time = I[s_c_time];
        w.c_adv = I[s_c_adv];
        w.c_diff = I[s_c_diff];
        w.c_forcing = I[s_c_force];
        w.u_traction = -m.pre[f].traction * eta.integral(0.0, m.t_last);
        if (m.in->source) {
            const double ts = m.in->source->spec().switch_time;
            w.c_source = m.pre[f].source * eta.integral(ts, m.t_last);
        }
        out.push_back(w);
    }
    return out;
}

std::vector<WeakTerms> weak_residual(std::span<const SimState> history, SolverMode mode,
                                     std::vector<TestFunction> family, const StepInputs& in,
                                     const Grid& grid) {
    WeakResidual w(mode, std::move(family), in, grid);
    for (const SimState& s : history) w.add(s);
    return w.finish();
}

}  // namespace atmo
