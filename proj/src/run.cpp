#include "atmo/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "atmo/aniso_solver.hpp"
#include "atmo/hydro_solver.hpp"
#include "atmo/io.hpp"

namespace atmo {

namespace {

constexpr int auto_snapshots = 40;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string mode_name(SolverMode m) { return m == SolverMode::anisotropic ? "aniso" : "hydro"; }

double unit_random(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void log(const RunOptions& opt, const std::string& msg) {
    if (opt.log) *opt.log << msg << std::endl;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

CsvTable norms_table(const AprioriNorms& n, std::optional<double> eps) {
    CsvTable t{{"sup_u1", "sup_u2", "sup_eps_u3", "sup_C", "h1_u1", "h1_u2", "h1_eps_u3", "h1_C",
                "l2_u3", "l2_C"},
               {}};
    std::vector<double> row{n.sup_u1, n.sup_u2, n.sup_eps_u3, n.sup_C, n.h1_u1,
                            n.h1_u2,  n.h1_eps_u3, n.h1_C, n.l2_u3, n.l2_C};
    if (eps) {
        t.header.insert(t.header.begin(), "eps");
        row.insert(row.begin(), *eps);
    }
    t.rows.push_back(row);
    return t;
}

std::optional<TranslationReport> try_translation(const std::vector<SimState>& snaps,
                                                 double spacing, const Grid& g) {
    if (snaps.size() < 2) return std::nullopt;
    const double T = spacing * static_cast<double>(snaps.size() - 1);
    std::vector<double> h;
    for (int m = 1; m * spacing < 0.5 * T * (1.0 - 1e-12); m *= 2) h.push_back(m * spacing);
    if (h.size() < 3) return std::nullopt;
    std::vector<ScalarField> c;
    c.reserve(snaps.size());
    for (const SimState& s : snaps) c.push_back(s.C);
    return translation_modulus(c, spacing, h, g);
}

}  // namespace

TimePlan plan_time(const RunConfig& cfg, double dt_limit) {
    if (!(dt_limit > 0.0)) throw std::invalid_argument("plan_time: nonpositive step limit");
    const double lim = std::min(dt_limit, cfg.dt_max);
    long n = static_cast<long>(std::ceil(cfg.T / lim * (1.0 - 1e-12)));
    n = std::max(n, 1L);
    TimePlan p;
    p.snapshot_every = cfg.snapshot_every > 0
                           ? cfg.snapshot_every
                           : static_cast<int>(std::max(1L, (n + auto_snapshots - 1) / auto_snapshots));
    n = (n + p.snapshot_every - 1) / p.snapshot_every * p.snapshot_every;
    p.steps = n;
    p.dt = cfg.T / static_cast<double>(n);
    return p;
}

SourceSpec run_source(const RunConfig& cfg, double eps, SolverMode mode) {
    SourceSpec s = cfg.source;
    s.width = eps;
    if (mode == SolverMode::hydrostatic && !cfg.hydro_same_source) s.kind = SourceKind::delta_deposit;
    return s;
}

SimState initial_state(const RunConfig& cfg, double eps, SolverMode mode, const Grid& g) {
    SimState s = zero_state(g, mode);
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    std::mt19937_64 rng(cfg.seed);
    const double pi = std::numbers::pi;
    const double a = cfg.init.velocity_amplitude;
    switch (cfg.init.velocity) {
        case VelocityPreset::zero:
            break;
        case VelocityPreset::taylor_green_h:
            for (int i = 0; i <= nx; ++i)
                for (int j = 0; j < ny; ++j)
                    for (int k = 0; k < nz; ++k)
                        s.u.u1(i, j, k) = -a * std::cos(pi * g.xf(i)) * std::sin(pi * g.yc(j)) *
                                          std::sin(pi * g.zc(k) / g.height());
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j <= ny; ++j)
                    for (int k = 0; k < nz; ++k)
                        s.u.u2(i, j, k) = a * std::sin(pi * g.xc(i)) * std::cos(pi * g.yf(j)) *
                                          std::sin(pi * g.zc(k) / g.height());
            break;
        case VelocityPreset::random:
            for (int c = 0; c < 3; ++c)
                for (double& v : s.u.component(c).values()) v = a * (2.0 * unit_random(rng) - 1.0);
            break;
    }
    if (cfg.init.velocity != VelocityPreset::zero)
        s.u = mode == SolverMode::anisotropic
                  ? project_initial_anisotropic(s.u, eps, g, cfg.tol, cfg.max_iter)
                  : project_initial_hydrostatic(s.u, g, cfg.tol, cfg.max_iter);

    const double b = cfg.init.concentration_amplitude;
    switch (cfg.init.concentration) {
        case ConcentrationPreset::zero:
            break;
        case ConcentrationPreset::gaussian_blob: {
            const Vec3 c0 = cfg.init.blob_center;
            const double w2 = cfg.init.blob_width * cfg.init.blob_width;
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    for (int k = 0; k < nz; ++k) {
                        const double dx = g.xc(i) - c0[0], dy = g.yc(j) - c0[1], dz = g.zc(k) - c0[2];
                        s.C(i, j, k) = b * std::exp(-(dx * dx + dy * dy + dz * dz) / w2);
                    }
            break;
        }
        case ConcentrationPreset::random:
            for (double& v : s.C.values()) v = b * unit_random(rng);
            break;
    }
    return s;
}

std::unique_ptr<RunSetup> make_setup(const RunConfig& cfg, double eps, SolverMode mode) {
    auto su = std::make_unique<RunSetup>();
    su->mode = mode;
    su->eps = eps;
    su->grid = std::make_unique<Grid>(build_grid(cfg.grid));
    const Grid& g = *su->grid;
    StepInputs& in = su->inputs;
    in.params = cfg.phys;
    in.params.eps = eps;
    validate(in.params);
    in.M = cfg.tensor_file.empty() ? DiffusionTensor(cfg.m) : load_tensor_file(cfg.tensor_file, g);
    switch (cfg.theta.kind) {
        case ThetaConfig::Kind::zero: in.theta = BoundaryForcing(g.nx(), g.ny()); break;
        case ThetaConfig::Kind::constant:
            in.theta = BoundaryForcing::constant(g.nx(), g.ny(), cfg.theta.c1, cfg.theta.c2);
            break;
        case ThetaConfig::Kind::file: in.theta = load_theta_file(cfg.theta.path, g); break;
    }
    if (cfg.source.intensity > 0.0) {
        su->source = std::make_unique<PollutionSource>(run_source(cfg, eps, mode), g);
        in.source = su->source.get();
    }
    in.advection = cfg.advection;
    in.tol = cfg.tol;
    in.max_iter = cfg.max_iter;
    su->initial = initial_state(cfg, eps, mode, g);
    return su;
}

double initial_dt_limit(const RunConfig& cfg, const RunSetup& su) {
    return stable_dt(su.initial, su.inputs.params, su.inputs.M, *su.grid, cfg.cfl, cfg.dt_max);
}

RunArtifacts run_simulation(const RunConfig& cfg, double eps, SolverMode mode,
                            const std::optional<TimePlan>& plan_in,
                            const std::filesystem::path& dir, const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto su = make_setup(cfg, eps, mode);
    const Grid& g = *su->grid;
    const StepInputs& in = su->inputs;

    RunArtifacts art;
    art.mode = mode;
    art.eps = eps;
    art.run_id = mode_name(mode) + " eps=" + fmt(eps) + " seed=" + std::to_string(cfg.seed);
    art.plan = plan_in ? *plan_in : plan_time(cfg, initial_dt_limit(cfg, *su));
    const TimePlan& plan = art.plan;

    EnergyLedger ledger(in.params, in.M, in.theta, in.source, g, mode);
    AprioriAccumulator apriori(eps, g, mode);
    const std::filesystem::path snap_dir = dir / "snapshots";
    if (opt.write_files) std::filesystem::create_directories(snap_dir);
    auto snap_path = [&](long step) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%06ld.vtk", step);
        return snap_dir / name;
    };

    auto write_reports = [&](const std::string& status, const SimState& last) {
        if (!opt.write_files) return;
        write_csv(to_table(art.energy), dir / "energy.csv");
        write_csv(norms_table(art.norms, std::nullopt), dir / "norms.csv");
        if (art.translation) {
            CsvTable t{{"h", "modulus"}, {}};
            for (std::size_t n = 0; n < art.translation->h.size(); ++n)
                t.rows.push_back({art.translation->h[n], art.translation->modulus[n]});
            write_csv(t, dir / "translation.csv");
        }
        write_manifest(dir / "manifest.txt",
                       {{"run_id", art.run_id},
                        {"status", status},
                        {"mode", mode_name(mode)},
                        {"eps", fmt(eps)},
                        {"nx", std::to_string(g.nx())},
                        {"ny", std::to_string(g.ny())},
                        {"nz", std::to_string(g.nz())},
                        {"T", fmt(cfg.T)},
                        {"dt", fmt(plan.dt)},
                        {"steps", std::to_string(plan.steps)},
                        {"last_step", std::to_string(last.step)},
                        {"last_t", fmt(last.t)},
                        {"snapshot_every", std::to_string(plan.snapshot_every)},
                        {"seed", std::to_string(cfg.seed)},
                        {"source", std::string(to_string(run_source(cfg, eps, mode).kind))},
                        {"energy_slack_min", fmt(art.energy.records.empty() ? 0.0 : art.energy.min_slack())},
                        {"energy_tol_scheme", fmt(art.energy.tol_scheme)},
                        {"translation_exponent",
                         art.translation ? fmt(art.translation->exponent) : std::string("nan")}});
    };

    SimState s = su->initial;
    auto record = [&](const SimState& st) {
        ledger.add(st);
        apriori.add(st);
        if (st.step % plan.snapshot_every == 0) {
            art.snapshots.push_back(st);
            if (opt.write_files) write_vtk(st, g, snap_path(st.step), art.run_id);
        }
    };
    log(opt, art.run_id + ": " + std::to_string(plan.steps) + " steps of " + fmt(plan.dt));
    record(s);
    try {
        for (long n = 0; n < plan.steps; ++n) {
            SimState next = mode == SolverMode::anisotropic ? step_anisotropic(s, in, plan.dt, g)
                                                            : step_hydrostatic(s, in, plan.dt, g);
            if (n + 1 == plan.steps) next.t = cfg.T;
            s = std::move(next);
            record(s);
            if (opt.log && (n + 1) % (plan.snapshot_every * 10) == 0)
                log(opt, art.run_id + ": t = " + fmt(s.t));
        }
    } catch (const NumericalError&) {
        art.energy = ledger.report();
        art.norms = apriori.result();
        if (opt.write_files) write_vtk(s, g, snap_path(s.step), art.run_id);
        write_reports("numerical_abort", s);
        throw;
    }
    art.energy = ledger.report();
    art.norms = apriori.result();
    art.translation = try_translation(art.snapshots, plan.dt * plan.snapshot_every, g);
    art.runtime_s =
        opt.reference
            ? 0.0
            : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_reports("ok", s);
    return art;
}

SweepResult epsilon_sweep(const RunConfig& cfg, const RunOptions& opt) {
    if (cfg.eps_list.empty()) throw std::invalid_argument("sweep: empty eps list");
    std::vector<double> eps = cfg.eps_list;
    std::sort(eps.begin(), eps.end(), std::greater<>());

    // Common plan: the most restrictive initial step over every run.
    double lim = initial_dt_limit(cfg, *make_setup(cfg, eps.front(), SolverMode::hydrostatic));
    for (double e : eps)
        lim = std::min(lim, initial_dt_limit(cfg, *make_setup(cfg, e, SolverMode::anisotropic)));
    const TimePlan plan = plan_time(cfg, lim);
    const Grid grid = build_grid(cfg.grid);
    const std::filesystem::path out = cfg.output_dir;
    if (opt.write_files) std::filesystem::create_directories(out);

    SweepResult res;
    res.hydro = run_simulation(cfg, eps.front(), SolverMode::hydrostatic, plan, out / "hydro", opt);

    CsvTable apriori{{}, {}};
    CsvTable trans{{"eps", "h", "modulus"}, {}};
    for (double e : eps) {
        char name[48];
        std::snprintf(name, sizeof name, "eps_%g", e);
        res.aniso.push_back(run_simulation(cfg, e, SolverMode::anisotropic, plan, out / name, opt));
        const RunArtifacts& a = res.aniso.back();

        std::vector<AnisoRun> runs;
        for (const RunArtifacts& r : res.aniso) runs.push_back({r.eps, r.snapshots});
        res.report = convergence_metrics(runs, res.hydro.snapshots, grid);
        for (ConvergenceRow& row : res.report.rows)
            for (const RunArtifacts& r : res.aniso)
                if (r.eps == row.eps) {
                    row.energy_slack_min = r.energy.min_slack();
                    row.runtime_s = r.runtime_s;
                }

        const CsvTable nt = norms_table(a.norms, e);
        if (apriori.header.empty()) apriori.header = nt.header;
        apriori.rows.push_back(nt.rows.front());
        if (a.translation)
            for (std::size_t n = 0; n < a.translation->h.size(); ++n)
                trans.rows.push_back({e, a.translation->h[n], a.translation->modulus[n]});
        if (opt.write_files) {
            write_csv(to_table(res.report), out / "sweep.csv");
            write_csv(apriori, out / "apriori.csv");
            write_csv(trans, out / "translation.csv");
        }
        log(opt, "eps = " + fmt(e) + ": err_uH " + fmt(res.report.rows.back().err_uH) + ", err_C " +
                     fmt(res.report.rows.back().err_C));
    }
    if (opt.write_files) {
        std::vector<std::pair<std::string, std::string>> kv{
            {"mode", "sweep"},
            {"eps_list", [&] {
                 std::string s;
                 for (double e : eps) s += (s.empty() ? "" : ",") + fmt(e);
                 return s;
             }()},
            {"dt", fmt(plan.dt)},
            {"steps", std::to_string(plan.steps)},
            {"snapshot_every", std::to_string(plan.snapshot_every)},
            {"seed", std::to_string(cfg.seed)},
            {"rate_uH", fmt(res.report.rate_uH)},
            {"rate_u3", fmt(res.report.rate_u3)},
            {"rate_C", fmt(res.report.rate_C)}};
        for (const RunArtifacts& a : res.aniso)
            kv.push_back({"translation_exponent_eps_" + fmt(a.eps),
                          a.translation ? fmt(a.translation->exponent) : std::string("nan")});
        write_manifest(out / "manifest.txt", kv);
    }
    return res;
}

}  // namespace atmo
