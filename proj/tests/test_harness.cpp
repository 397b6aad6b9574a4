#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "atmo/config.hpp"
#include "atmo/io.hpp"
#include "atmo/run.hpp"
#include "support.hpp"

using namespace atmo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("atmo_harness_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* small_run =
    "[grid]\nnx = 8\nny = 8\nnz = 4\n"
    "[time]\nT = 0.05\n"
    "[source]\nt_s = 0.0\n";

int run_cli(const std::string& args) {
    const char* exe = std::getenv("SIMULATE_EXE");
    REQUIRE(exe != nullptr);
    const int rc = std::system((std::string(exe) + " " + args + " --quiet > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config defaults") {
    const RunConfig c = parse_config("");
    CHECK(c.grid.nx == 32);
    CHECK(c.grid.ny == 32);
    CHECK(c.grid.nz == 16);
    CHECK(c.eps_list == std::vector<double>{0.5});
    CHECK(c.mode == RunMode::aniso);
    CHECK(c.cfl == 0.5);
    CHECK(c.advection == AdvectionScheme::upwind1);
    CHECK(parse_config("[run]\nmode = sweep\n").eps_list == default_sweep_eps());
}

TEST_CASE("config values") {
    const RunConfig c = parse_config(
        "# comment\n[grid]\nnx = 12 # trailing\nlx = 2.5\n"
        "[phys]\ncoriolis_mode = beta_plane\nl_slope = 0.2\n"
        "[diffusion]\nm11 = 2\nm13 = 0.5\n"
        "[source]\nkind = lorentzian\nx_s = 0.2, 0.3, 0.4\n"
        "[bc]\ntheta = constant 0.1, -0.2\n"
        "[run]\neps_list = 0.5, 0.25,0.125\nadvection = centered\n");
    CHECK(c.grid.nx == 12);
    CHECK(c.grid.lx == 2.5);
    CHECK(c.phys.coriolis_mode == CoriolisMode::beta_plane);
    CHECK(c.phys.l_slope == 0.2);
    CHECK(c.m[0][0] == 2.0);
    CHECK(c.m[2][0] == 0.5);
    CHECK(c.source.kind == SourceKind::lorentzian);
    CHECK(c.source.location == Vec3{0.2, 0.3, 0.4});
    CHECK(c.theta.kind == ThetaConfig::Kind::constant);
    CHECK(c.theta.c2 == -0.2);
    CHECK(c.eps_list == std::vector<double>{0.5, 0.25, 0.125});
    CHECK(c.advection == AdvectionScheme::centered2);
}

TEST_CASE("config errors name the key and line") {
    try {
        parse_config("[grid]\nnx = 8\n[phys]\nnu1 = -1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 4);
        CHECK(std::string(e.what()).find("nu1") != std::string::npos);
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    try {
        parse_config("[grid]\nnx = 8\nwidth = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("width") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("[nowhere]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\neps_list = 0.5, 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\neps_list = 0.5, x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[diffusion]\nm11 = 1\nm12 = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[grid]\nnx = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[source]\nx_s = 0.5, 0.5, 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[grid]\nnx = 8\nnx = 9\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[time]\ncfl = 1.5\n"), ConfigError);
}

TEST_CASE("csv round trip is exact") {
    const fs::path dir = scratch("csv");
    CsvTable t;
    t.header = {"a", "b", "c"};
    test::Rng rng(1);
    for (int r = 0; r < 20; ++r) t.rows.push_back({rng.uniform(-1e6, 1e6), rng.uniform(0, 1e-9), double(r)});
    write_csv(t, dir / "t.csv");
    const CsvTable back = read_csv(dir / "t.csv");
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    fs::remove_all(dir);
}

TEST_CASE("sweep table columns") {
    ConvergenceReport rep;
    rep.rows.push_back({0.25, 0.1, 0.2, 0.3, 0.0, 1.5});
    rep.rows.push_back({0.5, 0.2, 0.4, 0.6, -1e-3, 2.5});
    finalize_report(rep);
    const CsvTable t = to_table(rep);
    CHECK(t.header == std::vector<std::string>{"eps", "err_uH", "err_u3", "err_C", "energy_slack_min", "runtime_s"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == 0.5);
    const ConvergenceReport back = sweep_from_table(t);
    CHECK(back.rows[1].err_C == 0.3);
    CHECK(back.rate_C == doctest::Approx(1.0));
}

TEST_CASE("vtk header and zero state") {
    const fs::path dir = scratch("vtk");
    const Grid g = test::grid(4, 5, 6);
    write_vtk(zero_state(g, SolverMode::hydrostatic), g, dir / "z.vtk", "run-42");
    std::istringstream in(slurp(dir / "z.vtk"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "# vtk DataFile Version 3.0");
    std::getline(in, line);
    CHECK(line == "run-42");
    std::getline(in, line);
    CHECK(line == "ASCII");
    std::getline(in, line);
    CHECK(line == "DATASET STRUCTURED_POINTS");
    std::getline(in, line);
    CHECK(line == "DIMENSIONS 4 5 6");
    int values = 0, nonzero = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        double v;
        if (!std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-') continue;
        while (ls >> v) {
            ++values;
            if (v != 0.0) ++nonzero;
        }
    }
    CHECK(values == 5 * 4 * 5 * 6);
    CHECK(nonzero == 0);
    fs::remove_all(dir);
}

TEST_CASE("plan_time ends exactly at T") {
    RunConfig c = parse_config("[time]\nT = 1.0\nsnapshot_every = 7\n");
    const TimePlan p = plan_time(c, 0.013);
    CHECK(p.dt <= 0.013);
    CHECK(p.steps % 7 == 0);
    CHECK(p.dt * p.steps == doctest::Approx(1.0).epsilon(1e-14));
    c.dt_max = 0.001;
    CHECK(plan_time(c, 0.013).dt <= 0.001);
}

TEST_CASE("hydrostatic run of the zero state stays zero") {
    RunConfig c = parse_config(std::string(small_run) + "[init]\nvelocity = zero\n[source]\n");
    c.source.intensity = 0.0;
    RunOptions opt;
    opt.write_files = false;
    const RunArtifacts a = run_simulation(c, 1.0, SolverMode::hydrostatic, std::nullopt, {}, opt);
    REQUIRE(!a.snapshots.empty());
    for (const SimState& s : a.snapshots) {
        for (int d = 0; d < 3; ++d) CHECK(max_abs(s.u.component(d).values()) == 0.0);
        CHECK(max_abs(s.C.values()) == 0.0);
    }
    CHECK(a.snapshots.back().t == doctest::Approx(0.05));
}

TEST_CASE("runs are deterministic and write their files") {
    const fs::path d1 = scratch("det1"), d2 = scratch("det2");
    RunConfig c = parse_config(small_run);
    RunOptions opt;
    opt.reference = true;
    const RunArtifacts a = run_simulation(c, 0.5, SolverMode::anisotropic, std::nullopt, d1, opt);
    const RunArtifacts b = run_simulation(c, 0.5, SolverMode::anisotropic, std::nullopt, d2, opt);
    CHECK(a.runtime_s == 0.0);
    CHECK(a.snapshots.back().C == b.snapshots.back().C);
    CHECK(a.snapshots.back().u.u1 == b.snapshots.back().u.u1);
    for (const char* f : {"energy.csv", "norms.csv", "manifest.txt"}) {
        REQUIRE(fs::exists(d1 / f));
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    }
    CHECK(fs::exists(d1 / "snapshots"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("simulate exit codes") {
    const fs::path dir = scratch("cli");
    {
        std::ofstream(dir / "ok.cfg") << small_run << "[run]\nmode = hydro\n";
        std::ofstream(dir / "bad.cfg") << "[phys]\nnu1 = -1\n";
        std::ofstream(dir / "abort.cfg") << small_run << "[run]\ntol = 1e-30\nmax_iter = 1\n";
    }
    CHECK(run_cli((dir / "ok.cfg").string() + " --out " + (dir / "ok").string()) == 0);
    CHECK(fs::exists(dir / "ok" / "energy.csv"));
    CHECK(run_cli((dir / "bad.cfg").string()) == 1);
    CHECK(run_cli((dir / "missing.cfg").string()) == 1);
    CHECK(run_cli((dir / "ok.cfg").string() + " --eps 2") == 1);
    CHECK(run_cli((dir / "abort.cfg").string() + " --out " + (dir / "abort").string()) == 2);
    fs::remove_all(dir);
}
