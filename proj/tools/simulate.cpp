#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "atmo/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Rescaled Navier-Stokes / pollutant transport simulator"};
    std::string config_path;
    std::optional<std::string> mode, out;
    std::optional<double> eps;
    bool quiet = false, reference = false;
    app.add_option("config", config_path, "configuration file")->required();
    app.add_option("--mode", mode, "aniso | hydro | sweep");
    app.add_option("--eps", eps, "aspect ratio (replaces eps_list)");
    app.add_option("--out", out, "output directory");
    app.add_flag("--quiet", quiet, "no progress output");
    app.add_flag("--reference", reference, "report timings as 0 for reproducible outputs");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    atmo::RunConfig cfg;
    try {
        cfg = atmo::load_config(config_path);
        if (mode) cfg.mode = atmo::parse_run_mode(*mode);
        if (eps) {
            if (!(*eps > 0.0 && *eps <= 1.0)) throw atmo::ConfigError("--eps must lie in (0, 1]", 0);
            cfg.eps_list = {*eps};
        }
        if (out) cfg.output_dir = *out;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }

    atmo::RunOptions opt;
    opt.reference = reference;
    opt.log = quiet ? nullptr : &std::cerr;
    try {
        if (cfg.mode == atmo::RunMode::sweep) {
            const atmo::SweepResult r = atmo::epsilon_sweep(cfg, opt);
            if (!quiet)
                std::cerr << "rates: uH " << r.report.rate_uH << ", u3 " << r.report.rate_u3
                          << ", C " << r.report.rate_C << '\n';
        } else {
            const auto m = cfg.mode == atmo::RunMode::aniso ? atmo::SolverMode::anisotropic
                                                            : atmo::SolverMode::hydrostatic;
            atmo::run_simulation(cfg, cfg.eps_list.front(), m, std::nullopt, cfg.output_dir, opt);
        }
    } catch (const atmo::NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
