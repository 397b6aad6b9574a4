#include "atmo/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace atmo {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, p);
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_vtk(const SimState& s, const Grid& g, const std::filesystem::path& path,
               const std::string& run_id) {
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    std::ofstream out = open_out(path);
    out << "# vtk DataFile Version 3.0\n" << run_id << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << nx << ' ' << ny << ' ' << nz << '\n';
    out << "ORIGIN " << fmt(0.5 * g.dx()) << ' ' << fmt(0.5 * g.dy()) << ' ' << fmt(0.5 * g.dz())
        << '\n';
    out << "SPACING " << fmt(g.dx()) << ' ' << fmt(g.dy()) << ' ' << fmt(g.dz()) << '\n';
    out << "POINT_DATA " << g.cell_count() << '\n';
    // VTK orders points with x fastest.
    auto each = [&](auto&& f) {
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) f(i, j, k);
    };
    out << "SCALARS C double 1\nLOOKUP_TABLE default\n";
    each([&](int i, int j, int k) { out << fmt(s.C(i, j, k)) << '\n'; });
    out << "SCALARS p double 1\nLOOKUP_TABLE default\n";
    const bool has_p = s.p.size() > 0;
    const bool has_ps = s.ps.size() > 0;
    each([&](int i, int j, int k) {
        const double v = has_p ? s.p(i, j, k) : (has_ps ? s.ps(i, j) : 0.0);
        out << fmt(v) << '\n';
    });
    out << "VECTORS velocity double\n";
    each([&](int i, int j, int k) {
        out << fmt(0.5 * (s.u.u1(i, j, k) + s.u.u1(i + 1, j, k))) << ' '
            << fmt(0.5 * (s.u.u2(i, j, k) + s.u.u2(i, j + 1, k))) << ' '
            << fmt(0.5 * (s.u.u3(i, j, k) + s.u.u3(i, j, k + 1))) << '\n';
    });
    finish(out, path);
}

void write_csv(const CsvTable& t, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
    out << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size())
            throw std::invalid_argument("write_csv: row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt(row[c]);
        out << '\n';
    }
    finish(out, path);
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    CsvTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (lineno == 1) {
            t.header = std::move(cells);
            continue;
        }
        if (line.empty()) continue;
        if (cells.size() != t.header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": wrong number of columns");
        std::vector<double> row;
        for (const std::string& c : cells) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || p != c.data() + c.size())
                throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                         ": bad number '" + c + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable to_table(const EnergyReport& r) {
    CsvTable t{{"t", "E", "D", "W", "Q", "slack"}, {}};
    for (const EnergyRecord& e : r.records) t.rows.push_back({e.t, e.E, e.D, e.W, e.Q, e.slack});
    return t;
}

CsvTable to_table(const ConvergenceReport& r) {
    CsvTable t{{"eps", "err_uH", "err_u3", "err_C", "energy_slack_min", "runtime_s"}, {}};
    for (const ConvergenceRow& c : r.rows)
        t.rows.push_back({c.eps, c.err_uH, c.err_u3, c.err_C, c.energy_slack_min, c.runtime_s});
    return t;
}

ConvergenceReport sweep_from_table(const CsvTable& t) {
    if (t.header != to_table(ConvergenceReport{}).header)
        throw std::invalid_argument("sweep table: unexpected columns");
    ConvergenceReport r;
    for (const auto& row : t.rows)
        r.rows.push_back({row[0], row[1], row[2], row[3], row[4], row[5]});
    finalize_report(r);
    return r;
}

}  // namespace atmo
