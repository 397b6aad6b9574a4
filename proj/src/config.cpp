#include "atmo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace atmo {

RunMode parse_run_mode(std::string_view name) {
    if (name == "aniso") return RunMode::aniso;
    if (name == "hydro") return RunMode::hydro;
    if (name == "sweep") return RunMode::sweep;
    throw std::invalid_argument("unknown mode '" + std::string(name) + "' (aniso|hydro|sweep)");
}

std::string_view to_string(RunMode mode) {
    switch (mode) {
        case RunMode::aniso: return "aniso";
        case RunMode::hydro: return "hydro";
        case RunMode::sweep: return "sweep";
    }
    return "?";
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto c = s.find(',', start);
        out.push_back(trim(s.substr(start, c == std::string_view::npos ? s.npos : c - start)));
        if (c == std::string_view::npos) break;
        start = c + 1;
    }
    return out;
}

struct Entry {
    std::string value;
    int line;
};

class Reader {
public:
    Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    int line(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }
    const std::string& raw(const std::string& key) const { return entries_.at(key).value; }

    double number(std::string_view text, const std::string& key) const {
        double v = 0.0;
        const std::string t(trim(text));
        const char* b = t.data();
        const char* e = b + t.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (t.empty() || ec != std::errc() || p != e)
            throw ConfigError(key + ": expected a number, got '" + t + "'", line(key));
        return v;
    }
    void get(const std::string& key, double& out) const {
        if (has(key)) out = number(raw(key), key);
    }
    void get(const std::string& key, int& out) const {
        if (!has(key)) return;
        const double v = number(raw(key), key);
        if (v != std::floor(v) || std::abs(v) > 1e9)
            throw ConfigError(key + ": expected an integer, got '" + raw(key) + "'", line(key));
        out = static_cast<int>(v);
    }
    void get(const std::string& key, std::uint64_t& out) const {
        if (!has(key)) return;
        const std::string t(trim(raw(key)));
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
        if (t.empty() || ec != std::errc() || p != t.data() + t.size())
            throw ConfigError(key + ": expected a nonnegative integer, got '" + t + "'", line(key));
    }
    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> v;
        for (auto item : split_list(raw(key))) v.push_back(number(item, key));
        return v;
    }
    Vec3 triple(const std::string& key) const {
        const auto v = numbers(key);
        if (v.size() != 3) throw ConfigError(key + ": expected three numbers", line(key));
        return {v[0], v[1], v[2]};
    }

private:
    std::map<std::string, Entry> entries_;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> k{
        {"grid", {"nx", "ny", "nz", "lx", "ly", "h"}},
        {"phys", {"nu1", "nu2", "nu3", "f0", "coriolis_mode", "l0", "l_slope"}},
        {"diffusion", {"m11", "m12", "m13", "m22", "m23", "m33", "tensor_file"}},
        {"source", {"kind", "I", "t_s", "x_s", "hydro_pairing"}},
        {"bc", {"theta"}},
        {"init",
         {"velocity", "velocity_amplitude", "concentration", "concentration_amplitude",
          "blob_center", "blob_width"}},
        {"time", {"T", "cfl", "dt_max", "snapshot_every"}},
        {"run", {"mode", "eps_list", "output_dir", "tol", "max_iter", "seed", "advection"}},
    };
    return k;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view p) {
    std::filesystem::path path{std::string(p)};
    if (path.is_relative() && !base.empty()) path = base / path;
    return path;
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    std::map<std::string, Entry> entries;
    std::string section;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
        pos = nl == text.npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (const auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", lineno);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_keys().count(section))
                throw ConfigError("unknown section [" + section + "]", lineno);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == line.npos) throw ConfigError("expected 'key = value'", lineno);
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (section.empty()) throw ConfigError("key '" + key + "' outside a section", lineno);
        if (!known_keys().at(section).count(key))
            throw ConfigError("unknown key '" + key + "' in [" + section + "]", lineno);
        if (value.empty()) throw ConfigError(key + ": missing value", lineno);
        const std::string full = section + "." + key;
        if (entries.count(full)) throw ConfigError("duplicate key '" + key + "'", lineno);
        entries[full] = {value, lineno};
    }

    const Reader r(std::move(entries));
    RunConfig c;
    auto fail = [&](const std::string& key, const std::string& msg) {
        throw ConfigError(key + ": " + msg, r.line(key));
    };

    r.get("grid.nx", c.grid.nx);
    r.get("grid.ny", c.grid.ny);
    r.get("grid.nz", c.grid.nz);
    r.get("grid.lx", c.grid.lx);
    r.get("grid.ly", c.grid.ly);
    r.get("grid.h", c.grid.h);
    if (c.grid.nx < 4) fail("grid.nx", "needs at least 4 cells");
    if (c.grid.ny < 4) fail("grid.ny", "needs at least 4 cells");
    if (c.grid.nz < 4) fail("grid.nz", "needs at least 4 cells");
    if (!(c.grid.lx > 0.0)) fail("grid.lx", "must be positive");
    if (!(c.grid.ly > 0.0)) fail("grid.ly", "must be positive");
    if (!(c.grid.h > 0.0)) fail("grid.h", "must be positive");

    r.get("phys.nu1", c.phys.nu1);
    r.get("phys.nu2", c.phys.nu2);
    r.get("phys.nu3", c.phys.nu3);
    r.get("phys.f0", c.phys.f0);
    r.get("phys.l0", c.phys.l0);
    r.get("phys.l_slope", c.phys.l_slope);
    if (!(c.phys.nu1 > 0.0)) fail("phys.nu1", "viscosity must be positive");
    if (!(c.phys.nu2 > 0.0)) fail("phys.nu2", "viscosity must be positive");
    if (!(c.phys.nu3 > 0.0)) fail("phys.nu3", "viscosity must be positive");
    if (r.has("phys.coriolis_mode")) {
        const std::string& m = r.raw("phys.coriolis_mode");
        if (m == "f_plane")
            c.phys.coriolis_mode = CoriolisMode::f_plane;
        else if (m == "beta_plane")
            c.phys.coriolis_mode = CoriolisMode::beta_plane;
        else
            fail("phys.coriolis_mode", "expected f_plane or beta_plane, got '" + m + "'");
    }

    if (r.has("diffusion.tensor_file")) {
        for (const char* k : {"diffusion.m11", "diffusion.m12", "diffusion.m13", "diffusion.m22",
                              "diffusion.m23", "diffusion.m33"})
            if (r.has(k)) fail(k, "cannot be combined with tensor_file");
        c.tensor_file = resolve(base_dir, r.raw("diffusion.tensor_file"));
        if (!std::filesystem::exists(c.tensor_file))
            fail("diffusion.tensor_file", "file not found: " + c.tensor_file.string());
    } else {
        double m11 = 1, m12 = 0, m13 = 0, m22 = 1, m23 = 0, m33 = 1;
        r.get("diffusion.m11", m11);
        r.get("diffusion.m12", m12);
        r.get("diffusion.m13", m13);
        r.get("diffusion.m22", m22);
        r.get("diffusion.m23", m23);
        r.get("diffusion.m33", m33);
        c.m = DiffusionTensor::from_upper(m11, m12, m13, m22, m23, m33);
        double lam = 0.0;
        try {
            lam = coercivity_constant(c.m);
        } catch (const std::exception&) {
            lam = -1.0;
        }
        if (!(lam > 0.0)) {
            int line = 0;
            for (const char* k : {"diffusion.m11", "diffusion.m12", "diffusion.m13",
                                  "diffusion.m22", "diffusion.m23", "diffusion.m33"})
                line = std::max(line, r.line(k));
            throw ConfigError("diffusion tensor must be symmetric positive definite", line);
        }
    }

    if (r.has("source.kind")) {
        try {
            c.source.kind = parse_source_kind(r.raw("source.kind"));
        } catch (const std::exception& e) {
            fail("source.kind", e.what());
        }
    }
    r.get("source.I", c.source.intensity);
    r.get("source.t_s", c.source.switch_time);
    if (r.has("source.x_s")) c.source.location = r.triple("source.x_s");
    if (!(c.source.intensity >= 0.0)) fail("source.I", "intensity must be nonnegative");
    if (!(c.source.switch_time >= 0.0)) fail("source.t_s", "switch time must be nonnegative");
    for (int d = 0; d < 3; ++d) {
        const double ext = d == 0 ? c.grid.lx : (d == 1 ? c.grid.ly : c.grid.h);
        if (!(c.source.location[d] > 0.0 && c.source.location[d] < ext))
            fail("source.x_s", "location must lie inside the domain");
    }
    if (r.has("source.hydro_pairing")) {
        const std::string& v = r.raw("source.hydro_pairing");
        if (v == "delta")
            c.hydro_same_source = false;
        else if (v == "same")
            c.hydro_same_source = true;
        else
            fail("source.hydro_pairing", "expected delta or same");
    }

    if (r.has("bc.theta")) {
        const std::string v(trim(r.raw("bc.theta")));
        const auto sp = v.find_first_of(" \t");
        const std::string head = v.substr(0, sp);
        const std::string rest = sp == v.npos ? "" : std::string(trim(v.substr(sp)));
        if (head == "zero" && rest.empty()) {
            c.theta.kind = ThetaConfig::Kind::zero;
        } else if (head == "constant") {
            const auto items = split_list(rest);
            if (items.size() != 2) fail("bc.theta", "expected 'constant c1, c2'");
            c.theta.kind = ThetaConfig::Kind::constant;
            c.theta.c1 = r.number(items[0], "bc.theta");
            c.theta.c2 = r.number(items[1], "bc.theta");
        } else if (head == "file" && !rest.empty()) {
            c.theta.kind = ThetaConfig::Kind::file;
            c.theta.path = resolve(base_dir, rest);
            if (!std::filesystem::exists(c.theta.path))
                fail("bc.theta", "file not found: " + c.theta.path.string());
        } else {
            fail("bc.theta", "expected zero | constant c1, c2 | file <path>");
        }
    }

    if (r.has("init.velocity")) {
        const std::string& v = r.raw("init.velocity");
        if (v == "zero")
            c.init.velocity = VelocityPreset::zero;
        else if (v == "taylor_green_h")
            c.init.velocity = VelocityPreset::taylor_green_h;
        else if (v == "random")
            c.init.velocity = VelocityPreset::random;
        else
            fail("init.velocity", "expected zero | taylor_green_h | random, got '" + v + "'");
    }
    r.get("init.velocity_amplitude", c.init.velocity_amplitude);
    if (r.has("init.concentration")) {
        const std::string& v = r.raw("init.concentration");
        if (v == "zero")
            c.init.concentration = ConcentrationPreset::zero;
        else if (v == "gaussian_blob")
            c.init.concentration = ConcentrationPreset::gaussian_blob;
        else if (v == "random")
            c.init.concentration = ConcentrationPreset::random;
        else
            fail("init.concentration", "expected zero | gaussian_blob | random, got '" + v + "'");
    }
    r.get("init.concentration_amplitude", c.init.concentration_amplitude);
    if (r.has("init.blob_center")) c.init.blob_center = r.triple("init.blob_center");
    r.get("init.blob_width", c.init.blob_width);
    if (!(c.init.blob_width > 0.0)) fail("init.blob_width", "must be positive");

    r.get("time.T", c.T);
    r.get("time.cfl", c.cfl);
    r.get("time.dt_max", c.dt_max);
    r.get("time.snapshot_every", c.snapshot_every);
    if (!(c.T > 0.0) || !std::isfinite(c.T)) fail("time.T", "must be positive");
    if (!(c.cfl > 0.0 && c.cfl <= 1.0)) fail("time.cfl", "must lie in (0, 1]");
    if (!(c.dt_max > 0.0)) fail("time.dt_max", "must be positive");
    if (c.snapshot_every < 0) fail("time.snapshot_every", "must be nonnegative");

    if (r.has("run.mode")) {
        try {
            c.mode = parse_run_mode(r.raw("run.mode"));
        } catch (const std::exception& e) {
            fail("run.mode", e.what());
        }
    }
    if (r.has("run.eps_list")) {
        c.eps_list = r.numbers("run.eps_list");
        for (double e : c.eps_list)
            if (!(e > 0.0 && e <= 1.0)) fail("run.eps_list", "every eps must lie in (0, 1]");
    } else if (c.mode == RunMode::sweep) {
        c.eps_list = default_sweep_eps();
    }
    if (r.has("run.output_dir")) c.output_dir = resolve(base_dir, r.raw("run.output_dir"));
    r.get("run.tol", c.tol);
    r.get("run.max_iter", c.max_iter);
    r.get("run.seed", c.seed);
    if (!(c.tol > 0.0)) fail("run.tol", "must be positive");
    if (c.max_iter < 1) fail("run.max_iter", "must be at least 1");
    if (r.has("run.advection")) {
        const std::string& v = r.raw("run.advection");
        if (v == "upwind")
            c.advection = AdvectionScheme::upwind1;
        else if (v == "centered")
            c.advection = AdvectionScheme::centered2;
        else
            fail("run.advection", "expected upwind or centered");
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string(), 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

namespace {

std::vector<std::vector<double>> read_rows(const std::filesystem::path& path, std::size_t width) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != line.npos) line.resize(h);
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!ls.eof())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad number");
        if (row.empty()) continue;
        if (row.size() != width)
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(width) + " values");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

DiffusionTensor load_tensor_file(const std::filesystem::path& path, const Grid& g) {
    const auto rows = read_rows(path, 6);
    if (rows.size() != g.cell_count())
        throw std::runtime_error(path.string() + ": expected " + std::to_string(g.cell_count()) +
                                 " rows, found " + std::to_string(rows.size()));
    std::vector<Mat3> cells;
    cells.reserve(rows.size());
    for (const auto& r : rows) cells.push_back(DiffusionTensor::from_upper(r[0], r[1], r[2], r[3], r[4], r[5]));
    DiffusionTensor m(g.nx(), g.ny(), g.nz(), std::move(cells));
    coercivity_constant(m);
    return m;
}

BoundaryForcing load_theta_file(const std::filesystem::path& path, const Grid& g) {
    const auto rows = read_rows(path, 2);
    const std::size_t n = static_cast<std::size_t>(g.nx()) * g.ny();
    if (rows.size() != n)
        throw std::runtime_error(path.string() + ": expected " + std::to_string(n) + " rows, found " +
                                 std::to_string(rows.size()));
    BoundaryForcing f(g.nx(), g.ny());
    std::size_t c = 0;
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j, ++c) {
            f.theta1(i, j) = rows[c][0];
            f.theta2(i, j) = rows[c][1];
        }
    return f;
}

}  // namespace atmo
