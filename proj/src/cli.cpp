#include "steklov/cli.hpp"

#include "steklov/errors.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace steklov {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"geometry", {"domain", "alpha", "disk_radius"}},
        {"mesh", {"target_h", "refinements", "grading_q", "n_lateral", "n_arc", "tip_grading"}},
        {"problem", {"p", "weighted", "quadrature_order"}},
        {"solver", {"method", "eps_schedule", "restarts", "seed", "max_iterations"}},
        {"sweep", {"alphas", "include_unweighted", "include_fp", "threads"}},
        {"output", {"output_dir"}},
        {"validate", {"tolerance_scale"}},
    };
    return keys;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double elapsed(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// Typed reads with line diagnostics.
class Reader {
public:
    explicit Reader(const ConfigFile& f) : file_(f) {}

    const ConfigFile::Entry* entry(const std::string& section, const std::string& key) const {
        return file_.find(section, key);
    }

    [[noreturn]] void fail(const ConfigFile::Entry& e, const std::string& section, const std::string& key,
                           const std::string& what) const {
        throw ConfigError(fmt::format("{}:{}: key '{}' in [{}]: {}", file_.source(), e.line, key, section, what));
    }

    double real(const std::string& section, const std::string& key, double fallback) const {
        const auto* e = entry(section, key);
        return e ? parse_real(*e, section, key) : fallback;
    }

    double parse_real(const ConfigFile::Entry& e, const std::string& section, const std::string& key) const {
        return parse_real_text(e, section, key, e.value);
    }

    double parse_real_text(const ConfigFile::Entry& e, const std::string& section, const std::string& key,
                           const std::string& text) const {
        double v = 0.0;
        const char* end = text.data() + text.size();
        const auto [ptr, ec] = std::from_chars(text.data(), end, v);
        if (ec != std::errc() || ptr != end || !std::isfinite(v))
            fail(e, section, key, fmt::format("expected a finite number, got '{}'", text));
        return v;
    }

    long integer(const std::string& section, const std::string& key, long fallback, long lo, long hi) const {
        const auto* e = entry(section, key);
        if (!e) return fallback;
        long v = 0;
        const char* end = e->value.data() + e->value.size();
        const auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
        if (ec != std::errc() || ptr != end) fail(*e, section, key, fmt::format("expected an integer, got '{}'", e->value));
        if (v < lo || v > hi) fail(*e, section, key, fmt::format("value {} outside [{}, {}]", v, lo, hi));
        return v;
    }

    std::uint64_t unsigned_integer(const std::string& section, const std::string& key, std::uint64_t fallback) const {
        const auto* e = entry(section, key);
        if (!e) return fallback;
        std::uint64_t v = 0;
        const char* end = e->value.data() + e->value.size();
        const auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
        if (ec != std::errc() || ptr != end) fail(*e, section, key, fmt::format("expected an unsigned integer, got '{}'", e->value));
        return v;
    }

    bool boolean(const std::string& section, const std::string& key, bool fallback) const {
        const auto* e = entry(section, key);
        if (!e) return fallback;
        std::string v = e->value;
        std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
        if (v == "false" || v == "no" || v == "0" || v == "off") return false;
        fail(*e, section, key, fmt::format("expected true or false, got '{}'", e->value));
    }

    std::vector<double> list(const std::string& section, const std::string& key, std::vector<double> fallback) const {
        const auto* e = entry(section, key);
        if (!e) return fallback;
        std::vector<double> out;
        std::stringstream ss(e->value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            out.push_back(parse_real_text(*e, section, key, item));
        }
        return out;
    }

private:
    const ConfigFile& file_;
};

void require_positive(const Reader& r, const std::string& section, const std::string& key, double v) {
    if (!(v > 0.0)) r.fail(*r.entry(section, key), section, key, "must be positive");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string method_text(MethodKind m) { return m == MethodKind::Direct ? "direct" : "descent"; }

Mesh build_configured_mesh(const RunConfig& config) { return build_refined_mesh(config.domain, config.mesh, config.refinements); }

void record_mesh(Manifest& manifest, const RunConfig& config, const Mesh& mesh) {
    manifest.set("mesh.id", mesh.id);
    manifest.set("mesh.vertices", std::to_string(mesh.vertex_count()));
    manifest.set("mesh.triangles", std::to_string(mesh.triangle_count()));
    manifest.set("mesh.boundary_edges", std::to_string(mesh.boundary_edges.size()));
    manifest.set("mesh.h_max", mesh.h_max);
    manifest.set("mesh.h_min", mesh.h_min);
    if (config.domain.kind == DomainKind::Cusp) manifest.set("mesh.t_star", cusp_cap_intersection(config.domain));
}

void begin_manifest(Manifest& manifest, const std::string& command, const RunConfig& config) {
    manifest.set("command", command);
    for (const auto& [k, v] : config_echo(config)) manifest.set("config." + k, v);
    manifest.set("seed", std::to_string(config.solver.seed));
}

} // namespace

// ---------------------------------------------------------------- config

ConfigFile ConfigFile::parse(std::string_view text, const std::string& source) {
    ConfigFile file;
    file.source_ = source;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find_first_of("#;");
        const std::string s = trim(hash == std::string::npos ? std::string_view(raw) : std::string_view(raw).substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(fmt::format("{}:{}: unterminated section header '{}'", source, line, s));
            section = trim(std::string_view(s).substr(1, s.size() - 2));
            if (!known_keys().contains(section))
                throw ConfigError(fmt::format("{}:{}: unknown section [{}]", source, line, section));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected key = value, got '{}'", source, line, s));
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const std::string value = trim(std::string_view(s).substr(eq + 1));
        if (section.empty()) throw ConfigError(fmt::format("{}:{}: key '{}' appears before any [section]", source, line, key));
        if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", source, line));
        if (!known_keys().at(section).contains(key))
            throw ConfigError(fmt::format("{}:{}: unknown key '{}' in [{}]", source, line, key, section));
        if (value.empty()) throw ConfigError(fmt::format("{}:{}: key '{}' in [{}] has no value", source, line, key, section));
        const auto [it, inserted] = file.entries_.emplace(section + "." + key, Entry{value, line});
        if (!inserted)
            throw ConfigError(fmt::format("{}:{}: key '{}' in [{}] already set on line {}", source, line, key, section,
                                          it->second.line));
    }
    return file;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
    const auto it = entries_.find(section + "." + key);
    return it == entries_.end() ? nullptr : &it->second;
}

RunConfig resolve_config(const ConfigFile& file) {
    const Reader r(file);
    RunConfig c;

    std::string domain = "cusp";
    if (const auto* e = r.entry("geometry", "domain")) {
        domain = e->value;
        if (domain != "cusp" && domain != "disk") r.fail(*e, "geometry", "domain", fmt::format("expected cusp or disk, got '{}'", domain));
    }
    if (domain == "disk") {
        c.domain = DomainSpec::disk(r.real("geometry", "disk_radius", 1.0));
        c.mesh.n_arc = 64;
        c.mesh.target_h = 0.2;
        if (r.entry("geometry", "disk_radius")) require_positive(r, "geometry", "disk_radius", c.domain.disk_radius);
    } else {
        c.alpha_given = r.entry("geometry", "alpha") != nullptr;
        c.domain = DomainSpec::cusp(r.real("geometry", "alpha", 2.0));
    }

    c.mesh.target_h = r.real("mesh", "target_h", c.mesh.target_h);
    if (r.entry("mesh", "target_h")) require_positive(r, "mesh", "target_h", c.mesh.target_h);
    c.mesh.grading_q = r.real("mesh", "grading_q", c.mesh.grading_q);
    if (r.entry("mesh", "grading_q") && c.mesh.grading_q < 1.0)
        r.fail(*r.entry("mesh", "grading_q"), "mesh", "grading_q", "must be at least 1");
    c.mesh.tip_grading = r.real("mesh", "tip_grading", c.mesh.tip_grading);
    if (r.entry("mesh", "tip_grading")) require_positive(r, "mesh", "tip_grading", c.mesh.tip_grading);
    c.mesh.n_lateral = static_cast<std::size_t>(r.integer("mesh", "n_lateral", static_cast<long>(c.mesh.n_lateral), 2, 100000));
    c.mesh.n_arc = static_cast<std::size_t>(r.integer("mesh", "n_arc", static_cast<long>(c.mesh.n_arc), 16, 100000));
    c.refinements = static_cast<int>(r.integer("mesh", "refinements", 0, 0, 8));

    c.problem.p = r.real("problem", "p", 2.0);
    if (r.entry("problem", "p") && !(c.problem.p > 1.0)) r.fail(*r.entry("problem", "p"), "problem", "p", "must exceed 1");
    c.problem.weighted = r.boolean("problem", "weighted", true);
    c.problem.quadrature_order = static_cast<int>(r.integer("problem", "quadrature_order", 2, 1, 5));

    if (const auto* e = r.entry("solver", "method")) {
        if (e->value == "descent") c.method = MethodKind::Descent;
        else if (e->value == "direct") c.method = MethodKind::Direct;
        else r.fail(*e, "solver", "method", fmt::format("expected descent or direct, got '{}'", e->value));
        if (c.method == MethodKind::Direct && c.problem.p != 2.0) r.fail(*e, "solver", "method", "direct requires p = 2");
    }
    c.solver.eps_schedule = r.list("solver", "eps_schedule", c.solver.eps_schedule);
    for (double eps : c.solver.eps_schedule)
        if (!(eps > 0.0)) r.fail(*r.entry("solver", "eps_schedule"), "solver", "eps_schedule", "entries must be positive");
    c.solver.restarts = static_cast<int>(r.integer("solver", "restarts", c.solver.restarts, 0, 1000));
    c.solver.seed = r.unsigned_integer("solver", "seed", c.solver.seed);
    c.solver.max_iterations = static_cast<int>(r.integer("solver", "max_iterations", c.solver.max_iterations, 1, 100000000));

    c.alphas = r.list("sweep", "alphas", c.alphas);
    for (double a : c.alphas)
        if (!(a > 1.0)) r.fail(*r.entry("sweep", "alphas"), "sweep", "alphas", fmt::format("alpha {} must exceed 1", a));
    c.include_unweighted = r.boolean("sweep", "include_unweighted", true);
    c.include_fp = r.boolean("sweep", "include_fp", true);
    c.threads = static_cast<int>(r.integer("sweep", "threads", 1, 1, 256));

    if (const auto* e = r.entry("output", "output_dir")) c.output_dir = e->value;
    c.tolerance_scale = r.real("validate", "tolerance_scale", 1.0);
    if (c.tolerance_scale < 0.0) r.fail(*r.entry("validate", "tolerance_scale"), "validate", "tolerance_scale", "must be non-negative");
    return c;
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> out;
    const bool disk = c.domain.kind == DomainKind::DiskValidation;
    out.emplace_back("geometry.domain", disk ? "disk" : "cusp");
    if (disk) out.emplace_back("geometry.disk_radius", format_real(c.domain.disk_radius));
    else out.emplace_back("geometry.alpha", format_real(c.domain.alpha));
    out.emplace_back("mesh.target_h", format_real(c.mesh.target_h));
    out.emplace_back("mesh.refinements", std::to_string(c.refinements));
    out.emplace_back("mesh.grading_q", format_real(c.mesh.grading_q));
    out.emplace_back("mesh.n_lateral", std::to_string(c.mesh.n_lateral));
    out.emplace_back("mesh.n_arc", std::to_string(c.mesh.n_arc));
    out.emplace_back("mesh.tip_grading", format_real(c.mesh.tip_grading));
    out.emplace_back("problem.p", format_real(c.problem.p));
    out.emplace_back("problem.weighted", bool_text(c.problem.weighted));
    out.emplace_back("problem.quadrature_order", std::to_string(c.problem.quadrature_order));
    out.emplace_back("solver.method", method_text(c.method));
    std::string eps;
    for (double e : c.solver.eps_schedule) eps += (eps.empty() ? "" : ",") + format_real(e);
    out.emplace_back("solver.eps_schedule", eps);
    out.emplace_back("solver.restarts", std::to_string(c.solver.restarts));
    out.emplace_back("solver.seed", std::to_string(c.solver.seed));
    out.emplace_back("solver.max_iterations", std::to_string(c.solver.max_iterations));
    std::string alphas;
    for (double a : c.alphas) alphas += (alphas.empty() ? "" : ",") + format_real(a);
    out.emplace_back("sweep.alphas", alphas);
    out.emplace_back("sweep.include_unweighted", bool_text(c.include_unweighted));
    out.emplace_back("sweep.include_fp", bool_text(c.include_fp));
    out.emplace_back("sweep.threads", std::to_string(c.threads));
    out.emplace_back("output.output_dir", c.output_dir.generic_string());
    out.emplace_back("validate.tolerance_scale", format_real(c.tolerance_scale));
    return out;
}

// ---------------------------------------------------------------- writers

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string vtk_text(const Mesh& mesh, const std::string& title, const std::string& field_name,
                     std::span<const double> field) {
    if (!field.empty()) check_field(mesh, field);
    std::string s = "# vtk DataFile Version 3.0\n";
    s += title.empty() ? "steklov-cusp" : title;
    s += "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    s += fmt::format("POINTS {} double\n", mesh.vertex_count());
    for (const Point& p : mesh.vertices) s += fmt::format("{} {} 0\n", format_real(p.x), format_real(p.y));
    s += fmt::format("CELLS {} {}\n", mesh.triangle_count(), 4 * mesh.triangle_count());
    for (const auto& t : mesh.triangles) s += fmt::format("3 {} {} {}\n", t[0], t[1], t[2]);
    s += fmt::format("CELL_TYPES {}\n", mesh.triangle_count());
    for (std::size_t k = 0; k < mesh.triangle_count(); ++k) s += "5\n";
    if (!field.empty()) {
        s += fmt::format("POINT_DATA {}\nSCALARS {} double 1\nLOOKUP_TABLE default\n", mesh.vertex_count(),
                         field_name.empty() ? "u" : field_name);
        for (double v : field) s += format_real(v) + "\n";
    }
    return s;
}

std::string vertices_csv(const Mesh& mesh) {
    std::string s = "vertex,x,y,boundary\n";
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
        s += fmt::format("{},{},{},{}\n", v, format_real(mesh.vertices[v].x), format_real(mesh.vertices[v].y),
                         mesh.is_boundary_vertex[v] ? 1 : 0);
    return s;
}

std::string edges_csv(const Mesh& mesh) {
    std::string s = "edge,v0,v1,tag,length,weight_0,weight_1\n";
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const auto& e = mesh.boundary_edges[k];
        s += fmt::format("{},{},{},{},{},{},{}\n", k, e.v[0], e.v[1], to_string(e.tag), format_real(e.length),
                         format_real(e.weight_samples[0]), format_real(e.weight_samples[1]));
    }
    return s;
}

void Manifest::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : lines_)
        if (k == key) {
            v = value;
            return;
        }
    lines_.emplace_back(key, value);
}

void Manifest::write(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    set("file." + name, fmt::format("fnv1a64:{:016x} bytes:{}", fnv1a64(content), content.size()));
}

std::filesystem::path Manifest::finish(const std::string& status, const std::string& failure) {
    set("status", status);
    if (!failure.empty()) {
        std::string flat = failure;
        std::replace(flat.begin(), flat.end(), '\n', ' ');
        set("failure", flat);
    }
    std::string text;
    for (const auto& [k, v] : lines_) text += k + "=" + v + "\n";
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / "manifest.txt";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    return path;
}

// ---------------------------------------------------------------- commands

int cmd_mesh(const RunConfig& config, std::ostream& out) {
    Manifest manifest(config.output_dir);
    begin_manifest(manifest, "mesh", config);
    try {
        auto t0 = std::chrono::steady_clock::now();
        const Mesh mesh = build_configured_mesh(config);
        manifest.set("time.mesh", elapsed(t0));
        record_mesh(manifest, config, mesh);

        t0 = std::chrono::steady_clock::now();
        manifest.write("mesh.vtk", vtk_text(mesh, mesh.id));
        manifest.write("vertices.csv", vertices_csv(mesh));
        manifest.write("edges.csv", edges_csv(mesh));
        manifest.set("time.write", elapsed(t0));
        manifest.finish("ok");
        fmt::print(out, "mesh {}: {} vertices, {} triangles, h_max {}\n", mesh.id, mesh.vertex_count(),
                   mesh.triangle_count(), format_real(mesh.h_max));
        return kExitOk;
    } catch (const std::exception& e) {
        manifest.finish("failed", e.what());
        throw;
    }
}

int cmd_solve(const RunConfig& config, std::ostream& out) {
    Manifest manifest(config.output_dir);
    begin_manifest(manifest, "solve", config);
    try {
        auto t0 = std::chrono::steady_clock::now();
        const Mesh mesh = build_configured_mesh(config);
        manifest.set("time.mesh", elapsed(t0));
        record_mesh(manifest, config, mesh);

        t0 = std::chrono::steady_clock::now();
        EigenResult r;
        std::string failure;
        try {
            if (config.method == MethodKind::Direct) {
                r = solve_p2(mesh, config.problem.weighted);
                r.converged = true;
                r.constraint_residual = std::abs(constraint_functional(mesh, config.problem, r.u));
                r.weakform_residual = weakform_residual(mesh, config.problem, r.u, r.lambda);
            } else {
                r = solve_p(mesh, config.problem, config.solver);
            }
        } catch (const SolverError& e) {
            failure = e.what();
            r = EigenResult{};
            r.lambda = std::numeric_limits<double>::quiet_NaN();
            r.constraint_residual = std::numeric_limits<double>::quiet_NaN();
            r.weakform_residual = e.residual() >= 0.0 ? e.residual() : std::numeric_limits<double>::quiet_NaN();
            r.converged = false;
        }
        manifest.set("time.solve", elapsed(t0));

        t0 = std::chrono::steady_clock::now();
        std::string csv = "alpha,p,weighted,h_max,lambda,iterations,constraint_residual,weakform_residual,converged\n";
        const double alpha = config.domain.kind == DomainKind::Cusp ? config.domain.alpha
                                                                     : std::numeric_limits<double>::quiet_NaN();
        csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", format_real(alpha), format_real(config.problem.p),
                           bool_text(config.problem.weighted), format_real(mesh.h_max), format_real(r.lambda),
                           r.iterations, format_real(r.constraint_residual), format_real(r.weakform_residual),
                           bool_text(r.converged));
        manifest.write("solve.csv", csv);
        if (!r.u.empty()) manifest.write("eigenfunction.vtk", vtk_text(mesh, mesh.id, "u", r.u));
        if (!r.restart_lambdas.empty()) {
            std::string all;
            for (double l : r.restart_lambdas) all += (all.empty() ? "" : ",") + format_real(l);
            manifest.set("solve.restart_lambdas", all);
        }
        manifest.set("solve.max_constraint_residual", r.max_constraint_residual);
        manifest.set("time.write", elapsed(t0));

        if (!r.converged) {
            manifest.finish("not-converged", failure.empty() ? "iteration cap reached" : failure);
            fmt::print(out, "solve did not converge: {}\n", failure.empty() ? "iteration cap reached" : failure);
            return kExitNonConvergence;
        }
        manifest.finish("ok");
        fmt::print(out, "lambda {} ({} iterations, weak-form residual {})\n", format_real(r.lambda), r.iterations,
                   format_real(r.weakform_residual));
        return kExitOk;
    } catch (const std::exception& e) {
        manifest.finish("failed", e.what());
        throw;
    }
}

int cmd_sweep(const RunConfig& config, std::ostream& out) {
    Manifest manifest(config.output_dir);
    begin_manifest(manifest, "sweep", config);
    try {
        SweepConfig sc;
        sc.problem = config.problem;
        sc.mesh = config.mesh;
        sc.solver = config.solver;
        sc.refinements = config.refinements;
        sc.include_unweighted = config.include_unweighted;
        sc.include_fp = config.include_fp;
        sc.threads = config.threads;

        const auto t0 = std::chrono::steady_clock::now();
        const SweepReport report = alpha_sweep(sc, config.alphas);
        manifest.set("time.sweep", elapsed(t0));
        manifest.set("sweep.trend_threshold", report.trend_threshold);
        manifest.set("sweep.trend_rule",
                     "stable if the two finest levels differ by at most the threshold, decaying-to-zero if "
                     "otherwise strictly decreasing over at least 3 levels, else undetermined");

        std::string csv = "alpha,p,weighted,level,h_max,lambda,fp_constant,iterations,converged,trend\n";
        int failed = 0;
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const SweepRow& row = report.rows[i];
            csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", format_real(row.alpha), format_real(row.p),
                               bool_text(row.weighted), row.level, format_real(row.h_max), format_real(row.lambda),
                               format_real(row.fp_constant), row.iterations, bool_text(row.converged),
                               to_string(row.trend));
            manifest.set(fmt::format("row.{}.mesh_id", i), row.mesh_id);
            if (!row.error.empty()) manifest.set(fmt::format("row.{}.error", i), row.error);
            if (!row.converged) ++failed;
        }
        manifest.write("sweep.csv", csv);
        manifest.set("sweep.rows", std::to_string(report.rows.size()));
        manifest.set("sweep.failed_rows", std::to_string(failed));
        manifest.finish("ok");
        fmt::print(out, "sweep: {} rows, {} not converged\n", report.rows.size(), failed);
        return kExitOk;
    } catch (const std::exception& e) {
        manifest.finish("failed", e.what());
        throw;
    }
}

std::vector<ValidationCheck> run_validation(double scale) {
    std::vector<ValidationCheck> checks;
    auto add = [&](std::string name, double expected, double actual, double tolerance) {
        const double tol = tolerance * scale;
        checks.push_back({std::move(name), expected, actual, tol, std::abs(actual - expected) <= tol});
    };

    // Unit disk, p = 2: Steklov spectrum 0, 1, 1, 2, 2, ...
    {
        MeshParams mp;
        mp.n_arc = 64;
        mp.target_h = 0.2;
        const Mesh disk = build_refined_mesh(DomainSpec::disk(1.0), mp, 2);
        const EigenResult r = solve_p2(disk, false);
        add("disk_p2_lambda", 1.0, r.lambda, 0.01);
        // both 1 and 2 are double eigenvalues
        add("disk_p2_pair_gap_1", 0.0, std::abs(r.spectrum[1] - r.spectrum[0]) / r.spectrum[0], 0.01);
        add("disk_p2_pair_gap_2", 0.0, std::abs(r.spectrum[3] - r.spectrum[2]) / r.spectrum[2], 0.01);
    }

    const Mesh cusp = build_mesh(DomainSpec::cusp(1.5), MeshParams{});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto random_field = [&] {
        Vector u(cusp.vertex_count());
        for (double& x : u) x = unif(rng);
        return u;
    };

    for (double p : {1.5, 2.0, 3.0}) {
        double worst = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            Vector u = random_field();
            const Vector g = energy_gradient(cusp, p, 1e-8, u);
            double gmax = 0.0, emax = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double h = 1e-6, keep = u[i];
                u[i] = keep + h;
                const double ep = energy(cusp, p, 1e-8, u);
                u[i] = keep - h;
                const double em = energy(cusp, p, 1e-8, u);
                u[i] = keep;
                gmax = std::max(gmax, std::abs(g[i]));
                emax = std::max(emax, std::abs(g[i] - (ep - em) / (2.0 * h)));
            }
            worst = std::max(worst, emax / gmax);
        }
        add(fmt::format("gradient_fd_p{}", p), 0.0, worst, 1e-5);
    }

    for (double p : {1.5, 3.0}) {
        ProblemConfig cfg;
        cfg.p = p;
        const Vector u = random_field();
        const double base = rayleigh(cusp, cfg, u);
        double worst = 0.0;
        for (double c : {-3.5, 0.01, 250.0}) {
            Vector v = u;
            for (double& x : v) x *= c;
            worst = std::max(worst, std::abs(rayleigh(cusp, cfg, v) - base) / base);
        }
        add(fmt::format("rayleigh_homogeneity_p{}", p), 0.0, worst, 1e-12);

        const BoundaryQuadrature q = BoundaryQuadrature::build(cusp, true);
        const double bis = shift_root(q, p, u, ShiftMethod::Bisection);
        const double newton = shift_root(q, p, u, ShiftMethod::Newton);
        add(fmt::format("shift_root_agreement_p{}", p), bis, newton, 1e-10);
    }

    {
        Mesh square = triangulate(make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 0.1, 1.0);
        square = refine_uniform(refine_uniform(square));
        const FpResult fp = fp_pencil(square, false, FpConstraint::ZeroMean);
        add("square_fp_constant", 1.0 / std::numbers::pi, fp.constant, 0.01 / std::numbers::pi);
    }
    return checks;
}

int cmd_validate(const RunConfig& config, std::ostream& out) {
    Manifest manifest(config.output_dir);
    begin_manifest(manifest, "validate", config);
    try {
        const auto t0 = std::chrono::steady_clock::now();
        const auto checks = run_validation(config.tolerance_scale);
        manifest.set("time.validate", elapsed(t0));
        std::string csv = "check,expected,actual,tolerance,passed\n";
        int failed = 0;
        for (const auto& c : checks) {
            csv += fmt::format("{},{},{},{},{}\n", c.name, format_real(c.expected), format_real(c.actual),
                               format_real(c.tolerance), bool_text(c.passed));
            fmt::print(out, "{} {}\n", c.passed ? "PASS" : "FAIL", c.name);
            if (!c.passed) ++failed;
        }
        manifest.write("validate.csv", csv);
        manifest.set("validate.failed", std::to_string(failed));
        if (failed > 0) {
            manifest.finish("validation-failed", fmt::format("{} of {} checks failed", failed, checks.size()));
            return kExitValidation;
        }
        manifest.finish("ok");
        return kExitOk;
    } catch (const std::exception& e) {
        manifest.finish("failed", e.what());
        throw;
    }
}

int run_command(const CliRequest& request, std::ostream& out, std::ostream& err) {
    try {
        static const std::set<std::string> commands{"mesh", "solve", "sweep", "validate"};
        if (!commands.contains(request.command)) throw ConfigError(fmt::format("unknown command '{}'", request.command));
        ConfigFile file;
        if (request.config) file = ConfigFile::load(*request.config);
        else if (request.command != "validate") throw ConfigError("--config is required");
        RunConfig config = resolve_config(file);
        if (request.seed) config.solver.seed = *request.seed;
        if (request.out) config.output_dir = *request.out;

        if ((request.command == "mesh" || request.command == "solve") && config.domain.kind == DomainKind::Cusp &&
            !config.alpha_given) {
            throw ConfigError(fmt::format("{}: missing key 'alpha' in [geometry] (required for domain = cusp)",
                                          file.source()));
        }

        if (request.command == "mesh") return cmd_mesh(config, out);
        if (request.command == "solve") return cmd_solve(config, out);
        if (request.command == "sweep") return cmd_sweep(config, out);
        return cmd_validate(config, out);
    } catch (const ConfigError& e) {
        fmt::print(err, "config error: {}\n", e.what());
        return kExitConfig;
    } catch (const GeometryError& e) {
        fmt::print(err, "geometry error: {}\n", e.what());
        return kExitGeometry;
    } catch (const MeshError& e) {
        fmt::print(err, "mesh error: {}\n", e.what());
        return kExitGeometry;
    } catch (const DomainError& e) {
        fmt::print(err, "geometry error: {}\n", e.what());
        return kExitGeometry;
    } catch (const SolverError& e) {
        fmt::print(err, "solver error: {}\n", e.what());
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        // I/O and other environment failures
        fmt::print(err, "error: {}\n", e.what());
        return kExitConfig;
    }
}

} // namespace steklov
