#include "steklov/cli.hpp"
#include "steklov/errors.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <fstream>
#include <map>
#include <sstream>

using namespace steklov;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "steklov_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "run.ini";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> manifest(const fs::path& dir) {
    std::map<std::string, std::string> out;
    std::istringstream in(slurp(dir / "manifest.txt"));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

int run(const std::string& command, const fs::path& config, const fs::path& out, std::string* err = nullptr) {
    CliRequest req;
    req.command = command;
    if (!config.empty()) req.config = config;
    req.out = out;
    std::ostringstream o, e;
    const int code = run_command(req, o, e);
    if (err) *err = e.str();
    return code;
}

}

TEST_SUITE("cli") {

TEST_CASE("config parsing diagnostics") {
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[geometry]\nalpha 2\n", "x.ini"), doctest::Contains("x.ini:2"), ConfigError);
    CHECK_THROWS_WITH_AS(ConfigFile::parse("alpha = 2\n"), doctest::Contains("before any [section]"), ConfigError);
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[nope]\n"), doctest::Contains("unknown section"), ConfigError);
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[mesh]\nalpha = 2\n"), doctest::Contains("unknown key 'alpha'"), ConfigError);
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[problem]\np = 2\np = 3\n"), doctest::Contains("already set on line 2"), ConfigError);

    const ConfigFile bad = ConfigFile::parse("# comment\n[problem]\np = two\n", "c.ini");
    CHECK_THROWS_WITH_AS(resolve_config(bad), doctest::Contains("c.ini:3: key 'p' in [problem]"), ConfigError);
    CHECK_THROWS_AS(resolve_config(ConfigFile::parse("[problem]\np = 1\n")), ConfigError);
    CHECK_THROWS_AS(resolve_config(ConfigFile::parse("[geometry]\ndomain = torus\n")), ConfigError);
    CHECK_THROWS_AS(resolve_config(ConfigFile::parse("[problem]\np = 3\n[solver]\nmethod = direct\n")), ConfigError);

    const RunConfig c = resolve_config(ConfigFile::parse(
        "[geometry]\nalpha = 1.75 ; inline comment\n[mesh]\nrefinements = 2\n[problem]\nweighted = no\n"
        "[solver]\neps_schedule = 1e-2, 1e-5\nseed = 42\n[sweep]\nalphas = 1.5,2.5\n"));
    CHECK(c.domain.alpha == 1.75);
    CHECK(c.refinements == 2);
    CHECK_FALSE(c.problem.weighted);
    CHECK(c.solver.eps_schedule == std::vector<double>{1e-2, 1e-5});
    CHECK(c.solver.seed == 42);
    CHECK(c.alphas == std::vector<double>{1.5, 2.5});
}

TEST_CASE("number formatting") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(1.0) == "1");
    CHECK(std::stod(format_real(-2.5000000000000001e-300)) == -2.5000000000000001e-300);
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("mesh command on the disk") {
    const fs::path dir = scratch("mesh_disk");
    const fs::path cfg = write_config(dir, "[geometry]\ndomain = disk\n");
    REQUIRE(run("mesh", cfg, dir / "out") == kExitOk);
    auto m = manifest(dir / "out");
    CHECK(m["status"] == "ok");
    for (const char* f : {"mesh.vtk", "vertices.csv", "edges.csv"}) {
        CHECK(fs::exists(dir / "out" / f));
        const std::string content = slurp(dir / "out" / f);
        CHECK(m[std::string("file.") + f].find(fmt::format("{:016x}", fnv1a64(content))) != std::string::npos);
    }
    CHECK(m["mesh.boundary_edges"] == "64");
    CHECK(slurp(dir / "out" / "mesh.vtk").starts_with("# vtk DataFile Version 3.0\n"));
}

TEST_CASE("mesh command records the junction height") {
    const fs::path dir = scratch("mesh_cusp");
    const fs::path cfg = write_config(dir, "[geometry]\ndomain = cusp\nalpha = 2\n");
    REQUIRE(run("mesh", cfg, dir / "out") == kExitOk);
    const double recorded = std::stod(manifest(dir / "out")["mesh.t_star"]);
    CHECK(std::abs(recorded - cusp_cap_intersection(DomainSpec::cusp(2.0))) <= 1e-12);
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch("exit_codes");
    std::string err;
    CHECK(run("mesh", write_config(dir, "[geometry]\ndomain = cusp\n"), dir / "a", &err) == kExitConfig);
    CHECK(err.find("'alpha'") != std::string::npos);
    CHECK(run("solve", dir / "missing.ini", dir / "b") == kExitConfig);
    CHECK(run("frobnicate", {}, dir / "c") == kExitConfig);
    CHECK(run("mesh", write_config(dir, "[geometry]\nalpha = 0.5\n"), dir / "d", &err) == kExitGeometry);
    // non-convergence: an iteration cap of one step
    const fs::path cap = write_config(dir, "[geometry]\nalpha = 1.5\n[problem]\np = 3\n[solver]\nmax_iterations = 1\nrestarts = 0\n");
    CHECK(run("solve", cap, dir / "e") == kExitNonConvergence);
    CHECK(slurp(dir / "e" / "solve.csv").find(",false\n") != std::string::npos);
    CHECK(manifest(dir / "e")["status"] == "not-converged");
}

TEST_CASE("solve is deterministic") {
    const fs::path dir = scratch("solve_det");
    const fs::path cfg = write_config(dir, "[geometry]\nalpha = 1.5\n[problem]\np = 3\n[solver]\nrestarts = 1\nseed = 4\n");
    REQUIRE(run("solve", cfg, dir / "a") == kExitOk);
    REQUIRE(run("solve", cfg, dir / "b") == kExitOk);
    CHECK(slurp(dir / "a" / "solve.csv") == slurp(dir / "b" / "solve.csv"));
    const std::string csv = slurp(dir / "a" / "solve.csv");
    CHECK(csv.starts_with("alpha,p,weighted,h_max,lambda,iterations,constraint_residual,weakform_residual,converged\n"));
    CHECK(fs::exists(dir / "a" / "eigenfunction.vtk"));
}

TEST_CASE("disk solve returns lambda near one") {
    const fs::path dir = scratch("solve_disk");
    const fs::path cfg = write_config(dir, "[geometry]\ndomain = disk\n[mesh]\nrefinements = 2\n[problem]\nweighted = false\n[solver]\nmethod = direct\n");
    REQUIRE(run("solve", cfg, dir / "o") == kExitOk);
    std::istringstream in(slurp(dir / "o" / "solve.csv"));
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    std::vector<std::string> cells;
    std::stringstream rs(row);
    for (std::string c; std::getline(rs, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 9);
    CHECK(std::abs(std::stod(cells[4]) - 1.0) < 0.01);
}

TEST_CASE("sweep csv") {
    const fs::path dir = scratch("sweep");
    const fs::path cfg = write_config(dir, "[mesh]\nrefinements = 2\n[solver]\nrestarts = 0\n[sweep]\nalphas = 1.5\ninclude_unweighted = false\n");
    REQUIRE(run("sweep", cfg, dir / "o") == kExitOk);
    std::istringstream in(slurp(dir / "o" / "sweep.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "alpha,p,weighted,level,h_max,lambda,fp_constant,iterations,converged,trend");
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(line.ends_with(",true,stable"));
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("validate") {
    const fs::path dir = scratch("validate");
    REQUIRE(run("validate", {}, dir / "ok") == kExitOk);
    const std::string csv = slurp(dir / "ok" / "validate.csv");
    const auto checks = run_validation(1.0);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == checks.size() + 1);

    const fs::path cfg = write_config(dir, "[validate]\ntolerance_scale = 0\n");
    CHECK(run("validate", cfg, dir / "bad") == kExitValidation);
    CHECK(manifest(dir / "bad")["status"] == "validation-failed");
}

}
