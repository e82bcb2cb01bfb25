#pragma once

#include "steklov/analysis.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace steklov {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitGeometry = 2,
    kExitNonConvergence = 3,
    kExitValidation = 4,
};

/// Parsed `[section]` / `key = value` text. `#` and `;` start comments.
class ConfigFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    /// Throws ConfigError with `source:line:` on malformed lines, unknown
    /// sections or keys, and duplicates.
    static ConfigFile parse(std::string_view text, const std::string& source = "<config>");
    static ConfigFile load(const std::filesystem::path& path);

    const Entry* find(const std::string& section, const std::string& key) const;
    const std::string& source() const { return source_; }

private:
    std::map<std::string, Entry> entries_;  // "section.key"
    std::string source_;
};

enum class MethodKind { Descent, Direct };

/// Every parameter a subcommand needs, with defaults filled in.
struct RunConfig {
    DomainSpec domain = DomainSpec::cusp(2.0);
    bool alpha_given = false;
    MeshParams mesh;
    int refinements = 0;
    ProblemConfig problem;
    SolverOptions solver;
    MethodKind method = MethodKind::Descent;
    std::vector<double> alphas{1.25, 1.5, 1.75, 2.0, 2.5, 3.0};
    bool include_unweighted = true;
    bool include_fp = true;
    int threads = 1;
    std::filesystem::path output_dir = "steklov-out";
    double tolerance_scale = 1.0;  // validate only; < 1 tightens every check
};

RunConfig resolve_config(const ConfigFile& file);

/// Flat key=value lines in insertion order.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& config);

/// 17 significant digits, '.' separator, no locale.
std::string format_real(double value);

std::uint64_t fnv1a64(std::string_view bytes);

/// VTK legacy ASCII unstructured grid; optional nodal scalar field.
std::string vtk_text(const Mesh& mesh, const std::string& title, const std::string& field_name = {},
                     std::span<const double> field = {});
std::string vertices_csv(const Mesh& mesh);
std::string edges_csv(const Mesh& mesh);

/// Run record. Output files go through `write`, which hashes them.
class Manifest {
public:
    explicit Manifest(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value) { set(key, format_real(value)); }
    void write(const std::string& name, const std::string& content);
    /// Writes manifest.txt; returns its path.
    std::filesystem::path finish(const std::string& status, const std::string& failure = {});
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> lines_;
};

struct CliRequest {
    std::string command;  // mesh | solve | sweep | validate
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
};

/// Runs one subcommand and maps errors to exit codes. Diagnostics go to `err`.
int run_command(const CliRequest& request, std::ostream& out, std::ostream& err);

int cmd_mesh(const RunConfig& config, std::ostream& out);
int cmd_solve(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);
int cmd_validate(const RunConfig& config, std::ostream& out);

struct ValidationCheck {
    std::string name;
    double expected;
    double actual;
    double tolerance;
    bool passed;
};

/// Built-in oracle checks; tolerances are multiplied by `tolerance_scale`.
std::vector<ValidationCheck> run_validation(double tolerance_scale);

} // namespace steklov
