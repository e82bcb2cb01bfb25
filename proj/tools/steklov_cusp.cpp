#include "steklov/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Steklov p-Laplacian eigenvalues on outward cuspidal domains"};
    app.require_subcommand(1, 1);

    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    for (const char* name : {"mesh", "solve", "sweep", "validate"}) {
        static const std::map<std::string, std::string> help{
            {"mesh", "build the mesh and write VTK and CSV dumps"},
            {"solve", "first nontrivial eigenvalue on one mesh"},
            {"sweep", "weighted and unweighted eigenvalues across alpha and refinement"},
            {"validate", "built-in oracle checks"},
        };
        auto* sub = app.add_subcommand(name, help.at(name));
        auto* opt = sub->add_option("--config", config, "key=value config file");
        if (std::string(name) != "validate") opt->required();
        sub->add_option("--seed", seed, "restart seed, overrides [solver] seed");
        sub->add_option("--out", out, "output directory, overrides [output] output_dir");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : steklov::kExitConfig;
    }

    auto* sub = app.get_subcommands().front();
    steklov::CliRequest request;
    request.command = sub->get_name();
    if (!config.empty()) request.config = config;
    if (sub->count("--seed") > 0) request.seed = seed;
    if (!out.empty()) request.out = out;
    return steklov::run_command(request, std::cout, std::cerr);
}
