#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rswave_cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"rswave: observability and control experiments for stochastic wave equations"};
    std::string command, config;
    app.add_option("command", command, "geometry | carleman-verify | observability | control | energy-check")
        ->required()
        ->check(CLI::IsMember(rswave::cli::command_names()));
    app.add_option("config", config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : rswave::cli::kExitUsage;
    }
    return rswave::cli::run_command(command, config, std::cerr).code;
}
