#include <iostream>

#include <CLI11.hpp>

#include "gbeam/cli.hpp"
#include "gbeam/error.hpp"

int main(int argc, char** argv) {
    namespace cli = gbeam::cli;
    CLI::App app{"Ray, paraxial spreading and Gaussian-beam tools for stratified sound-speed profiles"};
    app.require_subcommand(1, 1);

    std::string scenario_path;
    std::string out_dir;
    unsigned threads = 0;
    std::string timestamp;
    for (const std::string& name : cli::kSubcommands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the scenario's out_dir)");
        sub->add_option("--threads", threads, "worker threads across the fan (0: all cores)");
        sub->add_option("--timestamp", timestamp, "ISO 8601 stamp recorded in manifest.txt");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitConfig;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    cli::Scenario scenario;
    try {
        scenario = cli::load_scenario(scenario_path);
    } catch (const gbeam::Error& e) {
        std::cerr << "gbeam " << sub << ": " << e.what() << '\n';
        return cli::kExitConfig;
    }

    cli::RunOptions options;
    if (!out_dir.empty()) options.out_dir = out_dir;
    options.threads = threads;
    if (!timestamp.empty()) options.timestamp = timestamp;
    return cli::run(sub, scenario, options, std::cout, std::cerr);
}
