// Command-line front end: `kirchhoff run <config.json> [--out DIR]
// [--threads K] [--exploratory]`.
#include <CLI11.hpp>
#include <iostream>

#include "kirchhoff/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Constrained mountain-pass solver for the mass-normalized Kirchhoff equation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    bool exploratory = false;

    CLI::App* run = app.add_subcommand("run", "execute the experiment described by a JSON config");
    run->add_option("config", config_path, "path to the run configuration")->required();
    run->add_option("--out", out_dir, "output directory (overrides the config)");
    run->add_option("--threads", threads, "worker threads for trial sweeps and path descent");
    run->add_flag("--exploratory", exploratory, "allow masses above the certified threshold");

    CLI11_PARSE(app, argc, argv);

    kirchhoff::RunConfig cfg;
    try {
        cfg = kirchhoff::load_config(config_path);
    } catch (const kirchhoff::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    const int code = kirchhoff::run_experiment(cfg, out_dir, threads, exploratory);
    if (code != 0) std::cerr << "run finished with exit code " << code << '\n';
    return code;
}
