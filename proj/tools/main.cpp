#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tomoscope/config.hpp"
#include "tomoscope/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<int> grid_points;
    std::optional<double> x_max;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file")->required();
    cmd->add_option("--seed", f.seed, "RNG seed (overrides config and TOMOSCOPE_SEED)");
    cmd->add_option("--out", f.out, "output directory (overrides config)");
    cmd->add_option("--threads", f.threads, "worker threads (overrides config)");
    cmd->add_option("--grid-points", f.grid_points, "quadrature grid points (overrides config)");
    cmd->add_option("--x-max", f.x_max, "quadrature half-range (overrides config)");
}

int run(const std::string& command, const CommonFlags& flags) {
    std::ifstream in(flags.config_path);
    if (!in) {
        std::cerr << "error: cannot read config file " << flags.config_path << "\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    tomoscope::config::RunConfig cfg = tomoscope::config::parse_config(buf.str(), command);
    if (flags.out) cfg.out = *flags.out;
    if (flags.threads) {
        if (*flags.threads < 1 || *flags.threads > 256)
            throw tomoscope::config::ConfigError("--threads: expected 1..256");
        cfg.threads = *flags.threads;
    }
    if (flags.grid_points) {
        if (*flags.grid_points < 3 || *flags.grid_points % 2 == 0)
            throw tomoscope::config::ConfigError("--grid-points: expected an odd count >= 3");
        cfg.numerics.grid_points = *flags.grid_points;
    }
    if (flags.x_max) {
        if (!(*flags.x_max > 0))
            throw tomoscope::config::ConfigError("--x-max: expected a positive value");
        cfg.numerics.x_max = *flags.x_max;
    }
    cfg.seed = tomoscope::runner::resolve_seed(flags.seed, cfg.seed);

    const auto bundle = tomoscope::runner::execute(cfg);
    std::printf("wrote %zu files to %s (config %s, seed %llu, %.3f s)\n", bundle.files.size(),
                bundle.dir.string().c_str(), bundle.config_hash.c_str(),
                static_cast<unsigned long long>(bundle.seed), bundle.wall_seconds);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tomoscope: spin and field tomograms of number-conserving lattice models"};
    app.require_subcommand(1);

    static const char* kCommands[] = {"spectrum", "svne",      "tomogram", "indicators",
                                      "sweep",    "correlate", "disorder"};
    static const char* kDescriptions[] = {
        "eigenvalues over a parameter grid",
        "subsystem entropy of tracked eigenstates over a sweep",
        "a single tomogram section on the quadrature grid",
        "per-section and plan-averaged indicators for one eigenstate",
        "full indicator sweep with eigenstate tracking",
        "correlation report from a sweep's CSV output",
        "indicator reliability across a frequency-disorder ladder",
    };

    CommonFlags flags[std::size(kCommands)];
    for (std::size_t i = 0; i < std::size(kCommands); ++i)
        add_common(app.add_subcommand(kCommands[i], kDescriptions[i]), flags[i]);

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < std::size(kCommands); ++i) {
        if (!app.get_subcommand(kCommands[i])->parsed()) continue;
        try {
            return run(kCommands[i], flags[i]);
        } catch (const tomoscope::config::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 1;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }
    return 1;
}
