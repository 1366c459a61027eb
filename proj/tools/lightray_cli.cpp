#include "lightray/cli/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Gaussian beams, light-ray transforms and their inversion on [0,T] x M"};
    app.require_subcommand(1, 1);
    lightray::RunOptions opt;
    std::uint64_t seed = 0;

    for (const char* name : {"beam", "forward", "invert", "gauge-check", "wavesim", "all"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "experiment config (JSON)");
        sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_option("--threads", opt.threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
        sub->add_flag("--strict", opt.strict, "exit with status 1 when a threshold is violated");
    }
    CLI11_PARSE(app, argc, argv);
    opt.subcommand = app.get_subcommands().front()->get_name();
    if (app.get_subcommands().front()->count("--seed") > 0) opt.seed = seed;
    return lightray::run_main(opt, std::cerr);
}
