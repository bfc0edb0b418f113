// SPDX-License-Identifier: Apache-2.0
// mmasim_cli: check | simulate | estimate | pointprocess

#include <iostream>

#include <CLI11.hpp>

#include "mmasim/cli.hpp"

int main(int argc, char** argv)
{
    using namespace mmasim::cli;
    CLI::App app{"Mixed moving average simulation and functional regular variation diagnostics"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out;
    std::string paths;

    auto add_common = [&](CLI::App* s, bool reads_paths) {
        s->add_option("--config", o.config, "experiment configuration (JSON)")->required();
        s->add_option("--out", out, "output directory (overrides output_dir)");
        s->add_option("--seed", seed, "master seed (overrides ensemble.seed)");
        s->add_option("--threads", threads, "worker threads (outputs do not depend on it)");
        if (reads_paths)
            s->add_option("--paths", paths, "directory with a simulate manifest (default: output directory)");
    };
    auto* check = app.add_subcommand("check", "evaluate the applicable integrability conditions");
    add_common(check, false);
    auto* sim = app.add_subcommand("simulate", "simulate an ensemble of paths on [0, 1]");
    add_common(sim, false);
    sim->add_flag("--force", o.force, "simulate even if preconditions fail");
    auto* est = app.add_subcommand("estimate", "tail, spectral and relative-compactness estimates");
    add_common(est, true);
    auto* pp = app.add_subcommand("pointprocess", "exceedance point set and Poisson diagnostics");
    add_common(pp, true);

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        return app.exit(e) == 0 ? 0 : Exit::invalid_config;
    }
    auto* sub = app.get_subcommands().front();
    if (sub->count("--out"))
        o.out = out;
    if (sub->count("--seed"))
        o.seed = seed;
    if (sub->count("--threads"))
        o.threads = threads;
    if (sub->get_option_no_throw("--paths") && sub->count("--paths"))
        o.paths = paths;

    if (sub == check)
        return cmd_check(o);
    if (sub == sim)
        return cmd_simulate(o);
    if (sub == est)
        return cmd_estimate(o);
    return cmd_pointprocess(o);
}
