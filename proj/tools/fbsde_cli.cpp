// SPDX-License-Identifier: Apache-2.0
#include "fbsde/fbsde.h"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options {
    std::string config;
    std::string out;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;
    bool no_cache = false;
};

int report_error(const char* what) {
    std::cerr << "fbsde: " << what << ": " << fbsde_last_error();
    const std::string pointer = fbsde_last_error_pointer();
    if (!pointer.empty()) std::cerr << " (at " << pointer << ")";
    std::cerr << "\n";
    return FBSDE_EXIT_ERROR;
}

int run(const std::string& stage, const Options& opt, const std::string& command) {
    fbsde_run* handle = nullptr;
    if (fbsde_open(opt.config.c_str(), &handle) != FBSDE_OK) return report_error("cannot load config");
    struct Closer {
        fbsde_run* h;
        ~Closer() { fbsde_close(h); }
    } closer{handle};

    if (!opt.out.empty() && fbsde_set_out_dir(handle, opt.out.c_str()) != FBSDE_OK) return report_error("bad --out");
    fbsde_set_threads(handle, opt.threads);
    if (opt.seed && fbsde_set_seed(handle, *opt.seed) != FBSDE_OK) return report_error("bad --seed");
    if (opt.no_cache) fbsde_set_cache_dir(handle, "");
    fbsde_set_command(handle, command.c_str());

    int exit_code = FBSDE_EXIT_ERROR;
    if (fbsde_run_stage(handle, stage.c_str(), &exit_code) != FBSDE_OK) return report_error(stage.c_str());
    std::cout << fbsde_summary(handle);
    std::cerr << "fbsde " << stage << ": " << fbsde_message(handle) << " (exit " << exit_code << ")\n";
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    std::string command;
    for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

    CLI::App app{"Density and tail bounds for decoupled forward-backward SDEs"};
    app.set_version_flag("--version", std::string(fbsde_version()));
    app.require_subcommand(1);

    Options opt;
    const char* stages[][2] = {
        {"check", "Check the assumptions on the measurement region (exit 3 on failure)"},
        {"solve", "Solve the backward PDE and emit the solution and constants"},
        {"simulate", "Simulate forward paths and Malliavin derivatives"},
        {"bounds", "Emit the variance constants for the requested times"},
        {"verify", "Compare densities, tails and Malliavin derivatives with the bounds (exit 2 on failure)"},
    };
    for (const auto& s : stages) {
        CLI::App* sub = app.add_subcommand(s[0], s[1]);
        sub->add_option("--config", opt.config, "YAML or JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "Output directory (default: the config's out, else ./out)");
        sub->add_option("--threads", opt.threads, "Worker threads, 0 = logical cores")->capture_default_str();
        sub->add_option("--seed", opt.seed, "Monte Carlo seed (overrides the config)");
        sub->add_flag("--no-cache", opt.no_cache, "Do not read or write the solution cache");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : FBSDE_EXIT_ERROR;
    }
    for (const auto& s : stages) {
        if (app.got_subcommand(s[0])) return run(s[0], opt, command);
    }
    return FBSDE_EXIT_ERROR;
}
