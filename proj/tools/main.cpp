/* main.cpp
 *
 * cstarlab command line tool.  Four subcommands: the randomized homotopy
 * sweep, the two counterexample harnesses, and a verifier that re-checks a
 * previously written report or replay file.  All knobs live in a text
 * config; the flags below override individual entries after loading.
 */

#include <CLI11.hpp>

#include <cstar/experiments.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

int log_level() {
    const char* raw = std::getenv("CSTARLAB_LOG");
    if (raw == nullptr || *raw == '\0') return 0;
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0') return 1;  // any non-numeric value: on
    return static_cast<int>(v);
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    int64_t seed = -1;
    int64_t instances = -1;
    std::string negative_control;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "config file to load")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "override run.seed");
    cmd->add_option("--out", f.out_dir, "override run.out");
    cmd->add_option("--instances", f.instances, "override run.instances")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--negative-control", f.negative_control,
                    "none, weak-gap, or loose-nu");
}

// Load + override.  Config parse errors share exit code 2 with validation
// failures; the caller turns the exception into that code.
cstar::ExperimentConfig resolve_config(const CommonFlags& f) {
    cstar::ExperimentConfig cfg;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in.good())
            throw std::runtime_error("cannot open config file: " + f.config_path);
        cfg = cstar::load_config(in);
    }
    if (f.seed >= 0) cfg.seed = static_cast<uint64_t>(f.seed);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.instances >= 0) cfg.instances = static_cast<int>(f.instances);
    if (!f.negative_control.empty()) cfg.negative_control = f.negative_control;
    if (log_level() >= 1) {
        std::cerr << "config:\n" << cstar::config_to_json(cfg).dump(2) << "\n";
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cstarlab: homotopy sweeps and obstruction certificates"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string report_path;

    CLI::App* homotopy =
        app.add_subcommand("homotopy", "randomized short-path sweep");
    add_common(homotopy, flags);
    CLI::App* cx_interval = app.add_subcommand(
        "cx-interval", "staircase obstruction certificates on [0,1]");
    add_common(cx_interval, flags);
    CLI::App* cx_circle = app.add_subcommand(
        "cx-circle", "periodic chains and winding obstructions on the circle");
    add_common(cx_circle, flags);
    CLI::App* verify =
        app.add_subcommand("verify", "re-check a report or replay file");
    verify->add_option("report", report_path, "report or replay JSON")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return cstar::cmd_verify(report_path);
        const cstar::ExperimentConfig cfg = resolve_config(flags);
        if (homotopy->parsed()) return cstar::cmd_homotopy(cfg);
        if (cx_interval->parsed()) return cstar::cmd_counterexample_interval(cfg);
        if (cx_circle->parsed()) return cstar::cmd_counterexample_circle(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cstar::kExitConfig;
    }
    return cstar::kExitConfig;  // unreachable with require_subcommand(1)
}
