// Batch experiment runner. Each verb loads an optional JSON config, applies
// the command-line overrides and hands off to the experiments layer.
//
// Exit codes: 0 success, 1 config error, 2 numerical-invariant failure,
// 3 I/O failure.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pairtunnel/experiments.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config (JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "output directory");
    auto* seed = cmd->add_option("--seed", "RNG seed");
    seed->each([&opts](const std::string& s) { opts.seed = std::stoull(s); });
    auto* workers = cmd->add_option("--workers", "worker threads");
    workers->each([&opts](const std::string& s) { opts.workers = std::stoi(s); });
}

pairtunnel::ExperimentConfig load_config(const CommonOpts& opts) {
    pairtunnel::ExperimentConfig cfg;
    if (!opts.config_path.empty())
        cfg = pairtunnel::ExperimentConfig::from_file(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.workers) cfg.workers = *opts.workers;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"composite-pair tunneling experiments"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto* validate = app.add_subcommand("validate", "fast invariant suite");
    auto* sweep = app.add_subcommand("sweep", "alpha sweep of the quadrant probabilities");
    auto* traces = app.add_subcommand("traces", "time traces for the reference cases");
    auto* zeff = app.add_subcommand("zeff", "effective potential curves and spectra");
    auto* classical = app.add_subcommand("classical", "classical ensemble runs");
    auto* compare = app.add_subcommand("compare", "quantum vs classical comparison");
    for (auto* cmd : {validate, sweep, traces, zeff, classical, compare})
        add_common(cmd, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = load_config(opts);
        if (app.got_subcommand(validate)) {
            if (!run_validate(cfg)) {
                std::fprintf(stderr, "validate: checks failed\n");
                return 2;
            }
        } else if (app.got_subcommand(sweep)) {
            run_alpha_sweep(cfg);
        } else if (app.got_subcommand(traces)) {
            run_time_traces(cfg);
        } else if (app.got_subcommand(zeff)) {
            run_effective_potentials(cfg);
        } else if (app.got_subcommand(classical)) {
            run_classical_cases(cfg);
        } else if (app.got_subcommand(compare)) {
            if (!run_classical_comparison(cfg)) {
                std::fprintf(stderr, "compare: ordering checks failed, see report\n");
                return 2;
            }
        }
    } catch (const pairtunnel::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const pairtunnel::InvariantError& e) {
        std::fprintf(stderr, "invariant failure: %s\n", e.what());
        return 2;
    } catch (const pairtunnel::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
