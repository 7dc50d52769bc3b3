#include "kornlab/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

int resolve_threads(int cli_threads, int config_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("KORNLAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return config_threads;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"korn-lab: numerical laboratory for thin-domain inequality scalings"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = 0;
    double resolution_scale = 1.0;
    bool dump_fields = false;

    auto* run_cmd = app.add_subcommand("run", "run an experiment described by a config file");
    run_cmd->add_option("--config", config_path, "path to the JSON experiment config")->required();
    run_cmd->add_option("--out", out_dir, "output directory (overrides the config)");
    run_cmd->add_option("--threads", threads, "worker threads (fallback: KORNLAB_THREADS)");
    run_cmd->add_option("--resolution-scale", resolution_scale,
                        "multiply quadrature/space resolutions by this factor");
    run_cmd->add_flag("--dump-fields", dump_fields, "write a gradient matrix-field CSV for debugging");

    auto* list_cmd = app.add_subcommand("list-experiments", "list available experiments");

    auto* validate_cmd = app.add_subcommand("validate", "parse and validate a config file");
    validate_cmd->add_option("--config", config_path, "path to the JSON experiment config")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list_cmd->parsed()) {
            for (const auto& info : kornlab::experiment_catalog())
                std::cout << info.name << "\t" << info.description << "\n";
            return 0;
        }
        if (validate_cmd->parsed()) {
            const kornlab::ExperimentConfig cfg = kornlab::load_config(config_path);
            std::cout << "config OK: experiment '" << cfg.experiment << "', seed " << cfg.seed
                      << "\n";
            return 0;
        }
        // run
        kornlab::ExperimentConfig cfg = kornlab::load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.threads = resolve_threads(threads, cfg.threads);
        cfg.resolution_scale = resolution_scale;
        cfg.dump_fields = dump_fields;

        const kornlab::RunReport report = kornlab::run(cfg);
        if (report.has_fit) kornlab::emit_plotdata(report, cfg.out_dir);

        for (const auto& a : report.assertions)
            std::cout << (a.pass ? "[PASS] " : "[FAIL] ") << a.name << " (" << a.detail << ")\n";
        std::cout << (report.all_pass() ? "all assertions passed" : "ASSERTION FAILURES") << " in "
                  << report.wall_time_s << " s; outputs in " << cfg.out_dir << "\n";
        return report.all_pass() ? 0 : 1;
    } catch (const kornlab::usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const kornlab::error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
