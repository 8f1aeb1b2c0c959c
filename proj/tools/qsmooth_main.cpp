// qsmooth: numerical lab for Schrodinger evolution on compact metric
// perturbations of flat space.
//
//   qsmooth run <config.ini>    execute the experiment named in the config
//   qsmooth list                table of experiments and required fields
//   qsmooth validate <config>   parse + field check only
//
// Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 config error.
// QSMOOTH_OUTPUT_ROOT overrides the output directory root.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "qsmooth/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qsmooth: dispersive-estimate laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "experiment config file")->required();

    auto* list = app.add_subcommand("list", "list available experiments");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config file");
    validate->add_option("config", validate_path, "experiment config file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& d : qsmooth::list_experiments()) {
                std::cout << d.name << "\n  required:";
                for (const auto& f : d.required_fields) std::cout << " " << f;
                std::cout << "\n  outputs:";
                for (const auto& o : d.outputs) std::cout << " " << o;
                std::cout << "\n";
            }
            return 0;
        }
        if (validate->parsed()) {
            const auto cfg = qsmooth::Config::load(validate_path);
            qsmooth::validate_config(cfg);
            std::cout << "config ok: " << validate_path << "\n";
            return 0;
        }
        // run
        const auto cfg = qsmooth::Config::load(config_path);
        qsmooth::validate_config(cfg);
        std::string out_root = cfg.get_or("experiment", "output_dir", "out");
        if (const char* env = std::getenv("QSMOOTH_OUTPUT_ROOT"))
            out_root = env;
        const auto rep = qsmooth::run_experiment(cfg, out_root);
        for (const auto& v : rep.verdicts)
            std::cout << (v.pass ? "PASS " : "FAIL ") << v.name
                      << (v.detail.empty() ? "" : "  [" + v.detail + "]")
                      << "\n";
        std::cout << (rep.all_pass() ? "ALL PASS" : "FAILURES PRESENT")
                  << "  (" << rep.wall_seconds << " s)\n";
        return rep.all_pass() ? 0 : 1;
    } catch (const qsmooth::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
