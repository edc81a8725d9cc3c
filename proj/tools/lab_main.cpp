// Experiment runner CLI.
//
//   disorder-lab run --config cfg.json [--seed S] [--threads T] [--out DIR]
//                    [--format csv|json] [--set key=value ...]
//   disorder-lab init EXPERIMENT        # print a starter config
//   disorder-lab list                   # list experiment names
//
// Exit codes: 0 success, 2 validation error, 3 resource error,
// 4 built-in check failed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lab/errors.hpp"
#include "lab/experiments.hpp"
#include "lab/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"disorder-lab: pinning/polymer chaos-expansion simulation lab"};
    app.set_version_flag("--version", lab::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string format;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::vector<std::string> overrides;

    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("--config", config_path, "config file (JSON)")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--format", format, "csv or json record output")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    run->add_option("--threads", threads, "worker thread count override");
    run->add_option("--set", overrides, "key=value config overrides (dotted keys)");

    std::string init_name;
    CLI::App* init = app.add_subcommand("init", "print a starter config for an experiment");
    init->add_option("experiment", init_name, "experiment name")->required();

    CLI::App* list = app.add_subcommand("list", "list experiment names");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& name : lab::experiment_names()) std::cout << name << '\n';
            return 0;
        }
        if (init->parsed()) {
            std::cout << lab::default_config(init_name).dump(2) << '\n';
            return 0;
        }

        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config " << config_path << '\n';
            return 2;
        }
        lab::json config = lab::json::parse(in, nullptr, true, true);
        for (const std::string& kv : overrides) {
            const std::size_t eq = kv.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
                return 2;
            }
            lab::apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed_set) config["master_seed"] = seed;
        if (threads > 0) config["threads"] = threads;
        if (!format.empty()) config["output"]["format"] = format;

        const lab::RunResult result = lab::run_experiment(config, out_dir);
        std::cout << result.summary << '\n';
        for (const auto& artifact : result.artifacts) std::cout << "  wrote " << artifact << '\n';
        return result.exit_code;
    } catch (const lab::validation_error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const lab::resource_error& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
