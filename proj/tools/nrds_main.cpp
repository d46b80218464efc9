#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "nrds/config.hpp"
#include "nrds/errors.hpp"
#include "nrds/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nonautonomous random dynamical systems laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run the experiment in a config");
    run->add_option("config", config_path, "experiment config file")
        ->required();

    std::string validate_path;
    auto* validate =
        app.add_subcommand("validate", "check a config without running");
    validate->add_option("config", validate_path, "experiment config file")
        ->required();

    app.add_subcommand("list", "list built-in scenarios");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("list")) {
            std::fputs(nrds::scenario_listing().c_str(), stdout);
            return 0;
        }
        if (app.got_subcommand("validate")) {
            const auto cfg = nrds::parse_config(validate_path);
            const auto errs = nrds::validate_config(cfg);
            if (errs.empty()) {
                std::puts("ok");
                return 0;
            }
            for (const auto& e : errs)
                std::fprintf(stderr, "error: %s\n", e.c_str());
            return 1;
        }
        const auto cfg = nrds::parse_config(config_path);
        const auto result = nrds::run_experiment(cfg);
        int failed = 0;
        for (const auto& c : result.checks) {
            if (!c.pass) ++failed;
            std::printf("[%s] %s/%s value=%.6g threshold=%.6g%s%s\n",
                        c.pass ? "PASS" : "FAIL", c.suite.c_str(),
                        c.name.c_str(), c.value, c.threshold,
                        c.note.empty() ? "" : " ", c.note.c_str());
        }
        std::printf("%d checks, %d failed\n",
                    static_cast<int>(result.checks.size()), failed);
        return result.exit_code;
    } catch (const nrds::Error& e) {
        std::fprintf(stderr, "error (%s): %s\n",
                     nrds::error_code_name(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
