// ussir <simulate|ensemble|criteria|validate> --config FILE [overrides]
#include "ussir/ussir.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
    CLI::App app{"Stochastic SIR simulator with Levy jumps"};
    app.require_subcommand(1, 1);

    std::string config;
    ussir::Overrides over;
    unsigned threads = 0;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { over.seed = v; }, "master seed");
        sub->add_option_function<std::string>("--out", [&](const std::string &v) { over.out = v; }, "output directory");
        sub->add_option_function<double>("--dt", [&](double v) { over.dt = v; }, "time step");
        sub->add_option_function<double>("--horizon", [&](double v) { over.horizon = v; }, "horizon T");
        sub->add_option_function<std::size_t>("--paths", [&](std::size_t v) { over.paths = v; }, "ensemble size");
    };
    auto *simulate = app.add_subcommand("simulate", "one path plus noise-free and drift-free companions");
    auto *ensemble = app.add_subcommand("ensemble", "path ensemble compared against the criteria");
    auto *criteria = app.add_subcommand("criteria", "closed-form extinction/persistence report");
    auto *validate = app.add_subcommand("validate", "conservation and jump-positivity checks");
    for (auto *sub : {simulate, ensemble, criteria, validate}) add_common(sub);
    ensemble->add_option("--threads", threads, "worker threads (0: all cores)");

    CLI11_PARSE(app, argc, argv);

    try {
        const ussir::ScenarioConfig cfg = ussir::apply(ussir::load_scenario(config), over);
        if (simulate->parsed()) return ussir::cmd_simulate(cfg, std::cout);
        if (ensemble->parsed()) return ussir::cmd_ensemble(cfg, std::cout, threads);
        if (criteria->parsed()) return ussir::cmd_criteria(cfg, std::cout);
        return ussir::cmd_validate(cfg, std::cout);
    } catch (const std::exception &e) {
        std::cerr << "ussir: " << e.what() << '\n';
        return ussir::kExitError;
    }
}
