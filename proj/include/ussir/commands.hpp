// The four CLI subcommands. Each writes its files under cfg.out, prints a
// short report to `log`, and returns the process exit status.
#pragma once

#include "criteria.hpp"
#include "integrator.hpp"
#include "models.hpp"
#include "montecarlo.hpp"
#include "scenario.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

namespace ussir {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInconsistent = 2;

/// Command-line overrides; unset fields keep the scenario's values.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<std::size_t> paths;
};

inline ScenarioConfig apply(ScenarioConfig cfg, const Overrides &o) {
    if (o.seed) cfg.sim.seed = *o.seed;
    if (o.out) cfg.out = *o.out;
    if (o.dt) cfg.sim.dt = *o.dt;
    if (o.horizon) cfg.sim.horizon = *o.horizon;
    if (o.paths) cfg.paths = *o.paths;
    if (!(cfg.sim.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(cfg.sim.horizon >= cfg.sim.dt)) throw ConfigError("T must be at least dt");
    if (cfg.paths < 1) throw ConfigError("paths must be at least 1");
    return cfg;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path &dir, const std::string &name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
}

} // namespace detail

/// trajectory.csv plus three companion runs sharing the seed: the noise-free
/// system (deterministic.csv) and the drift-free diffusion and jump parts
/// (diffusion_only.csv, jumps_only.csv). panel_X/Y/Z.csv put the four runs
/// side by side per compartment.
inline int cmd_simulate(const ScenarioConfig &cfg, std::ostream &log) {
    const ModelSpec model = build_model(cfg);
    const std::filesystem::path dir = cfg.out;
    const struct {
        const char *file;
        const char *column;
        Components keep;
    } runs[] = {{"trajectory.csv", "stochastic", {true, true, true}},
                {"deterministic.csv", "deterministic", {true, false, false}},
                {"diffusion_only.csv", "diffusion_only", {false, true, false}},
                {"jumps_only.csv", "jumps_only", {false, false, true}}};
    std::vector<Trajectory> trajs;
    for (const auto &r : runs) {
        trajs.push_back(simulate(model.with_components(r.keep), cfg.initial, cfg.sim));
        auto os = detail::open_out(dir, r.file);
        write_trajectory_csv(os, trajs.back());
        log << r.file << ": " << trajs.back().size() << " rows, floor hits " << trajs.back().floor_hits << '\n';
    }
    const char *names[3] = {"X", "Y", "Z"};
    for (std::size_t i = 0; i < 3; ++i) {
        auto os = detail::open_out(dir, std::string("panel_") + names[i] + ".csv");
        os << 't';
        for (const auto &r : runs) os << ',' << r.column;
        os << '\n';
        for (std::size_t k = 0; k < trajs[0].size(); ++k) {
            os << real_text(trajs[0].times[k]);
            for (const auto &tr : trajs) os << ',' << real_text(tr.states[k][i]);
            os << '\n';
        }
    }
    const Trajectory &main = trajs[0];
    log << "lyapunov: " << real_text(lyapunov_estimate(main)) << '\n';
    log << "mean_infected: " << real_text(time_average_infected(main)) << '\n';
    if (model.domain() == Domain::simplex) log << "simplex_drift: " << real_text(main.simplex_drift) << '\n';
    return kExitOk;
}

/// ensemble_paths.csv, ensemble_summary.csv and verdict.txt. Exit 2 when the
/// ensemble contradicts the closed-form report.
inline int cmd_ensemble(const ScenarioConfig &cfg, std::ostream &log, unsigned threads = 0) {
    const ModelSpec model = build_model(cfg);
    const EnsembleStats stats = run_ensemble(model, cfg.initial, cfg.sim, cfg.paths, threads);
    const CriteriaReport report = criteria_for(cfg);
    const Verdict v = verdict(stats, report, cfg.slack);
    const std::filesystem::path dir = cfg.out;
    {
        auto os = detail::open_out(dir, "ensemble_paths.csv");
        write_paths_csv(os, stats);
    }
    {
        auto os = detail::open_out(dir, "ensemble_summary.csv");
        write_summary_csv(os, stats);
    }
    std::ostringstream text;
    text << "classification: " << to_string(report.classification) << '\n';
    text << "paths: " << stats.paths.size() << '\n';
    text << "median_lyapunov: " << real_text(stats.lyapunov.median) << '\n';
    text << "median_tail_mean_infected: " << real_text(stats.tail_mean_infected.median) << '\n';
    text << "extinction_fraction: " << real_text(stats.extinction_fraction) << '\n';
    text << "slack: " << real_text(cfg.slack) << '\n';
    text << "verdict: " << to_string(v) << '\n';
    {
        auto os = detail::open_out(dir, "verdict.txt");
        os << text.str();
    }
    log << text.str();
    return v == Verdict::inconsistent ? kExitInconsistent : kExitOk;
}

/// criteria.txt (key: value lines) and criteria.csv (header plus one row).
inline int cmd_criteria(const ScenarioConfig &cfg, std::ostream &log) {
    const CriteriaReport report = criteria_for(cfg);
    const std::filesystem::path dir = cfg.out;
    const std::string text = to_text(report);
    {
        auto os = detail::open_out(dir, "criteria.txt");
        os << text;
    }
    {
        auto os = detail::open_out(dir, "criteria.csv");
        os << kCriteriaCsvHeader << '\n' << to_csv_row(report) << '\n';
    }
    log << text;
    return kExitOk;
}

/// Structural checks on the built model: compartment sums on the simplex and
/// the jump ratios 1 + h_i/x_i, 1 + g_i/x_i. Exit 1 if either fails.
inline int cmd_validate(const ScenarioConfig &cfg, std::ostream &log, std::size_t samples = 1000) {
    const ModelSpec model = build_model(cfg, Check::skip);
    Rng rng(stream_seed(cfg.sim.seed, 0));
    std::ostringstream text;
    text << "model: " << model.name() << '\n';
    text << "domain: " << to_string(model.domain()) << '\n';
    text << "samples: " << samples << '\n';
    bool ok = true;
    if (model.domain() == Domain::simplex) {
        const ConservationReport c = check_conservation(model, samples, rng);
        text << "conservation.drift: " << real_text(c.max_drift_sum) << '\n';
        text << "conservation.diffusion: " << real_text(c.max_diffusion_sum) << '\n';
        text << "conservation.small_jump: " << real_text(c.max_small_jump_sum) << '\n';
        text << "conservation.large_jump: " << real_text(c.max_large_jump_sum) << '\n';
        text << "conservation.max_deviation: " << real_text(c.max_deviation()) << '\n';
        text << "conservation: " << (c.ok() ? "ok" : "violated") << '\n';
        ok = ok && c.ok();
    }
    const PositivityReport p = check_positivity_ratios(model, samples, rng);
    text << "positivity.min_ratio: " << real_text(p.min_ratio) << '\n';
    if (!p.worst.empty()) text << "positivity.worst: " << p.worst << '\n';
    text << "positivity: " << (p.ok() ? "ok" : "violated") << '\n';
    ok = ok && p.ok();
    {
        auto os = detail::open_out(cfg.out, "validate.txt");
        os << text.str();
    }
    log << text.str();
    return ok ? kExitOk : kExitError;
}

} // namespace ussir
