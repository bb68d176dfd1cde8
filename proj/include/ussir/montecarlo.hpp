// Seeded path ensembles and their empirical statistics.
#pragma once

#include "criteria.hpp"
#include "integrator.hpp"
#include "models.hpp"
#include "rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace ussir {

/// (ln Y_T - ln Y_0) / T over the recorded span.
inline double lyapunov_estimate(const Trajectory &traj) {
    if (traj.size() < 2) throw std::invalid_argument("lyapunov_estimate: need at least two recorded states");
    return (std::log(traj.states.back().y) - std::log(traj.states.front().y)) / traj.horizon();
}

enum class Window { full, tail_half };

/// Trapezoidal time average of Y over the window. The tail window starts at
/// the midpoint of the recorded span, interpolating linearly there.
inline double time_average_infected(const Trajectory &traj, Window window = Window::full) {
    if (traj.size() == 0) throw std::invalid_argument("time_average_infected: empty trajectory");
    if (traj.size() == 1) return traj.states.front().y;
    const double t0 = traj.times.front(), t1 = traj.times.back();
    const double start = window == Window::full ? t0 : 0.5 * (t0 + t1);
    double area = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        double a = traj.times[k - 1], b = traj.times[k];
        if (b <= start) continue;
        double ya = traj.states[k - 1].y;
        const double yb = traj.states[k].y;
        if (a < start) {
            ya += (yb - ya) * (start - a) / (b - a);
            a = start;
        }
        area += 0.5 * (ya + yb) * (b - a);
    }
    return area / (t1 - start);
}

struct Summary {
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr() const { return q3 - q1; }
};

/// Linear-interpolation quantiles (the usual "type 7" definition).
inline Summary summarize(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("summarize: empty sample");
    std::sort(v.begin(), v.end());
    auto q = [&](double p) {
        const double h = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    Summary s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    s.median = q(0.5);
    s.q1 = q(0.25);
    s.q3 = q(0.75);
    return s;
}

struct PathStats {
    std::size_t path = 0;
    std::uint64_t seed = 0;
    double lyapunov = 0.0;
    double mean_infected = 0.0;
    double tail_mean_infected = 0.0;
    double y_final = 0.0;
    std::size_t floor_hits = 0;
    double simplex_drift = 0.0;
};

struct EnsembleStats {
    std::vector<PathStats> paths; ///< in path-index order
    Summary lyapunov, mean_infected, tail_mean_infected;
    double y_extinct = 0.0;
    double extinction_fraction = 0.0;
};

/// 1e-6 for proportions, 1e-3 for populations counted in millions.
inline double default_extinction_threshold(Domain d) { return d == Domain::simplex ? 1e-6 : 1e-3; }

inline PathStats path_stats(const Trajectory &traj) {
    PathStats p;
    p.lyapunov = lyapunov_estimate(traj);
    p.mean_infected = time_average_infected(traj, Window::full);
    p.tail_mean_infected = time_average_infected(traj, Window::tail_half);
    p.y_final = traj.states.back().y;
    p.floor_hits = traj.floor_hits;
    p.simplex_drift = traj.simplex_drift;
    return p;
}

inline EnsembleStats aggregate(std::vector<PathStats> paths, double y_extinct) {
    EnsembleStats e;
    e.paths = std::move(paths);
    e.y_extinct = y_extinct;
    std::vector<double> ly, mi, tm;
    std::size_t extinct = 0;
    for (const auto &p : e.paths) {
        ly.push_back(p.lyapunov);
        mi.push_back(p.mean_infected);
        tm.push_back(p.tail_mean_infected);
        if (p.y_final < y_extinct) ++extinct;
    }
    e.lyapunov = summarize(ly);
    e.mean_infected = summarize(mi);
    e.tail_mean_infected = summarize(tm);
    e.extinction_fraction = static_cast<double>(extinct) / static_cast<double>(e.paths.size());
    return e;
}

/// Runs `paths` trajectories; path i uses seed stream_seed(cfg.seed, i).
/// Results do not depend on `threads` (0 means hardware concurrency).
inline EnsembleStats run_ensemble(const ModelSpec &model, const State &s0, const SimConfig &cfg, std::size_t paths,
                                  unsigned threads = 0, double y_extinct = -1.0) {
    if (paths < 1) throw std::invalid_argument("run_ensemble: paths must be >= 1");
    cfg.validate();
    if (y_extinct < 0.0) y_extinct = default_extinction_threshold(model.domain());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, paths));

    std::vector<PathStats> out(paths);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= paths) return;
            try {
                SimConfig c = cfg;
                c.seed = stream_seed(cfg.seed, i);
                PathStats p = path_stats(simulate(model, s0, c));
                p.path = i;
                p.seed = c.seed;
                out[i] = p;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = paths;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto &th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return aggregate(std::move(out), y_extinct);
}

enum class Verdict { consistent, inconsistent, inapplicable };

inline const char *to_string(Verdict v) {
    switch (v) {
    case Verdict::consistent: return "consistent";
    case Verdict::inconsistent: return "inconsistent";
    default: return "inapplicable";
    }
}

/// Compares an ensemble against a closed-form report. Extinct reports need
/// median Lyapunov <= -rate (1 - slack) + slack; persistent reports need
/// median tail average >= bound (1 - slack).
inline Verdict verdict(const EnsembleStats &stats, const CriteriaReport &report, double slack = 0.5) {
    if (!(slack > 0.0)) throw std::invalid_argument("verdict: slack must be positive");
    switch (report.classification) {
    case Classification::extinct:
        if (!report.extinction_rate_lb) return Verdict::inapplicable;
        return stats.lyapunov.median <= -*report.extinction_rate_lb * (1.0 - slack) + slack ? Verdict::consistent
                                                                                             : Verdict::inconsistent;
    case Classification::persistent:
        if (!report.mean_infected_lb) return Verdict::inapplicable;
        return stats.tail_mean_infected.median >= *report.mean_infected_lb * (1.0 - slack) ? Verdict::consistent
                                                                                             : Verdict::inconsistent;
    default: return Verdict::inapplicable;
    }
}

inline void write_paths_csv(std::ostream &os, const EnsembleStats &e) {
    os << "path,seed,lyapunov,mean_infected,tail_mean_infected,Y_T\n";
    for (const auto &p : e.paths)
        os << p.path << ',' << p.seed << ',' << real_text(p.lyapunov) << ',' << real_text(p.mean_infected) << ','
           << real_text(p.tail_mean_infected) << ',' << real_text(p.y_final) << '\n';
}

inline void write_summary_csv(std::ostream &os, const EnsembleStats &e) {
    os << "statistic,mean,median,q1,q3,iqr\n";
    auto row = [&](const char *name, const Summary &s) {
        os << name << ',' << real_text(s.mean) << ',' << real_text(s.median) << ',' << real_text(s.q1) << ','
           << real_text(s.q3) << ',' << real_text(s.iqr()) << '\n';
    };
    row("lyapunov", e.lyapunov);
    row("mean_infected", e.mean_infected);
    row("tail_mean_infected", e.tail_mean_infected);
    os << "extinction_fraction," << real_text(e.extinction_fraction) << ",,,,\n";
    os << "paths," << e.paths.size() << ",,,,\n";
}

} // namespace ussir
