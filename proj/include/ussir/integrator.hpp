// Euler-Maruyama stepping for the jump-diffusion system.
//
// One step from (t, s) over dt:
//
//   s' = s + b dt + sum_j sigma_j dB_j
//          + [sum over small marks h(u) - (int_{|u|<1} h nu(du)) dt]
//          + sum over large marks g(u)
//
// Random draws per step, in this order: the n Brownian increments, the small
// jump count and marks, the large jump count and marks. All jumps of a step
// are applied at the step end using the state at its start.
#pragma once

#include "levy.hpp"
#include "models.hpp"
#include "rng.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ussir {

struct SimConfig {
    double dt = 0.001;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    double positivity_floor = 1e-12;
    std::size_t record_stride = 1;
    double simplex_tol = kDefaultSimplexTol;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("SimConfig: dt must be positive");
        if (!(horizon >= dt) || !std::isfinite(horizon)) throw std::invalid_argument("SimConfig: horizon must be >= dt");
        if (record_stride < 1) throw std::invalid_argument("SimConfig: record_stride must be >= 1");
        if (!(positivity_floor > 0.0)) throw std::invalid_argument("SimConfig: positivity_floor must be positive");
        if (!(simplex_tol > 0.0)) throw std::invalid_argument("SimConfig: simplex_tol must be positive");
    }

    /// ceil(horizon / dt), tolerant of the rounding in e.g. 100 / 0.001.
    std::size_t steps() const {
        const double r = horizon / dt;
        const double nearest = std::round(r);
        if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(nearest);
        return static_cast<std::size_t>(std::ceil(r));
    }
};

struct Trajectory {
    Domain domain = Domain::simplex;
    std::vector<double> times;
    std::vector<State> states;
    /// Steps at which a component had to be lifted to the positivity floor.
    std::size_t floor_hits = 0;
    /// Largest |x + y + z - 1| seen after any step, before renormalisation
    /// (simplex models only).
    double simplex_drift = 0.0;

    std::size_t size() const { return times.size(); }
    double horizon() const { return times.back() - times.front(); }
};

struct Projected {
    State state;
    int clamped = 0;
    bool renormalized = false;
};

/// Positivity safeguard. Components that are not strictly positive (or not
/// finite) are set to `floor`; strictly positive values are left alone, so
/// deep-extinction tails keep their magnitude. On the simplex the state is
/// then rescaled to sum 1 when it has drifted by more than `simplex_tol`.
inline Projected project(const State &s, Domain domain, double floor, double simplex_tol = kDefaultSimplexTol) {
    Projected out{s, 0, false};
    for (double *v : {&out.state.x, &out.state.y, &out.state.z}) {
        if (!(*v > 0.0) || !std::isfinite(*v)) {
            *v = floor;
            ++out.clamped;
        }
    }
    if (domain == Domain::simplex) {
        const double sum = out.state.sum();
        if (std::abs(sum - 1.0) > simplex_tol) {
            out.state = {out.state.x / sum, out.state.y / sum, out.state.z / sum};
            out.renormalized = true;
        }
    }
    return out;
}

namespace detail {

class Stepper {
public:
    explicit Stepper(const ModelSpec &model)
        : model_(model), columns_(static_cast<std::size_t>(model.brownian_dim())) {}

    /// The unprojected Euler-Maruyama update.
    State advance(double t, const State &s, double dt, Rng &rng) {
        const Frame f = model_.frame(t);
        const Vec3 b = model_.drift(f, s);
        Vec3 next{s.x + b[0] * dt, s.y + b[1] * dt, s.z + b[2] * dt};

        if (!columns_.empty()) {
            model_.diffusion(f, s, columns_);
            const double sqdt = std::sqrt(dt);
            for (const Vec3 &c : columns_) {
                const double dB = sqdt * rng.normal();
                for (std::size_t i = 0; i < 3; ++i) next[i] += c[i] * dB;
            }
        }

        const LevyMeasure &m = model_.measure();
        if (m.region_mass(JumpRegion::small) > 0.0) {
            const JumpBatch small = sample_jumps(m, JumpRegion::small, dt, rng);
            for (double u : small.marks) {
                const Vec3 h = model_.small_jump(f, s, u);
                for (std::size_t i = 0; i < 3; ++i) next[i] += h[i];
            }
            const Vec3 comp = model_.compensator(f, s);
            for (std::size_t i = 0; i < 3; ++i) next[i] -= comp[i] * dt;
        }
        if (m.region_mass(JumpRegion::large) > 0.0) {
            const JumpBatch large = sample_jumps(m, JumpRegion::large, dt, rng);
            for (double u : large.marks) {
                const Vec3 g = model_.large_jump(f, s, u);
                for (std::size_t i = 0; i < 3; ++i) next[i] += g[i];
            }
        }
        return {next[0], next[1], next[2]};
    }

private:
    const ModelSpec &model_;
    std::vector<Vec3> columns_;
};

} // namespace detail

/// One safeguarded step.
inline State step(const ModelSpec &model, double t, const State &s, double dt, Rng &rng,
                  double floor = 1e-12, double simplex_tol = kDefaultSimplexTol) {
    detail::Stepper stepper(model);
    return project(stepper.advance(t, s, dt, rng), model.domain(), floor, simplex_tol).state;
}

/// Runs ceil(T / dt) steps from s0 with rng seeded by cfg.seed. Records the
/// initial state, every record_stride-th step, and the final step.
inline Trajectory simulate(const ModelSpec &model, const State &s0, const SimConfig &cfg) {
    cfg.validate();
    if (!admissible(s0, model.domain(), cfg.simplex_tol))
        throw std::invalid_argument("simulate: initial state is not admissible for the " +
                                    std::string(to_string(model.domain())) + " domain");
    const std::size_t K = cfg.steps();
    Trajectory traj;
    traj.domain = model.domain();
    traj.times.reserve(K / cfg.record_stride + 2);
    traj.states.reserve(K / cfg.record_stride + 2);
    traj.times.push_back(0.0);
    traj.states.push_back(s0);

    Rng rng(cfg.seed);
    detail::Stepper stepper(model);
    State s = s0;
    for (std::size_t k = 0; k < K; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        const State raw = stepper.advance(t, s, cfg.dt, rng);
        if (model.domain() == Domain::simplex)
            traj.simplex_drift = std::max(traj.simplex_drift, std::abs(raw.sum() - 1.0));
        const Projected p = project(raw, model.domain(), cfg.positivity_floor, cfg.simplex_tol);
        if (p.clamped > 0) ++traj.floor_hits;
        s = p.state;
        if ((k + 1) % cfg.record_stride == 0 || k + 1 == K) {
            traj.times.push_back(static_cast<double>(k + 1) * cfg.dt);
            traj.states.push_back(s);
        }
    }
    return traj;
}

// =============================================================================
// Strong convergence probe
// =============================================================================

struct ConvergenceRow {
    double dt = 0.0;
    std::size_t steps = 0;
    double strong_error = 0.0; ///< E|S_T - S_hat_T|
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double order = 0.0; ///< least-squares slope of log error against log dt
};

/// Strong error of Euler-Maruyama on dS = a S dt + b S dB against the exact
/// solution s0 exp((a - b^2/2) T + b B_T), driven by the same Brownian path.
/// Each dt must divide T, and every coarser dt must be a whole multiple of the
/// finest.
inline ConvergenceResult convergence_probe(double a, double b, double s0, double T, const std::vector<double> &dt_list,
                                           std::size_t paths, std::uint64_t seed) {
    if (dt_list.empty() || paths == 0) throw std::invalid_argument("convergence_probe: need dts and paths");
    for (std::size_t i = 1; i < dt_list.size(); ++i)
        if (!(dt_list[i] < dt_list[i - 1])) throw std::invalid_argument("convergence_probe: dt_list must decrease");
    auto whole = [](double r) -> std::size_t {
        const double n = std::round(r);
        if (n < 1.0 || std::abs(r - n) > 1e-9 * n) throw std::invalid_argument("convergence_probe: dt does not divide");
        return static_cast<std::size_t>(n);
    };
    const double fine_dt = dt_list.back();
    const std::size_t fine_steps = whole(T / fine_dt);
    std::vector<std::size_t> ratio;
    for (double dt : dt_list) ratio.push_back(whole(dt / fine_dt));

    ConvergenceResult out;
    for (std::size_t k = 0; k < dt_list.size(); ++k) out.rows.push_back({dt_list[k], fine_steps / ratio[k], 0.0});

    std::vector<double> dW(fine_steps);
    const double sq = std::sqrt(fine_dt);
    for (std::size_t p = 0; p < paths; ++p) {
        Rng rng(stream_seed(seed, p));
        double BT = 0.0;
        for (double &w : dW) {
            w = sq * rng.normal();
            BT += w;
        }
        const double exact = s0 * std::exp((a - 0.5 * b * b) * T + b * BT);
        for (std::size_t k = 0; k < dt_list.size(); ++k) {
            const double dt = dt_list[k];
            double S = s0;
            for (std::size_t i = 0; i < fine_steps; i += ratio[k]) {
                double inc = 0.0;
                for (std::size_t j = i; j < i + ratio[k]; ++j) inc += dW[j];
                S += a * S * dt + b * S * inc;
            }
            out.rows[k].strong_error += std::abs(S - exact);
        }
    }
    for (auto &row : out.rows) row.strong_error /= static_cast<double>(paths);

    if (out.rows.size() >= 2) {
        double mx = 0, my = 0;
        for (const auto &r : out.rows) mx += std::log(r.dt), my += std::log(r.strong_error);
        mx /= static_cast<double>(out.rows.size());
        my /= static_cast<double>(out.rows.size());
        double sxy = 0, sxx = 0;
        for (const auto &r : out.rows) {
            const double dx = std::log(r.dt) - mx;
            sxy += dx * (std::log(r.strong_error) - my);
            sxx += dx * dx;
        }
        out.order = sxy / sxx;
    }
    return out;
}

// =============================================================================
// CSV
// =============================================================================

/// 17 significant digits; round-trips every double.
inline std::string real_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_trajectory_csv(std::ostream &os, const Trajectory &traj) {
    os << "t,X,Y,Z\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const State &s = traj.states[k];
        os << real_text(traj.times[k]) << ',' << real_text(s.x) << ',' << real_text(s.y) << ',' << real_text(s.z)
           << '\n';
    }
}

} // namespace ussir
