// Extinction and persistence thresholds.
//
// The closed-form criteria for the worked systems take inf/sup pairs of the
// time coefficients (BoundsPair) and the jump constants. The generic
// estimators evaluate the extinction exponent directly from a ModelSpec on a
// finite (t, state) grid.
//
// Every criterion is one-sided: when a gate fails the verdict is
// `indeterminate`, never the opposite behaviour.
#pragma once

#include "error.hpp"
#include "expr.hpp"
#include "integrator.hpp"
#include "models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ussir {

using expr::BoundsPair;

enum class Classification { extinct, persistent, indeterminate };

inline const char *to_string(Classification c) {
    switch (c) {
    case Classification::extinct: return "extinct";
    case Classification::persistent: return "persistent";
    default: return "indeterminate";
    }
}

/// `margin` is the slack of the inequality, positive when it holds.
struct SideCondition {
    std::string name;
    bool satisfied = false;
    double margin = 0.0;
};

struct CriteriaReport {
    std::string model;
    Classification classification = Classification::indeterminate;
    std::optional<double> extinction_rate_lb; ///< -alpha >= this
    std::optional<double> lambda0;
    std::optional<double> lambda;
    std::optional<double> mean_infected_lb; ///< lambda / lambda0
    std::optional<double> r_tilde;
    std::optional<double> r_tilde_persistence;
    std::optional<double> invariant_bound; ///< sup Lambda / inf mu
    std::optional<double> alpha_estimate;
    std::optional<double> alpha_y_min; ///< state-grid cut-off behind alpha_estimate
    std::vector<SideCondition> side_conditions;

    const SideCondition *find(const std::string &name) const {
        for (const auto &c : side_conditions)
            if (c.name == name) return &c;
        return nullptr;
    }

    void add(std::string name, double margin) { side_conditions.push_back({std::move(name), margin > 0.0, margin}); }
    void add_nonstrict(std::string name, double margin) {
        side_conditions.push_back({std::move(name), margin >= 0.0, margin});
    }
    bool all(std::initializer_list<const char *> names) const {
        for (const char *n : names) {
            const SideCondition *c = find(n);
            if (!c || !c->satisfied) return false;
        }
        return true;
    }
};

// =============================================================================
// Serialisation
// =============================================================================

/// Column order of the CSV row.
inline constexpr const char *kCriteriaCsvHeader =
    "model,classification,extinction_rate_lb,lambda0,lambda,mean_infected_lb,r_tilde,r_tilde_persistence,"
    "invariant_bound,alpha_estimate,alpha_y_min";

inline std::string to_csv_row(const CriteriaReport &r) {
    auto opt = [](const std::optional<double> &v) { return v ? real_text(*v) : std::string(); };
    std::string row = r.model + "," + to_string(r.classification);
    for (const auto &v : {r.extinction_rate_lb, r.lambda0, r.lambda, r.mean_infected_lb, r.r_tilde,
                          r.r_tilde_persistence, r.invariant_bound, r.alpha_estimate, r.alpha_y_min})
        row += "," + opt(v);
    return row;
}

/// One `key: value` per line; absent values are omitted. Side conditions
/// appear as `condition.<name>: <holds|fails> (margin <m>)`.
inline std::string to_text(const CriteriaReport &r) {
    std::ostringstream os;
    os << "model: " << r.model << '\n';
    os << "classification: " << to_string(r.classification) << '\n';
    auto put = [&](const char *key, const std::optional<double> &v) {
        if (v) os << key << ": " << real_text(*v) << '\n';
    };
    put("extinction_rate_lb", r.extinction_rate_lb);
    put("lambda0", r.lambda0);
    put("lambda", r.lambda);
    put("mean_infected_lb", r.mean_infected_lb);
    put("r_tilde", r.r_tilde);
    put("r_tilde_persistence", r.r_tilde_persistence);
    put("invariant_bound", r.invariant_bound);
    put("alpha_estimate", r.alpha_estimate);
    put("alpha_y_min", r.alpha_y_min);
    for (const auto &c : r.side_conditions)
        os << "condition." << c.name << ": " << (c.satisfied ? "holds" : "fails") << " (margin " << real_text(c.margin)
           << ")\n";
    return os.str();
}

// =============================================================================
// k-function
// =============================================================================

/// k = sum_i h_i/x_i - ln prod_i (1 + h_i/x_i) >= 0, from the small-jump
/// coefficient at mark u. Throws DomainError if some 1 + h_i/x_i <= 0.
inline double k_value(const ModelSpec &model, double t, const State &s, double u) {
    const Vec3 h = model.small_jump(t, s, u);
    double k = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double r = h[i] / s[i];
        if (!(1.0 + r > 0.0)) throw DomainError("k_value: 1 + h/x <= 0 in component " + std::to_string(i + 1));
        k += r - std::log1p(r);
    }
    return k;
}

// =============================================================================
// Closed forms for the worked systems
// =============================================================================

struct Ex1Bounds {
    BoundsPair beta, gamma;
    double g1 = 0.0;
};

struct Ex1bBounds {
    BoundsPair beta, gamma1, gamma2, sigma;
    double h1 = 0.0, h2 = 0.0, g2 = 0.0;
};

struct XcBounds {
    BoundsPair Lambda, mu, beta, gamma, epsilon, sigma;
};

struct Ex34aBounds {
    BoundsPair mu, gamma2, gamma3, sigma1, sigma2;
    double h1 = 0.0, h2 = 0.0, g2 = 0.0;
    double M = 1.0;
};

struct Ex34bBounds {
    BoundsPair beta, mu, gamma2;
    double g1 = 0.0;
};

inline Ex1Bounds bounds_of(const Ex1Params &p) { return {expr::bounds(p.beta), expr::bounds(p.gamma), p.g1}; }

inline Ex1bBounds bounds_of(const Ex1bParams &p) {
    return {expr::bounds(p.beta), expr::bounds(p.gamma1), expr::bounds(p.gamma2), expr::bounds(p.sigma),
            p.h1, p.h2, p.g2};
}

inline XcBounds bounds_of(const XcParams &p) {
    return {expr::bounds(p.Lambda), expr::bounds(p.mu),      expr::bounds(p.beta),
            expr::bounds(p.gamma),  expr::bounds(p.epsilon), expr::bounds(p.sigma)};
}

inline Ex34aBounds bounds_of(const Ex34aParams &p) {
    return {expr::bounds(p.mu), expr::bounds(p.gamma2), expr::bounds(p.gamma3), expr::bounds(p.sigma1),
            expr::bounds(p.sigma2), p.h1, p.h2, p.g2, p.M};
}

inline Ex34bBounds bounds_of(const Ex34bParams &p) {
    return {expr::bounds(p.beta), expr::bounds(p.mu), expr::bounds(p.gamma2), p.g1};
}

/// Proportions model with power-law incidence:
/// sup beta + 2 sup g1 < inf gamma  =>  -alpha >= inf gamma - sup beta - 2 sup g1.
inline CriteriaReport ex1_extinction(const Ex1Bounds &b) {
    CriteriaReport r;
    r.model = "ex1";
    const double rate = b.gamma.inf - b.beta.sup - 2.0 * b.g1;
    r.add("beta_sup+2g1<gamma_inf", rate);
    if (r.all({"beta_sup+2g1<gamma_inf"})) {
        r.classification = Classification::extinct;
        r.extinction_rate_lb = rate;
    }
    return r;
}

/// Proportions model with reinfection-type Z feedback; persistence in mean.
inline CriteriaReport ex1b_persistence(const Ex1bBounds &b) {
    CriteriaReport r;
    r.model = "ex1b";
    r.add("gamma1_sup<beta_inf", b.beta.inf - b.gamma1.sup);
    r.add_nonstrict("beta_inf<=gamma2_inf", b.gamma2.inf - b.beta.inf);
    r.add("h2,g2<1", std::min(1.0 - b.h2, 1.0 - b.g2));
    if (!r.all({"h2,g2<1"})) return r;

    const double noise = b.sigma.sup * b.sigma.sup + b.h1 - std::log((1.0 - b.h2) * (1.0 - b.g2));
    const double spread = b.gamma2.inf - b.gamma1.sup;
    r.add("noise<(gamma2_inf-gamma1_sup)/2", 0.5 * spread - noise);
    if (!r.all({"gamma1_sup<beta_inf", "beta_inf<=gamma2_inf", "noise<(gamma2_inf-gamma1_sup)/2"})) return r;

    const double lambda0 = b.gamma2.inf;
    const double lambda = spread - 2.0 * noise;
    if (!(lambda0 > 0.0) || !(lambda > 0.0)) return r;
    r.classification = Classification::persistent;
    r.lambda0 = lambda0;
    r.lambda = lambda;
    r.mean_infected_lb = lambda / lambda0;
    return r;
}

/// Population model with demography. Reports the invariant-set bound, both
/// extinction regimes (weak and strong noise) and the persistence threshold.
inline CriteriaReport xc_report(const XcBounds &b) {
    CriteriaReport r;
    r.model = "xc";
    r.add("mu_inf>0", b.mu.inf);
    if (!r.all({"mu_inf>0"})) return r;

    const double Lhi = b.Lambda.sup, Llo = b.Lambda.inf;
    const double mlo = b.mu.inf, mhi = b.mu.sup;
    const double s2lo = b.sigma.inf * b.sigma.inf, s2hi = b.sigma.sup * b.sigma.sup;
    r.invariant_bound = Lhi / mlo;

    // Extinction.
    const double removal_lo = mlo + b.gamma.inf + b.epsilon.inf;
    const double weak_noise_cap = mlo * b.beta.sup / Lhi;
    const double r_tilde =
        b.beta.sup * Lhi / (mlo * removal_lo) - s2lo * Lhi * Lhi / (2.0 * mlo * mlo * removal_lo);
    r.r_tilde = r_tilde;
    r.add_nonstrict("sigma_inf^2<=mu_inf*beta_sup/Lambda_sup", weak_noise_cap - s2lo);
    r.add("r_tilde<1", 1.0 - r_tilde);
    const double strong_noise_floor = std::max(weak_noise_cap, b.beta.sup * b.beta.sup / (2.0 * removal_lo));
    r.add("sigma_inf^2>max{mu_inf*beta_sup/Lambda_sup,beta_sup^2/(2(mu+gamma+eps)_inf)}", s2lo - strong_noise_floor);

    std::optional<double> rate;
    if (r.all({"sigma_inf^2<=mu_inf*beta_sup/Lambda_sup", "r_tilde<1"})) {
        rate = removal_lo * (1.0 - r_tilde);
    } else if (r.all({"sigma_inf^2>max{mu_inf*beta_sup/Lambda_sup,beta_sup^2/(2(mu+gamma+eps)_inf)}"})) {
        rate = removal_lo - b.beta.sup * b.beta.sup / (2.0 * s2lo);
    }

    // Persistence.
    const double removal_hi = mhi + b.gamma.sup + b.epsilon.sup;
    const double r_pers = b.beta.inf * Llo / (mhi * removal_hi) - s2hi * Lhi * Lhi / (2.0 * mlo * mlo * removal_hi);
    r.r_tilde_persistence = r_pers;
    r.add("r_tilde_persistence>1", r_pers - 1.0);
    const bool persistent = r.all({"r_tilde_persistence>1"}) && b.beta.inf > 0.0;

    if (rate && *rate > 0.0 && !persistent) {
        r.classification = Classification::extinct;
        r.extinction_rate_lb = rate;
    } else if (persistent && !rate) {
        r.classification = Classification::persistent;
        r.lambda0 = b.beta.inf * removal_hi / mhi;
        r.lambda = b.beta.inf * Llo / mhi - removal_hi - s2hi * Lhi * Lhi / (2.0 * mlo * mlo);
        r.mean_infected_lb = mhi * (r_pers - 1.0) / b.beta.inf;
    }
    return r;
}

/// Truncated population model (a): persistence in mean.
inline CriteriaReport ex34a_persistence(const Ex34aBounds &b) {
    CriteriaReport r;
    r.model = "ex34a";
    r.add("mu_sup<gamma2_inf", b.gamma2.inf - b.mu.sup);
    r.add("h2,g2<1", std::min(1.0 - b.h2, 1.0 - b.g2));
    if (!r.all({"h2,g2<1"})) return r;
    const double growth = std::min(b.M, b.gamma2.inf - b.mu.sup);
    const double s2 = b.sigma1.sup * b.sigma1.sup + b.sigma2.sup * b.sigma2.sup;
    const double jumps = b.h1 - std::log((1.0 - b.h2) * (1.0 - b.g2));
    r.add("sigma1^2+sigma2^2+2*jumps<2*min{M,gamma2_inf-mu_sup}", 2.0 * growth - (s2 + 2.0 * jumps));
    if (!r.all({"mu_sup<gamma2_inf", "sigma1^2+sigma2^2+2*jumps<2*min{M,gamma2_inf-mu_sup}"})) return r;
    const double lambda0 = b.gamma3.sup + 1.0;
    const double lambda = growth - (0.5 * s2 + jumps);
    r.classification = Classification::persistent;
    r.lambda0 = lambda0;
    r.lambda = lambda;
    r.mean_infected_lb = lambda / lambda0;
    return r;
}

/// Truncated population model (b): extinction.
inline CriteriaReport ex34b_extinction(const Ex34bBounds &b) {
    CriteriaReport r;
    r.model = "ex34b";
    const double rate = b.gamma2.inf + b.mu.inf - b.beta.sup - 2.0 * b.g1;
    r.add("beta_sup+2g1<gamma2_inf+mu_inf", rate);
    if (r.all({"beta_sup+2g1<gamma2_inf+mu_inf"})) {
        r.classification = Classification::extinct;
        r.extinction_rate_lb = rate;
    }
    return r;
}

// =============================================================================
// Grid estimates of the extinction exponent
// =============================================================================

struct AlphaGrid {
    std::vector<double> times;
    std::vector<State> states;
    std::size_t quadrature_nodes = 1000; ///< per segment of each jump region
};

struct AlphaEstimate {
    double alpha = -std::numeric_limits<double>::infinity();
    double t_at_max = 0.0;
    double drift_term = 0.0;      ///< sup over states of the drift/diffusion bracket
    double small_jump_term = 0.0; ///< int_{|u|<1} sup [ln(1 + h2/y) - h2/y] nu(du)
    double large_jump_term = 0.0; ///< int_{|u|>=1} sup ln(1 + g2/y) nu(du)
};

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

/// n x n points of the simplex with y in [y_min, 1 - y_min] and x, z > 0.
inline std::vector<State> simplex_state_grid(std::size_t n, double y_min = 1e-3) {
    std::vector<State> out;
    out.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = n == 1 ? y_min : y_min + (1.0 - 2.0 * y_min) * static_cast<double>(i) / static_cast<double>(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            const double x = (1.0 - y) * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
            out.push_back({x, y, 1.0 - y - x});
        }
    }
    return out;
}

/// n^3 log-spaced points of [lo, hi]^3 with y >= y_min.
inline std::vector<State> octant_state_grid(std::size_t n, double lo, double hi, double y_min = 1e-3) {
    std::vector<double> axis(n), yaxis(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        axis[i] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
        const double ylo = std::max(lo, y_min);
        yaxis[i] = std::exp(std::log(ylo) + f * (std::log(hi) - std::log(ylo)));
    }
    std::vector<State> out;
    out.reserve(n * n * n);
    for (double x : axis)
        for (double y : yaxis)
            for (double z : axis) out.push_back({x, y, z});
    return out;
}

namespace detail {

template <class DriftTerm>
AlphaEstimate alpha_scan(const ModelSpec &model, const AlphaGrid &grid, DriftTerm &&drift_term) {
    if (grid.times.empty() || grid.states.empty()) throw std::invalid_argument("alpha estimate: empty grid");
    const LevyMeasure &m = model.measure();
    auto nodes = [&](JumpRegion r) {
        std::vector<std::pair<double, double>> q;
        if (m.region_mass(r) == 0.0) return q;
        if (!model.coefficients().mark_dependent()) {
            const auto &seg = m.segments(r).front();
            q.emplace_back(0.5 * (seg.lo + seg.hi), m.region_mass(r));
            return q;
        }
        return m.quadrature(r, grid.quadrature_nodes);
    };
    const auto small_nodes = nodes(JumpRegion::small);
    const auto large_nodes = nodes(JumpRegion::large);
    std::vector<Vec3> cols(static_cast<std::size_t>(model.brownian_dim()));
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    AlphaEstimate best;
    for (double t : grid.times) {
        const Frame f = model.frame(t);
        double dterm = kNegInf;
        for (const State &s : grid.states) {
            model.diffusion(f, s, cols);
            double var = 0.0;
            for (const Vec3 &c : cols) var += c[1] * c[1];
            dterm = std::max(dterm, drift_term(f, s, var));
        }
        auto jump_term = [&](const std::vector<std::pair<double, double>> &q, JumpRegion r) {
            double total = 0.0;
            for (const auto &[u, w] : q) {
                double sup = kNegInf;
                for (const State &s : grid.states) {
                    const double h = (r == JumpRegion::small ? model.small_jump(f, s, u) : model.large_jump(f, s, u))[1];
                    const double ratio = h / s.y;
                    if (!(1.0 + ratio > 0.0)) throw DomainError("alpha estimate: 1 + jump/y <= 0");
                    const double v = r == JumpRegion::small ? std::log1p(ratio) - ratio : std::log1p(ratio);
                    sup = std::max(sup, v);
                }
                total += w * sup;
            }
            return total;
        };
        const double sterm = jump_term(small_nodes, JumpRegion::small);
        const double lterm = jump_term(large_nodes, JumpRegion::large);
        const double total = dterm + sterm + lterm;
        if (total > best.alpha) best = {total, t, dterm, sterm, lterm};
    }
    return best;
}

} // namespace detail

/// Grid estimate of the extinction exponent
///
///   alpha = limsup_t { sup_s [b2/y - sum_j sigma_2j^2 / (2 y^2)]
///                      + int_{|u|<1} sup_s [ln(1 + h2/y) - h2/y] nu(du)
///                      + int_{|u|>=1} sup_s ln(1 + g2/y) nu(du) },
///
/// taken as the max over grid.times. The sups run over grid.states only, so
/// the result is a lower estimate of the true value; states with small y are
/// what the grid's y_min cuts off.
inline AlphaEstimate generic_alpha_estimate(const ModelSpec &model, const AlphaGrid &grid) {
    return detail::alpha_scan(model, grid, [&](const Frame &f, const State &s, double var) {
        return model.infected_growth_rate(f, s) - var / (2.0 * s.y * s.y);
    });
}

/// The strengthened exponent alpha* >= alpha for models whose infected drift
/// splits as gain - loss with both parts non-negative: the drift bracket is
/// replaced by sup_s [gain^2 / (2 sum_j sigma_2j^2) - loss / y].
inline AlphaEstimate alpha_star_estimate(const ModelSpec &model, const AlphaGrid &grid) {
    return detail::alpha_scan(model, grid, [&](const Frame &f, const State &s, double var) {
        const auto split = model.infected_drift_split(f, s);
        if (!split) throw std::invalid_argument("alpha_star_estimate: model '" + model.name() + "' has no drift split");
        if (var == 0.0)
            return split->gain > 0.0 ? std::numeric_limits<double>::infinity() : -split->loss_per_capita;
        return split->gain * split->gain / (2.0 * var) - split->loss_per_capita;
    });
}

} // namespace ussir
