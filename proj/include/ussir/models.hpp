// USSIR coefficient sets.
//
//   dX_i = b_i dt + sum_j sigma_ij dB^j + int_{|u|<1} h_i Ntilde(dt,du) + int_{|u|>=1} g_i N(dt,du)
//
// A ModelSpec bundles the coefficient functions with the state domain, the
// Brownian dimension and the intensity measure. The five worked systems are
// built from named time coefficients; `build_custom` takes raw expressions.
#pragma once

#include "error.hpp"
#include "expr.hpp"
#include "levy.hpp"
#include "rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ussir {

using Vec3 = std::array<double, 3>;
using expr::TimeFunction;

// =============================================================================
// State and domain
// =============================================================================

/// Susceptible, infected, recovered. Proportions on the simplex domain,
/// population counts (millions) on the octant domain.
struct State {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double operator[](std::size_t i) const { return i == 0 ? x : i == 1 ? y : z; }
    double sum() const { return x + y + z; }
    friend bool operator==(const State &, const State &) = default;
};

enum class Domain { simplex, octant };

inline const char *to_string(Domain d) { return d == Domain::simplex ? "simplex" : "octant"; }

inline constexpr double kDefaultSimplexTol = 1e-9;

inline bool admissible(const State &s, Domain d, double simplex_tol = kDefaultSimplexTol) {
    for (double v : {s.x, s.y, s.z})
        if (!(v > 0.0) || !std::isfinite(v)) return false;
    return d == Domain::octant || std::abs(s.sum() - 1.0) <= simplex_tol;
}

/// x* = x ^ 1
inline double star(double x) { return std::min(x, 1.0); }
/// x-dagger = x ^ M
inline double dagger(double x, double cap) { return std::min(x, cap); }

// =============================================================================
// Coefficient interface
// =============================================================================

/// Time coefficients evaluated once per step and shared by every coefficient
/// call at that time.
struct Frame {
    static constexpr std::size_t kMaxParams = 16;
    double t = 0.0;
    std::array<double, kMaxParams> p{};
};

/// b_2 = gain - loss with gain, loss >= 0; `loss_per_capita` is loss / y.
struct DriftSplit {
    double gain = 0.0;
    double loss_per_capita = 0.0;
};

class Coefficients {
public:
    virtual ~Coefficients() = default;

    virtual Frame frame(double t) const {
        Frame f;
        f.t = t;
        return f;
    }
    virtual Vec3 drift(const Frame &f, const State &s) const = 0;
    /// Writes one column sigma_{.j} per Brownian component.
    virtual void diffusion(const Frame &f, const State &s, std::span<Vec3> columns) const = 0;
    virtual Vec3 small_jump(const Frame &f, const State &s, double u) const = 0;
    virtual Vec3 large_jump(const Frame &f, const State &s, double u) const = 0;

    /// False when h and g do not depend on the mark u.
    virtual bool mark_dependent() const { return true; }

    /// b_2 / y. Overridden where y cancels symbolically so the ratio stays
    /// finite as y -> 0.
    virtual double infected_growth_rate(const Frame &f, const State &s) const { return drift(f, s)[1] / s.y; }

    virtual std::optional<DriftSplit> infected_drift_split(const Frame &, const State &) const { return std::nullopt; }
};

// =============================================================================
// ModelSpec
// =============================================================================

/// Which parts of the dynamics a derived model keeps.
struct Components {
    bool drift = true;
    bool diffusion = true;
    bool jumps = true;
};

class ModelSpec {
public:
    ModelSpec(std::string name, Domain domain, int brownian_dim, LevyMeasure measure,
              std::shared_ptr<const Coefficients> coefficients, std::optional<double> truncation_cap = std::nullopt)
        : name_(std::move(name)), domain_(domain), brownian_dim_(brownian_dim), measure_(std::move(measure)),
          coefficients_(std::move(coefficients)), truncation_cap_(truncation_cap) {
        if (brownian_dim_ < 0) throw std::invalid_argument("ModelSpec: negative Brownian dimension");
        if (!coefficients_) throw std::invalid_argument("ModelSpec: null coefficients");
        if (!measure_.segments(JumpRegion::small).empty()) {
            const auto &seg = measure_.segments(JumpRegion::small)[0];
            small_probe_ = 0.5 * (seg.lo + seg.hi);
        }
    }

    const std::string &name() const { return name_; }
    Domain domain() const { return domain_; }
    int brownian_dim() const { return brownian_dim_; }
    const LevyMeasure &measure() const { return measure_; }
    const Coefficients &coefficients() const { return *coefficients_; }
    std::shared_ptr<const Coefficients> coefficients_ptr() const { return coefficients_; }
    std::optional<double> truncation_cap() const { return truncation_cap_; }

    Frame frame(double t) const { return coefficients_->frame(t); }

    Vec3 drift(const Frame &f, const State &s) const { return coefficients_->drift(f, s); }
    Vec3 drift(double t, const State &s) const { return drift(frame(t), s); }

    void diffusion(const Frame &f, const State &s, std::span<Vec3> columns) const {
        coefficients_->diffusion(f, s, columns);
    }
    std::vector<Vec3> diffusion(double t, const State &s) const {
        std::vector<Vec3> cols(static_cast<std::size_t>(brownian_dim_), Vec3{});
        diffusion(frame(t), s, cols);
        return cols;
    }

    Vec3 small_jump(const Frame &f, const State &s, double u) const { return coefficients_->small_jump(f, s, u); }
    Vec3 small_jump(double t, const State &s, double u) const { return small_jump(frame(t), s, u); }
    Vec3 large_jump(const Frame &f, const State &s, double u) const { return coefficients_->large_jump(f, s, u); }
    Vec3 large_jump(double t, const State &s, double u) const { return large_jump(frame(t), s, u); }

    /// int_{|u|<1} h_i nu(du), i = 1..3. Closed form h(u)·nu(small) when the
    /// jump coefficients ignore the mark, midpoint quadrature otherwise.
    Vec3 compensator(const Frame &f, const State &s) const {
        const double mass = measure_.region_mass(JumpRegion::small);
        if (mass == 0.0) return {0.0, 0.0, 0.0};
        if (!coefficients_->mark_dependent()) {
            Vec3 h = small_jump(f, s, small_probe_);
            for (double &v : h) v *= mass;
            return h;
        }
        Vec3 acc{0.0, 0.0, 0.0};
        for (const auto &[u, w] : measure_.quadrature(JumpRegion::small)) {
            const Vec3 h = small_jump(f, s, u);
            for (std::size_t i = 0; i < 3; ++i) acc[i] += w * h[i];
        }
        return acc;
    }

    double infected_growth_rate(const Frame &f, const State &s) const {
        return coefficients_->infected_growth_rate(f, s);
    }
    double infected_growth_rate(double t, const State &s) const { return infected_growth_rate(frame(t), s); }

    std::optional<DriftSplit> infected_drift_split(const Frame &f, const State &s) const {
        return coefficients_->infected_drift_split(f, s);
    }

    /// The same model with some parts switched off: the noise-free companion
    /// (drift only) or the drift-free noise panels.
    ModelSpec with_components(Components keep) const;

private:
    std::string name_;
    Domain domain_;
    int brownian_dim_;
    LevyMeasure measure_;
    std::shared_ptr<const Coefficients> coefficients_;
    std::optional<double> truncation_cap_;
    double small_probe_ = 0.5;
};

/// int_{|u|<1} h_i(t, state, u) nu(du) for i = 1, 2, 3.
inline Vec3 compensator_integral(const ModelSpec &model, double t, const State &s) {
    return model.compensator(model.frame(t), s);
}

namespace detail {

class Restricted final : public Coefficients {
public:
    Restricted(std::shared_ptr<const Coefficients> inner, Components keep) : inner_(std::move(inner)), keep_(keep) {}

    Frame frame(double t) const override { return inner_->frame(t); }
    Vec3 drift(const Frame &f, const State &s) const override {
        return keep_.drift ? inner_->drift(f, s) : Vec3{0.0, 0.0, 0.0};
    }
    void diffusion(const Frame &f, const State &s, std::span<Vec3> columns) const override {
        if (keep_.diffusion) inner_->diffusion(f, s, columns);
        else std::fill(columns.begin(), columns.end(), Vec3{0.0, 0.0, 0.0});
    }
    Vec3 small_jump(const Frame &f, const State &s, double u) const override {
        return keep_.jumps ? inner_->small_jump(f, s, u) : Vec3{0.0, 0.0, 0.0};
    }
    Vec3 large_jump(const Frame &f, const State &s, double u) const override {
        return keep_.jumps ? inner_->large_jump(f, s, u) : Vec3{0.0, 0.0, 0.0};
    }
    bool mark_dependent() const override { return keep_.jumps && inner_->mark_dependent(); }
    double infected_growth_rate(const Frame &f, const State &s) const override {
        return keep_.drift ? inner_->infected_growth_rate(f, s) : 0.0;
    }

private:
    std::shared_ptr<const Coefficients> inner_;
    Components keep_;
};

} // namespace detail

inline ModelSpec ModelSpec::with_components(Components keep) const {
    std::string suffix;
    if (!keep.drift) suffix += "-nodrift";
    if (!keep.diffusion) suffix += "-nodiffusion";
    if (!keep.jumps) suffix += "-nojumps";
    return ModelSpec(name_ + suffix, domain_, keep.diffusion ? brownian_dim_ : 0,
                     keep.jumps ? measure_ : LevyMeasure::none(),
                     std::make_shared<detail::Restricted>(coefficients_, keep), truncation_cap_);
}

// =============================================================================
// Worked systems
// =============================================================================

/// Whether builders enforce the example's hypotheses.
enum class Check { enforce, skip };

/// Proportions model with power-law transmission beta X^xi Y / (1 + phi).
struct Ex1Params {
    TimeFunction beta, gamma, xi, sigma1, sigma2, phi1, phi2, phi3;
    double h1 = 0.0, h2 = 0.0, g1 = 0.0, g2 = 0.0;
    LevyMeasure measure;
};

struct Ex1bParams {
    TimeFunction beta, gamma1, gamma2, sigma;
    double h1 = 0.0, h2 = 0.0, g1 = 0.0, g2 = 0.0;
    LevyMeasure measure;
};

/// Population model with demography and an extra disease death rate.
struct XcParams {
    TimeFunction Lambda, mu, beta, gamma, epsilon, sigma;
};

struct Ex34aParams {
    TimeFunction Lambda, mu, beta, gamma1, gamma2, gamma3, gamma4, xi, sigma1, sigma2, phi1, phi2, phi3;
    double h1 = 0.0, h2 = 0.0, h3 = 0.0, g1 = 0.0, g2 = 0.0;
    double M = 1.0;
    LevyMeasure measure;
};

struct Ex34bParams {
    TimeFunction Lambda, mu, beta, gamma1, gamma2, sigma;
    double h1 = 0.0, h2 = 0.0, h3 = 0.0, g1 = 0.0, g2 = 0.0, g3 = 0.0;
    double M = 1.0;
    LevyMeasure measure;
};

namespace detail {

inline void require_jump_caps(std::initializer_list<std::pair<const char *, double>> caps, const char *model) {
    for (const auto &[name, v] : caps) {
        if (!(v >= 0.0) || !(v < 1.0))
            throw ConfigError(std::string(model) + ": jump coefficient " + name + " = " + std::to_string(v) +
                              " must lie in [0, 1)");
    }
}

inline void require_xi(const TimeFunction &xi, const char *model) {
    const auto b = expr::bounds(xi);
    if (b.inf < 1.0)
        throw ConfigError(std::string(model) + ": inf xi = " + std::to_string(b.inf) + " must be >= 1");
}

inline void require_cap(double M, const char *model) {
    if (!(M > 0.0) || !std::isfinite(M)) throw ConfigError(std::string(model) + ": truncation cap M must be positive");
}

template <std::size_t N> Frame eval_frame(double t, const std::array<TimeFunction, N> &fns) {
    static_assert(N <= Frame::kMaxParams);
    Frame f;
    f.t = t;
    for (std::size_t i = 0; i < N; ++i) f.p[i] = fns[i](t);
    return f;
}

class Ex1 final : public Coefficients {
public:
    enum P { beta, gamma, xi, s1, s2, p1, p2, p3, count };

    explicit Ex1(const Ex1Params &p)
        : fns_{p.beta, p.gamma, p.xi, p.sigma1, p.sigma2, p.phi1, p.phi2, p.phi3}, h1_(p.h1), h2_(p.h2), g1_(p.g1),
          g2_(p.g2) {}

    Frame frame(double t) const override { return eval_frame(t, fns_); }

    Vec3 drift(const Frame &f, const State &s) const override {
        const double inc = incidence(f, s);
        return {-inc, inc - f.p[gamma] * s.y, f.p[gamma] * s.y};
    }
    void diffusion(const Frame &f, const State &s, std::span<Vec3> c) const override {
        const double a = f.p[s1] * s.x * s.y / damping(f, s);
        const double b = f.p[s2] * s.y * s.z;
        c[0] = {-a, a, 0.0};
        c[1] = {0.0, b, -b};
    }
    Vec3 small_jump(const Frame &, const State &s, double) const override {
        return {-h1_ * s.x * s.y, h1_ * s.x * s.y - h2_ * s.y * s.z, h2_ * s.y * s.z};
    }
    Vec3 large_jump(const Frame &, const State &s, double) const override {
        return {-g1_ * s.x * s.y, g1_ * s.x * s.y - g2_ * s.y * s.z, g2_ * s.y * s.z};
    }
    bool mark_dependent() const override { return false; }
    double infected_growth_rate(const Frame &f, const State &s) const override {
        return f.p[beta] * std::pow(s.x, f.p[xi]) / damping(f, s) - f.p[gamma];
    }
    std::optional<DriftSplit> infected_drift_split(const Frame &f, const State &s) const override {
        return DriftSplit{incidence(f, s), f.p[gamma]};
    }

private:
    static double damping(const Frame &f, const State &s) {
        return 1.0 + f.p[p1] * s.x + f.p[p2] * s.y + f.p[p3] * s.x * s.y;
    }
    static double incidence(const Frame &f, const State &s) {
        return f.p[beta] * std::pow(s.x, f.p[xi]) * s.y / damping(f, s);
    }

    std::array<TimeFunction, count> fns_;
    double h1_, h2_, g1_, g2_;
};

class Ex1b final : public Coefficients {
public:
    enum P { beta, gamma1, gamma2, sigma, count };

    explicit Ex1b(const Ex1bParams &p)
        : fns_{p.beta, p.gamma1, p.gamma2, p.sigma}, h1_(p.h1), h2_(p.h2), g1_(p.g1), g2_(p.g2) {}

    Frame frame(double t) const override { return eval_frame(t, fns_); }

    Vec3 drift(const Frame &f, const State &s) const override {
        return {-f.p[beta] * s.x * s.y, infected_growth_rate(f, s) * s.y, (f.p[gamma1] - f.p[gamma2] * s.z) * s.y};
    }
    void diffusion(const Frame &f, const State &s, std::span<Vec3> c) const override {
        const double a = f.p[sigma] * s.x * s.y * s.z;
        c[0] = {-a, 2.0 * a, -a};
    }
    Vec3 small_jump(const Frame &, const State &s, double) const override {
        const double xyz = s.x * s.y * s.z;
        return {-h1_ * xyz, (h1_ - h2_) * xyz, h2_ * xyz};
    }
    Vec3 large_jump(const Frame &, const State &s, double) const override {
        const double xyz = s.x * s.y * s.z;
        return {-g1_ * xyz, (g1_ - g2_) * xyz, g2_ * xyz};
    }
    bool mark_dependent() const override { return false; }
    double infected_growth_rate(const Frame &f, const State &s) const override {
        return f.p[beta] * s.x - f.p[gamma1] + f.p[gamma2] * s.z;
    }
    std::optional<DriftSplit> infected_drift_split(const Frame &f, const State &s) const override {
        return DriftSplit{(f.p[beta] * s.x + f.p[gamma2] * s.z) * s.y, f.p[gamma1]};
    }

private:
    std::array<TimeFunction, count> fns_;
    double h1_, h2_, g1_, g2_;
};

class Xc final : public Coefficients {
public:
    enum P { Lambda, mu, beta, gamma, epsilon, sigma, count };

    explicit Xc(const XcParams &p) : fns_{p.Lambda, p.mu, p.beta, p.gamma, p.epsilon, p.sigma} {}

    Frame frame(double t) const override { return eval_frame(t, fns_); }

    Vec3 drift(const Frame &f, const State &s) const override {
        const double inc = f.p[beta] * s.x * s.y;
        return {f.p[Lambda] - f.p[mu] * s.x - inc, inc - removal(f) * s.y, f.p[gamma] * s.y - f.p[mu] * s.z};
    }
    void diffusion(const Frame &f, const State &s, std::span<Vec3> c) const override {
        const double a = f.p[sigma] * s.x * s.y;
        c[0] = {-a, a, 0.0};
    }
    Vec3 small_jump(const Frame &, const State &, double) const override { return {0.0, 0.0, 0.0}; }
    Vec3 large_jump(const Frame &, const State &, double) const override { return {0.0, 0.0, 0.0}; }
    bool mark_dependent() const override { return false; }
    double infected_growth_rate(const Frame &f, const State &s) const override {
        return f.p[beta] * s.x - removal(f);
    }
    std::optional<DriftSplit> infected_drift_split(const Frame &f, const State &s) const override {
        return DriftSplit{f.p[beta] * s.x * s.y, removal(f)};
    }

private:
    static double removal(const Frame &f) { return f.p[mu] + f.p[gamma] + f.p[epsilon]; }

    std::array<TimeFunction, count> fns_;
};

class Ex34a final : public Coefficients {
public:
    enum P { Lambda, mu, beta, gamma1, gamma2, gamma3, gamma4, xi, s1, s2, p1, p2, p3, count };

    explicit Ex34a(const Ex34aParams &p)
        : fns_{p.Lambda, p.mu,  p.beta,   p.gamma1, p.gamma2, p.gamma3, p.gamma4,
               p.xi,     p.sigma1, p.sigma2, p.phi1,   p.phi2,   p.phi3},
          h1_(p.h1), h2_(p.h2), h3_(p.h3), g1_(p.g1), g2_(p.g2), M_(p.M) {}

    Frame frame(double t) const override { return eval_frame(t, fns_); }

    Vec3 drift(const Frame &f, const State &s) const override {
        const double xd = dagger(s.x, M_), yd = dagger(s.y, M_), zd = dagger(s.z, M_);
        const double inc = incidence(f, s);
        return {f.p[Lambda] - f.p[mu] * xd - inc + f.p[gamma1] * zd,
                inc + (f.p[gamma2] - f.p[mu] - f.p[gamma3] * yd) * yd,
                f.p[gamma4] * yd - (f.p[mu] + f.p[gamma1]) * zd};
    }
    void diffusion(const Frame &f, const State &s, std::span<Vec3> c) const override {
        const double xd = dagger(s.x, M_), yd = dagger(s.y, M_), zd = dagger(s.z, M_);
        const double a = f.p[s1] * xd * yd / damping(f, s);
        const double b = f.p[s2] * yd * zd;
        c[0] = {-a, a, 0.0};
        c[1] = {0.0, b, -b};
    }
    Vec3 small_jump(const Frame &, const State &s, double) const override {
        const double xy = star(s.x) * star(s.y), yz = star(s.y) * star(s.z), xz = star(s.x) * star(s.z);
        return {-(h1_ * xy - h3_ * xz), h1_ * xy - h2_ * yz, h2_ * yz - h3_ * xz};
    }
    Vec3 large_jump(const Frame &, const State &s, double) const override {
        const double xy = star(s.x) * star(s.y), yz = star(s.y) * star(s.z);
        return {-g1_ * xy, g1_ * xy - g2_ * yz, g2_ * yz};
    }
    bool mark_dependent() const override { return false; }
    double infected_growth_rate(const Frame &f, const State &s) const override {
        if (s.y > M_) return drift(f, s)[1] / s.y;
        const double xd = dagger(s.x, M_);
        return f.p[beta] * xd * std::pow(s.y, f.p[xi] - 1.0) / damping(f, s) + f.p[gamma2] - f.p[mu] -
               f.p[gamma3] * s.y;
    }
    std::optional<DriftSplit> infected_drift_split(const Frame &f, const State &s) const override {
        const double yd = dagger(s.y, M_);
        return DriftSplit{incidence(f, s) + f.p[gamma2] * yd, (f.p[mu] + f.p[gamma3] * yd) * (yd / s.y)};
    }

private:
    // phi takes the untruncated state.
    static double damping(const Frame &f, const State &s) {
        return 1.0 + f.p[p1] * s.x + f.p[p2] * s.y + f.p[p3] * s.x * s.y;
    }
    double incidence(const Frame &f, const State &s) const {
        return f.p[beta] * dagger(s.x, M_) * std::pow(dagger(s.y, M_), f.p[xi]) / damping(f, s);
    }

    std::array<TimeFunction, count> fns_;
    double h1_, h2_, h3_, g1_, g2_, M_;
};

class Ex34b final : public Coefficients {
public:
    enum P { Lambda, mu, beta, gamma1, gamma2, sigma, count };

    explicit Ex34b(const Ex34bParams &p)
        : fns_{p.Lambda, p.mu, p.beta, p.gamma1, p.gamma2, p.sigma}, h1_(p.h1), h2_(p.h2), h3_(p.h3), g1_(p.g1),
          g2_(p.g2), g3_(p.g3), M_(p.M) {}

    Frame frame(double t) const override { return eval_frame(t, fns_); }

    Vec3 drift(const Frame &f, const State &s) const override {
        const double xd = dagger(s.x, M_), yd = dagger(s.y, M_), zd = dagger(s.z, M_);
        return {f.p[Lambda] - f.p[mu] * xd - f.p[beta] * xd * yd + f.p[gamma1] * zd,
                f.p[beta] * xd * yd - (f.p[mu] + f.p[gamma2]) * yd,
                f.p[gamma2] * yd - (f.p[mu] + f.p[gamma1]) * zd};
    }
    void diffusion(const Frame &f, const State &s, std::span<Vec3> c) const override {
        const double a = f.p[sigma] * dagger(s.x, M_) * dagger(s.y, M_) * dagger(s.z, M_);
        c[0] = {-a, 2.0 * a, -a};
    }
    Vec3 small_jump(const Frame &, const State &s, double) const override {
        const double p = star(s.x) * star(s.y) * star(s.z);
        return {-(h1_ - h3_) * p, (h1_ - h2_) * p, (h2_ - h3_) * p};
    }
    Vec3 large_jump(const Frame &, const State &s, double) const override {
        const double p = star(s.x) * star(s.y) * star(s.z);
        return {-(g1_ - g3_) * p, (g1_ - g2_) * p, (g2_ - g3_) * p};
    }
    bool mark_dependent() const override { return false; }
    double infected_growth_rate(const Frame &f, const State &s) const override {
        if (s.y > M_) return drift(f, s)[1] / s.y;
        return f.p[beta] * dagger(s.x, M_) - (f.p[mu] + f.p[gamma2]);
    }
    std::optional<DriftSplit> infected_drift_split(const Frame &f, const State &s) const override {
        const double yd = dagger(s.y, M_);
        return DriftSplit{f.p[beta] * dagger(s.x, M_) * yd, (f.p[mu] + f.p[gamma2]) * (yd / s.y)};
    }

private:
    std::array<TimeFunction, count> fns_;
    double h1_, h2_, h3_, g1_, g2_, g3_, M_;
};

} // namespace detail

inline ModelSpec build_ex1(const Ex1Params &p, Check check = Check::enforce) {
    if (check == Check::enforce) {
        detail::require_xi(p.xi, "ex1");
        detail::require_jump_caps({{"h1", p.h1}, {"h2", p.h2}, {"g1", p.g1}, {"g2", p.g2}}, "ex1");
    }
    return ModelSpec("ex1", Domain::simplex, 2, p.measure, std::make_shared<detail::Ex1>(p));
}

inline ModelSpec build_ex1b(const Ex1bParams &p, Check check = Check::enforce) {
    if (check == Check::enforce)
        detail::require_jump_caps({{"h1", p.h1}, {"h2", p.h2}, {"g1", p.g1}, {"g2", p.g2}}, "ex1b");
    return ModelSpec("ex1b", Domain::simplex, 1, p.measure, std::make_shared<detail::Ex1b>(p));
}

inline ModelSpec build_xc(const XcParams &p, Check check = Check::enforce) {
    if (check == Check::enforce) {
        const auto mu = expr::bounds(p.mu);
        if (!(mu.inf > 0.0)) throw ConfigError("xc: inf mu = " + std::to_string(mu.inf) + " must be positive");
    }
    return ModelSpec("xc", Domain::octant, 1, LevyMeasure::none(), std::make_shared<detail::Xc>(p));
}

inline ModelSpec build_ex34a(const Ex34aParams &p, Check check = Check::enforce) {
    if (check == Check::enforce) {
        detail::require_cap(p.M, "ex34a");
        detail::require_xi(p.xi, "ex34a");
        detail::require_jump_caps({{"h1", p.h1}, {"h2", p.h2}, {"h3", p.h3}, {"g1", p.g1}, {"g2", p.g2}}, "ex34a");
    }
    return ModelSpec("ex34a", Domain::octant, 2, p.measure, std::make_shared<detail::Ex34a>(p), p.M);
}

inline ModelSpec build_ex34b(const Ex34bParams &p, Check check = Check::enforce) {
    if (check == Check::enforce) {
        detail::require_cap(p.M, "ex34b");
        detail::require_jump_caps(
            {{"h1", p.h1}, {"h2", p.h2}, {"h3", p.h3}, {"g1", p.g1}, {"g2", p.g2}, {"g3", p.g3}}, "ex34b");
    }
    return ModelSpec("ex34b", Domain::octant, 1, p.measure, std::make_shared<detail::Ex34b>(p), p.M);
}

// =============================================================================
// Custom model from expressions
// =============================================================================

/// b_i and sigma_ij are expressions in t, x, y, z; h_i and g_i may also use
/// the mark u. `sigma` holds one column (sigma_1j, sigma_2j, sigma_3j) per
/// Brownian component.
struct CustomParams {
    Domain domain = Domain::simplex;
    std::array<TimeFunction, 3> b;
    std::vector<std::array<TimeFunction, 3>> sigma;
    std::array<TimeFunction, 3> h;
    std::array<TimeFunction, 3> g;
    LevyMeasure measure;
};

namespace detail {

class Custom final : public Coefficients {
public:
    explicit Custom(CustomParams p) : p_(std::move(p)) {
        for (const auto &f : p_.h) mark_dependent_ = mark_dependent_ || f.depends_on(expr::Var::u);
        for (const auto &f : p_.g) mark_dependent_ = mark_dependent_ || f.depends_on(expr::Var::u);
    }

    Vec3 drift(const Frame &f, const State &s) const override { return eval3(p_.b, f.t, s, 0.0); }
    void diffusion(const Frame &f, const State &s, std::span<Vec3> c) const override {
        for (std::size_t j = 0; j < c.size(); ++j) c[j] = eval3(p_.sigma[j], f.t, s, 0.0);
    }
    Vec3 small_jump(const Frame &f, const State &s, double u) const override { return eval3(p_.h, f.t, s, u); }
    Vec3 large_jump(const Frame &f, const State &s, double u) const override { return eval3(p_.g, f.t, s, u); }
    bool mark_dependent() const override { return mark_dependent_; }

private:
    static Vec3 eval3(const std::array<TimeFunction, 3> &fns, double t, const State &s, double u) {
        const expr::VarValues v{t, s.x, s.y, s.z, u};
        return {fns[0].eval(v), fns[1].eval(v), fns[2].eval(v)};
    }

    CustomParams p_;
    bool mark_dependent_ = false;
};

} // namespace detail

ModelSpec build_custom(CustomParams p, Check check = Check::enforce);

// =============================================================================
// Structural checks
// =============================================================================

struct ConservationReport {
    std::size_t samples = 0;
    double max_drift_sum = 0.0;
    double max_diffusion_sum = 0.0;
    double max_small_jump_sum = 0.0;
    double max_large_jump_sum = 0.0;
    double tolerance = 1e-12;

    double max_deviation() const {
        return std::max({max_drift_sum, max_diffusion_sum, max_small_jump_sum, max_large_jump_sum});
    }
    bool ok() const { return max_deviation() <= tolerance; }
};

struct PositivityReport {
    std::size_t samples = 0;
    double min_ratio = std::numeric_limits<double>::infinity();
    std::string worst; ///< which of the six ratios attained min_ratio
    bool ok() const { return min_ratio > 0.0; }
};

/// Box for sampling octant states, log-uniform per component.
struct OctantBox {
    double lo = 1e-3;
    double hi = 10.0;
};

/// Uniform (Dirichlet(1,1,1)) point on the open simplex.
inline State sample_simplex(Rng &rng) {
    const double a = -std::log(rng.uniform()), b = -std::log(rng.uniform()), c = -std::log(rng.uniform());
    const double s = a + b + c;
    return {a / s, b / s, c / s};
}

inline State sample_octant(Rng &rng, OctantBox box = {}) {
    const double l = std::log(box.lo), h = std::log(box.hi);
    return {std::exp(rng.uniform(l, h)), std::exp(rng.uniform(l, h)), std::exp(rng.uniform(l, h))};
}

inline State sample_state(Domain d, Rng &rng, OctantBox box = {}) {
    return d == Domain::simplex ? sample_simplex(rng) : sample_octant(rng, box);
}

/// Assumption A3: the compartment sums of b, every sigma column, h and g
/// vanish on the simplex. Samples t uniformly on [0, t_max].
inline ConservationReport check_conservation(const ModelSpec &model, std::size_t samples, Rng &rng,
                                             double t_max = 100.0) {
    if (model.domain() != Domain::simplex)
        throw std::invalid_argument("check_conservation: model '" + model.name() + "' is not on the simplex");
    ConservationReport rep;
    rep.samples = samples;
    const auto &measure = model.measure();
    std::vector<Vec3> cols(static_cast<std::size_t>(model.brownian_dim()));
    auto sum = [](const Vec3 &v) { return std::abs(v[0] + v[1] + v[2]); };
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = rng.uniform(0.0, t_max);
        const State s = sample_simplex(rng);
        const Frame f = model.frame(t);
        rep.max_drift_sum = std::max(rep.max_drift_sum, sum(model.drift(f, s)));
        model.diffusion(f, s, cols);
        for (const Vec3 &c : cols) rep.max_diffusion_sum = std::max(rep.max_diffusion_sum, sum(c));
        if (measure.region_mass(JumpRegion::small) > 0.0) {
            const double u = measure.sample_mark(JumpRegion::small, rng);
            rep.max_small_jump_sum = std::max(rep.max_small_jump_sum, sum(model.small_jump(f, s, u)));
        }
        if (measure.region_mass(JumpRegion::large) > 0.0) {
            const double u = measure.sample_mark(JumpRegion::large, rng);
            rep.max_large_jump_sum = std::max(rep.max_large_jump_sum, sum(model.large_jump(f, s, u)));
        }
    }
    return rep;
}

/// Assumptions A4/B3: 1 + h_i/x_i > 0 and 1 + g_i/x_i > 0 at sampled
/// admissible points.
inline PositivityReport check_positivity_ratios(const ModelSpec &model, std::size_t samples, Rng &rng,
                                                double t_max = 100.0, OctantBox box = {}) {
    static constexpr const char *names[2][3] = {{"1+h1/x", "1+h2/y", "1+h3/z"}, {"1+g1/x", "1+g2/y", "1+g3/z"}};
    PositivityReport rep;
    rep.samples = samples;
    const auto &measure = model.measure();
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = rng.uniform(0.0, t_max);
        const State s = sample_state(model.domain(), rng, box);
        const Frame f = model.frame(t);
        for (JumpRegion r : {JumpRegion::small, JumpRegion::large}) {
            Vec3 jump{0.0, 0.0, 0.0};
            if (measure.region_mass(r) > 0.0) {
                const double u = measure.sample_mark(r, rng);
                jump = r == JumpRegion::small ? model.small_jump(f, s, u) : model.large_jump(f, s, u);
            }
            for (std::size_t i = 0; i < 3; ++i) {
                const double ratio = 1.0 + jump[i] / s[i];
                if (ratio < rep.min_ratio) {
                    rep.min_ratio = ratio;
                    rep.worst = names[r == JumpRegion::small ? 0 : 1][i];
                }
            }
        }
    }
    return rep;
}

inline ModelSpec build_custom(CustomParams p, Check check) {
    const int n = static_cast<int>(p.sigma.size());
    const Domain domain = p.domain;
    LevyMeasure measure = p.measure;
    ModelSpec model("custom", domain, n, std::move(measure), std::make_shared<detail::Custom>(std::move(p)));
    if (check == Check::enforce) {
        Rng rng(stream_seed(0x5eed, 0));
        if (domain == Domain::simplex) {
            const auto cons = check_conservation(model, 1000, rng);
            if (!cons.ok())
                throw ConfigError("custom: compartment sums do not vanish on the simplex (max deviation " +
                                  std::to_string(cons.max_deviation()) + ")");
        }
        const auto pos = check_positivity_ratios(model, 1000, rng);
        if (!pos.ok())
            throw ConfigError("custom: jump ratio " + pos.worst + " reaches " + std::to_string(pos.min_ratio));
    }
    return model;
}

} // namespace ussir
