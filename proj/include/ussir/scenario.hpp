// Scenario files.
//
//   # comment
//   [model]
//   id = ex1
//   [params]
//   beta = "0.3 + 0.1*sin(4*t)"
//   [jumps]
//   h1 = 0.01
//   [measure]
//   support = (-2, 2)
//   [initial]
//   state = (0.8, 0.19, 0.01)
//   [sim]
//   dt = 0.001
//
// Values are numerals, bare words, double-quoted strings or parenthesised
// tuples of those. Custom models take tuples of expressions: b, s1, s2, ... under
// [params] and h, g under [jumps].
#pragma once

#include "criteria.hpp"
#include "error.hpp"
#include "expr.hpp"
#include "integrator.hpp"
#include "models.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ussir {

enum class ModelId { ex1, ex1b, xc, ex34a, ex34b, custom };

inline const char *to_string(ModelId m) {
    switch (m) {
    case ModelId::ex1: return "ex1";
    case ModelId::ex1b: return "ex1b";
    case ModelId::xc: return "xc";
    case ModelId::ex34a: return "ex34a";
    case ModelId::ex34b: return "ex34b";
    default: return "custom";
    }
}

struct ScenarioValue {
    enum class Kind { number, text, tuple };
    Kind kind = Kind::number;
    double number = 0.0;
    std::string text; ///< the numeral as written, or the unquoted string
    std::vector<ScenarioValue> items;
    std::size_t line = 0;
};

/// Grid for the generic exponent estimate reported for custom models.
struct EstimateConfig {
    double y_min = 1e-3;
    double t_lo = 0.0;
    double t_hi = 100.0;
    std::size_t t_points = 201;
    std::size_t grid = 0; ///< states per axis; 0 picks 200 (simplex) or 30 (octant)
    double box_hi = 10.0; ///< octant grid upper corner
};

struct ScenarioConfig {
    ModelId model = ModelId::ex1;
    Domain domain = Domain::simplex;
    std::map<std::string, std::string> params; ///< expression text per parameter
    std::map<std::string, double> jumps;
    std::map<std::string, std::array<std::string, 3>> vectors; ///< custom b, s1.., h, g
    double measure_lo = -2.0, measure_hi = 2.0, measure_density = 1.0;
    State initial;
    SimConfig sim;
    std::size_t paths = 50;
    double slack = 0.5;
    std::string out = "out";
    EstimateConfig estimate;
    std::filesystem::path source;

    LevyMeasure measure() const { return LevyMeasure::uniform(measure_lo, measure_hi, measure_density); }
};

/// Parameter names each model requires under [params] and [jumps].
struct RequiredKeys {
    std::vector<std::string> params;
    std::vector<std::string> jumps;
};

inline RequiredKeys required_keys(ModelId m) {
    switch (m) {
    case ModelId::ex1:
        return {{"beta", "gamma", "xi", "sigma1", "sigma2", "phi1", "phi2", "phi3"}, {"h1", "h2", "g1", "g2"}};
    case ModelId::ex1b: return {{"beta", "gamma1", "gamma2", "sigma"}, {"h1", "h2", "g1", "g2"}};
    case ModelId::xc: return {{"Lambda", "mu", "beta", "gamma", "epsilon", "sigma"}, {}};
    case ModelId::ex34a:
        return {{"Lambda", "mu", "beta", "gamma1", "gamma2", "gamma3", "gamma4", "xi", "sigma1", "sigma2", "phi1",
                 "phi2", "phi3", "M"},
                {"h1", "h2", "h3", "g1", "g2"}};
    case ModelId::ex34b:
        return {{"Lambda", "mu", "beta", "gamma1", "gamma2", "sigma", "M"}, {"h1", "h2", "h3", "g1", "g2", "g3"}};
    default: return {{"b"}, {"h", "g"}};
    }
}

inline Domain model_domain(ModelId m) {
    return m == ModelId::ex1 || m == ModelId::ex1b ? Domain::simplex : Domain::octant;
}

namespace detail {

class ScenarioLexer {
public:
    ScenarioLexer(std::string_view text, std::size_t line) : s_(text), line_(line) {}

    ScenarioValue value() {
        skip();
        ScenarioValue v = atom();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing text '" + std::string(s_.substr(pos_)) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string &msg) const { throw ConfigError(msg, line_); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    ScenarioValue atom() {
        ScenarioValue v;
        v.line = line_;
        if (pos_ >= s_.size()) fail("missing value");
        const char c = s_[pos_];
        if (c == '"') {
            const std::size_t end = s_.find('"', pos_ + 1);
            if (end == std::string_view::npos) fail("unterminated string");
            v.kind = ScenarioValue::Kind::text;
            v.text = std::string(s_.substr(pos_ + 1, end - pos_ - 1));
            pos_ = end + 1;
            return v;
        }
        if (c == '(') {
            ++pos_;
            v.kind = ScenarioValue::Kind::tuple;
            for (;;) {
                skip();
                v.items.push_back(atom());
                skip();
                if (pos_ < s_.size() && s_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                if (pos_ < s_.size() && s_[pos_] == ')') {
                    ++pos_;
                    return v;
                }
                fail("expected ',' or ')' in tuple");
            }
        }
        std::size_t end = pos_;
        while (end < s_.size() && s_[end] != ',' && s_[end] != ')' &&
               !std::isspace(static_cast<unsigned char>(s_[end])))
            ++end;
        const std::string tok(s_.substr(pos_, end - pos_));
        pos_ = end;
        if (!tok.empty() && (std::isalpha(static_cast<unsigned char>(tok[0])) || tok[0] == '_') &&
            std::all_of(tok.begin(), tok.end(), [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; })) {
            v.kind = ScenarioValue::Kind::text; // bare word, e.g. a model id
            v.text = tok;
            return v;
        }
        char *stop = nullptr;
        const double x = std::strtod(tok.c_str(), &stop);
        if (tok.empty() || stop != tok.c_str() + tok.size() || !std::isfinite(x))
            fail("expected a numeral, a word, a quoted string or a tuple, got '" + tok + "'");
        v.kind = ScenarioValue::Kind::number;
        v.number = x;
        v.text = tok;
        return v;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

/// Drops a trailing '#' comment that is not inside a string.
inline std::string strip_comment(const std::string &line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

inline double number_of(const ScenarioValue &v, const std::string &key) {
    if (v.kind != ScenarioValue::Kind::number) throw ConfigError(key + " must be a numeral", v.line);
    return v.number;
}

inline std::uint64_t count_of(const ScenarioValue &v, const std::string &key) {
    const double x = number_of(v, key);
    if (x < 0 || x != std::floor(x) || x > 9.007199254740992e15)
        throw ConfigError(key + " must be a non-negative integer", v.line);
    return static_cast<std::uint64_t>(x);
}

inline std::vector<double> numbers_of(const ScenarioValue &v, const std::string &key, std::size_t n) {
    if (v.kind != ScenarioValue::Kind::tuple || v.items.size() != n)
        throw ConfigError(key + " must be a tuple of " + std::to_string(n) + " numerals", v.line);
    std::vector<double> out;
    for (const auto &item : v.items) out.push_back(number_of(item, key));
    return out;
}

/// Numerals are accepted as constant expressions.
inline std::string expression_of(const ScenarioValue &v, const std::string &key, expr::VarSet vars) {
    if (v.kind == ScenarioValue::Kind::tuple) throw ConfigError(key + " must be a numeral or a quoted expression", v.line);
    try {
        (void)expr::TimeFunction::parse(v.text, vars);
    } catch (const ParseError &e) {
        throw ConfigError(key + ": " + e.what(), v.line);
    }
    return v.text;
}

inline std::array<std::string, 3> expressions_of(const ScenarioValue &v, const std::string &key, expr::VarSet vars) {
    if (v.kind != ScenarioValue::Kind::tuple || v.items.size() != 3)
        throw ConfigError(key + " must be a tuple of three expressions", v.line);
    return {expression_of(v.items[0], key, vars), expression_of(v.items[1], key, vars),
            expression_of(v.items[2], key, vars)};
}

inline std::string join(const std::vector<std::string> &v) {
    std::string out;
    for (const auto &s : v) out += (out.empty() ? "" : ", ") + s;
    return out;
}

} // namespace detail

/// Parses scenario text. `origin` only labels error messages.
inline ScenarioConfig parse_scenario(std::istream &in, const std::filesystem::path &origin = {}) {
    using detail::ScenarioLexer;
    struct Entry {
        ScenarioValue value;
        std::size_t line;
    };
    std::map<std::string, std::map<std::string, Entry>> sections;
    const std::set<std::string> known{"model", "params", "jumps", "measure", "initial", "sim", "criteria"};
    std::string section, raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", line_no);
            section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            if (!known.count(section)) throw ConfigError("unknown section [" + section + "]", line_no);
            sections[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        if (section.empty()) throw ConfigError("key outside any section", line_no);
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw ConfigError("empty key", line_no);
        if (sections[section].count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
        ScenarioValue v = ScenarioLexer(std::string_view(line).substr(eq + 1), line_no).value();
        sections[section].emplace(key, Entry{std::move(v), line_no});
    }

    ScenarioConfig cfg;
    cfg.source = origin;
    auto take = [&](const std::string &sec) -> std::map<std::string, Entry> & { return sections[sec]; };
    auto reject_unknown = [&](const std::string &sec, const std::set<std::string> &allowed) {
        for (const auto &[k, e] : take(sec))
            if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in [" + sec + "]", e.line);
    };

    // [model]
    {
        auto &m = take("model");
        reject_unknown("model", {"id", "domain"});
        if (!m.count("id")) throw ConfigError("[model] id is required (ex1, ex1b, xc, ex34a, ex34b, custom)");
        const ScenarioValue &id = m.at("id").value;
        const std::map<std::string, ModelId> ids{{"ex1", ModelId::ex1},     {"ex1b", ModelId::ex1b},
                                                 {"xc", ModelId::xc},       {"ex34a", ModelId::ex34a},
                                                 {"ex34b", ModelId::ex34b}, {"custom", ModelId::custom}};
        if (!ids.count(id.text)) throw ConfigError("unknown model id '" + id.text + "'", id.line);
        cfg.model = ids.at(id.text);
        cfg.domain = model_domain(cfg.model);
        if (m.count("domain")) {
            const ScenarioValue &d = m.at("domain").value;
            if (cfg.model != ModelId::custom) throw ConfigError("domain is fixed for built-in models", d.line);
            if (d.text == "simplex") cfg.domain = Domain::simplex;
            else if (d.text == "octant") cfg.domain = Domain::octant;
            else throw ConfigError("domain must be simplex or octant", d.line);
        }
    }

    const RequiredKeys req = required_keys(cfg.model);
    const std::string model_name = to_string(cfg.model);

    // [params] and [jumps]
    if (cfg.model == ModelId::custom) {
        const expr::VarSet state = expr::VarSet::state(), marked = expr::VarSet::state_and_mark();
        for (const auto &[k, e] : take("params")) {
            const bool column = k.size() > 1 && k[0] == 's' &&
                                std::all_of(k.begin() + 1, k.end(), [](char c) { return std::isdigit(c); });
            if (k != "b" && !column) throw ConfigError("unknown key '" + k + "' in [params] (custom takes b, s1, s2, ...)", e.line);
            cfg.vectors[k] = detail::expressions_of(e.value, k, state);
        }
        for (const auto &[k, e] : take("jumps")) {
            if (k != "h" && k != "g") throw ConfigError("unknown key '" + k + "' in [jumps] (custom takes h, g)", e.line);
            cfg.vectors[k] = detail::expressions_of(e.value, k, marked);
        }
        std::size_t columns = 0;
        while (cfg.vectors.count("s" + std::to_string(columns + 1))) ++columns;
        for (const auto &[k, e] : take("params"))
            if (k != "b" && (k[1] == '0' || std::stoul(k.substr(1)) > columns))
                throw ConfigError("diffusion columns must be numbered s1, s2, ... without gaps", e.line);
    } else {
        std::set<std::string> pk(req.params.begin(), req.params.end()), jk(req.jumps.begin(), req.jumps.end());
        for (const auto &[k, e] : take("params")) {
            if (!pk.count(k))
                throw ConfigError("unknown key '" + k + "' in [params]; " + model_name + " takes " + detail::join(req.params),
                                  e.line);
            cfg.params[k] = detail::expression_of(e.value, k, expr::VarSet::time_only());
        }
        for (const auto &[k, e] : take("jumps")) {
            if (!jk.count(k))
                throw ConfigError("unknown key '" + k + "' in [jumps]" +
                                      (req.jumps.empty() ? "; " + model_name + " has no jumps"
                                                         : "; " + model_name + " takes " + detail::join(req.jumps)),
                                  e.line);
            cfg.jumps[k] = detail::number_of(e.value, k);
        }
    }
    std::vector<std::string> missing;
    for (const auto &k : req.params)
        if (!cfg.params.count(k) && !cfg.vectors.count(k)) missing.push_back(k);
    for (const auto &k : req.jumps)
        if (!cfg.jumps.count(k) && !cfg.vectors.count(k)) missing.push_back(k);
    if (!missing.empty()) {
        std::vector<std::string> all = req.params;
        all.insert(all.end(), req.jumps.begin(), req.jumps.end());
        throw ConfigError("missing parameter(s) " + detail::join(missing) + "; model " + model_name + " requires " +
                          detail::join(all));
    }

    // [measure]
    {
        reject_unknown("measure", {"support", "density"});
        auto &m = take("measure");
        if (m.count("support")) {
            const auto v = detail::numbers_of(m.at("support").value, "support", 2);
            if (!(v[0] < v[1])) throw ConfigError("support needs lo < hi", m.at("support").line);
            cfg.measure_lo = v[0];
            cfg.measure_hi = v[1];
        }
        if (m.count("density")) {
            cfg.measure_density = detail::number_of(m.at("density").value, "density");
            if (!(cfg.measure_density >= 0.0)) throw ConfigError("density must be non-negative", m.at("density").line);
        }
    }

    // [initial]
    {
        reject_unknown("initial", {"state"});
        auto &m = take("initial");
        if (!m.count("state")) throw ConfigError("[initial] state = (x, y, z) is required");
        const auto v = detail::numbers_of(m.at("state").value, "state", 3);
        cfg.initial = {v[0], v[1], v[2]};
        if (!admissible(cfg.initial, cfg.domain))
            throw ConfigError(std::string("initial state is not admissible on the ") + to_string(cfg.domain),
                              m.at("state").line);
    }

    // [sim]
    {
        reject_unknown("sim", {"dt", "T", "seed", "paths", "record_stride", "slack", "out"});
        auto &m = take("sim");
        if (m.count("dt")) cfg.sim.dt = detail::number_of(m.at("dt").value, "dt");
        if (m.count("T")) cfg.sim.horizon = detail::number_of(m.at("T").value, "T");
        if (m.count("seed")) cfg.sim.seed = detail::count_of(m.at("seed").value, "seed");
        if (m.count("paths")) cfg.paths = detail::count_of(m.at("paths").value, "paths");
        if (m.count("record_stride")) cfg.sim.record_stride = detail::count_of(m.at("record_stride").value, "record_stride");
        if (m.count("slack")) cfg.slack = detail::number_of(m.at("slack").value, "slack");
        if (m.count("out")) {
            const ScenarioValue &o = m.at("out").value;
            if (o.kind != ScenarioValue::Kind::text) throw ConfigError("out must be a quoted path", o.line);
            cfg.out = o.text;
        }
        auto line_of = [&](const char *k) { return m.count(k) ? m.at(k).line : std::size_t{0}; };
        if (!(cfg.sim.dt > 0.0)) throw ConfigError("dt must be positive", line_of("dt"));
        if (!(cfg.sim.horizon >= cfg.sim.dt)) throw ConfigError("T must be at least dt", line_of("T"));
        if (cfg.paths < 1) throw ConfigError("paths must be at least 1", line_of("paths"));
        if (cfg.sim.record_stride < 1) throw ConfigError("record_stride must be at least 1", line_of("record_stride"));
        if (!(cfg.slack > 0.0)) throw ConfigError("slack must be positive", line_of("slack"));
    }

    // [criteria]
    {
        reject_unknown("criteria", {"y_min", "t_lo", "t_hi", "t_points", "grid", "box_hi"});
        auto &m = take("criteria");
        EstimateConfig &e = cfg.estimate;
        if (m.count("y_min")) e.y_min = detail::number_of(m.at("y_min").value, "y_min");
        if (m.count("t_lo")) e.t_lo = detail::number_of(m.at("t_lo").value, "t_lo");
        if (m.count("t_hi")) e.t_hi = detail::number_of(m.at("t_hi").value, "t_hi");
        if (m.count("t_points")) e.t_points = detail::count_of(m.at("t_points").value, "t_points");
        if (m.count("grid")) e.grid = detail::count_of(m.at("grid").value, "grid");
        if (m.count("box_hi")) e.box_hi = detail::number_of(m.at("box_hi").value, "box_hi");
        if (!(e.y_min > 0.0) || !(e.t_lo <= e.t_hi) || e.t_points < 1 || !(e.box_hi > e.y_min))
            throw ConfigError("[criteria] needs y_min > 0, t_lo <= t_hi, t_points >= 1 and box_hi > y_min");
    }
    return cfg;
}

inline ScenarioConfig load_scenario(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path.string());
    try {
        return parse_scenario(in, path);
    } catch (const ConfigError &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// =============================================================================
// Models and criteria from a scenario
// =============================================================================

namespace detail {

inline expr::TimeFunction fn(const ScenarioConfig &c, const std::string &k) {
    return expr::TimeFunction::parse(c.params.at(k));
}

inline double constant_param(const ScenarioConfig &c, const std::string &k) {
    const auto f = fn(c, k);
    if (!f.is_constant()) throw ConfigError(k + " must be a constant");
    return f(0.0);
}

} // namespace detail

inline Ex1Params ex1_params(const ScenarioConfig &c) {
    using detail::fn;
    const auto &j = c.jumps;
    return {fn(c, "beta"),   fn(c, "gamma"),  fn(c, "xi"),   fn(c, "sigma1"), fn(c, "sigma2"), fn(c, "phi1"),
            fn(c, "phi2"),   fn(c, "phi3"),   j.at("h1"),    j.at("h2"),      j.at("g1"),      j.at("g2"),
            c.measure()};
}

inline Ex1bParams ex1b_params(const ScenarioConfig &c) {
    using detail::fn;
    const auto &j = c.jumps;
    return {fn(c, "beta"), fn(c, "gamma1"), fn(c, "gamma2"), fn(c, "sigma"), j.at("h1"), j.at("h2"),
            j.at("g1"),    j.at("g2"),      c.measure()};
}

inline XcParams xc_params(const ScenarioConfig &c) {
    using detail::fn;
    return {fn(c, "Lambda"), fn(c, "mu"), fn(c, "beta"), fn(c, "gamma"), fn(c, "epsilon"), fn(c, "sigma")};
}

inline Ex34aParams ex34a_params(const ScenarioConfig &c) {
    using detail::fn;
    const auto &j = c.jumps;
    return {fn(c, "Lambda"), fn(c, "mu"),     fn(c, "beta"),   fn(c, "gamma1"), fn(c, "gamma2"),
            fn(c, "gamma3"), fn(c, "gamma4"), fn(c, "xi"),     fn(c, "sigma1"), fn(c, "sigma2"),
            fn(c, "phi1"),   fn(c, "phi2"),   fn(c, "phi3"),   j.at("h1"),      j.at("h2"),
            j.at("h3"),      j.at("g1"),      j.at("g2"),      detail::constant_param(c, "M"),
            c.measure()};
}

inline Ex34bParams ex34b_params(const ScenarioConfig &c) {
    using detail::fn;
    const auto &j = c.jumps;
    return {fn(c, "Lambda"), fn(c, "mu"), fn(c, "beta"), fn(c, "gamma1"), fn(c, "gamma2"), fn(c, "sigma"),
            j.at("h1"),      j.at("h2"),  j.at("h3"),    j.at("g1"),      j.at("g2"),      j.at("g3"),
            detail::constant_param(c, "M"), c.measure()};
}

inline CustomParams custom_params(const ScenarioConfig &c) {
    CustomParams p;
    p.domain = c.domain;
    auto vec = [&](const std::string &k, expr::VarSet vars) {
        const auto &v = c.vectors.at(k);
        return std::array<expr::TimeFunction, 3>{expr::TimeFunction::parse(v[0], vars),
                                                 expr::TimeFunction::parse(v[1], vars),
                                                 expr::TimeFunction::parse(v[2], vars)};
    };
    p.b = vec("b", expr::VarSet::state());
    for (std::size_t j = 1; c.vectors.count("s" + std::to_string(j)); ++j)
        p.sigma.push_back(vec("s" + std::to_string(j), expr::VarSet::state()));
    p.h = vec("h", expr::VarSet::state_and_mark());
    p.g = vec("g", expr::VarSet::state_and_mark());
    p.measure = c.measure();
    return p;
}

inline ModelSpec build_model(const ScenarioConfig &c, Check check = Check::enforce) {
    switch (c.model) {
    case ModelId::ex1: return build_ex1(ex1_params(c), check);
    case ModelId::ex1b: return build_ex1b(ex1b_params(c), check);
    case ModelId::xc: return build_xc(xc_params(c), check);
    case ModelId::ex34a: return build_ex34a(ex34a_params(c), check);
    case ModelId::ex34b: return build_ex34b(ex34b_params(c), check);
    default: return build_custom(custom_params(c), check);
    }
}

/// Closed-form report for built-in models. Custom models get the grid
/// estimate of the exponent only, and stay indeterminate since the grid sup
/// can undershoot the true one.
inline CriteriaReport criteria_for(const ScenarioConfig &c) {
    switch (c.model) {
    case ModelId::ex1: return ex1_extinction(bounds_of(ex1_params(c)));
    case ModelId::ex1b: return ex1b_persistence(bounds_of(ex1b_params(c)));
    case ModelId::xc: return xc_report(bounds_of(xc_params(c)));
    case ModelId::ex34a: return ex34a_persistence(bounds_of(ex34a_params(c)));
    case ModelId::ex34b: return ex34b_extinction(bounds_of(ex34b_params(c)));
    default: break;
    }
    const ModelSpec model = build_model(c);
    const EstimateConfig &e = c.estimate;
    AlphaGrid grid;
    grid.times = uniform_grid(e.t_lo, e.t_hi, e.t_points);
    grid.states = c.domain == Domain::simplex ? simplex_state_grid(e.grid ? e.grid : 200, e.y_min)
                                              : octant_state_grid(e.grid ? e.grid : 30, e.y_min, e.box_hi, e.y_min);
    CriteriaReport r;
    r.model = "custom";
    r.alpha_estimate = generic_alpha_estimate(model, grid).alpha;
    r.alpha_y_min = e.y_min;
    return r;
}

} // namespace ussir
