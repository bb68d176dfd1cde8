// Coefficient expressions: parsing, evaluation, canonical text, and the
// inf/sup over [0, inf) that the closed-form criteria consume.
//
// Grammar (whitespace insignificant, angles in radians):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | primary
//   primary := number | variable | func '(' expr ')' | '(' expr ')'
//   func    := 'sin' | 'cos' | 'ln' | 'abs'
//
// Time coefficients only admit the variable `t`. Custom model coefficients
// may additionally enable x, y, z (state) and u (jump mark).
#pragma once

#include "error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ussir::expr {

enum class Var : std::uint8_t { t = 0, x = 1, y = 2, z = 3, u = 4 };
inline constexpr std::size_t kVarCount = 5;

/// Values for t, x, y, z, u in that order.
using VarValues = std::array<double, kVarCount>;

class VarSet {
public:
    constexpr VarSet() = default;
    constexpr VarSet(std::initializer_list<Var> vars) {
        for (Var v : vars) bits_ |= bit(v);
    }
    constexpr bool contains(Var v) const { return (bits_ & bit(v)) != 0; }
    constexpr VarSet with(Var v) const {
        VarSet s = *this;
        s.bits_ |= bit(v);
        return s;
    }
    static constexpr VarSet time_only() { return VarSet{Var::t}; }
    static constexpr VarSet state() { return VarSet{Var::t, Var::x, Var::y, Var::z}; }
    static constexpr VarSet state_and_mark() { return state().with(Var::u); }

private:
    static constexpr std::uint8_t bit(Var v) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v)); }
    std::uint8_t bits_ = 0;
};

enum class Op : std::uint8_t { num, var, neg, add, sub, mul, div, sin, cos, ln, abs };

/// One node of an expression stored in post-order; operands precede their
/// operator, so evaluation is a single stack pass.
struct Node {
    Op op = Op::num;
    Var var = Var::t;
    double value = 0.0;

    friend bool operator==(const Node &a, const Node &b) {
        if (a.op != b.op) return false;
        if (a.op == Op::num) return a.value == b.value;
        if (a.op == Op::var) return a.var == b.var;
        return true;
    }
};

namespace detail {

inline int arity(Op op) {
    switch (op) {
    case Op::num:
    case Op::var: return 0;
    case Op::neg:
    case Op::sin:
    case Op::cos:
    case Op::ln:
    case Op::abs: return 1;
    default: return 2;
    }
}

inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline char var_name(Var v) {
    static constexpr char names[] = {'t', 'x', 'y', 'z', 'u'};
    return names[static_cast<std::size_t>(v)];
}

class Parser {
public:
    Parser(std::string_view text, VarSet allowed) : text_(text), allowed_(allowed) {}

    std::vector<Node> run() {
        skip_ws();
        if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
        parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
        return std::move(out_);
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' before end of input", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    void parse_expr() {
        parse_term();
        for (;;) {
            if (accept('+')) {
                parse_term();
                out_.push_back({Op::add});
            } else if (accept('-')) {
                parse_term();
                out_.push_back({Op::sub});
            } else {
                return;
            }
        }
    }

    void parse_term() {
        parse_unary();
        for (;;) {
            if (accept('*')) {
                parse_unary();
                out_.push_back({Op::mul});
            } else if (accept('/')) {
                parse_unary();
                out_.push_back({Op::div});
            } else {
                return;
            }
        }
    }

    void parse_unary() {
        if (accept('-')) {
            parse_unary();
            out_.push_back({Op::neg});
        } else if (accept('+')) {
            parse_unary();
        } else {
            parse_primary();
        }
    }

    void parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            parse_expr();
            expect(')');
            return;
        }
        if ((c >= '0' && c <= '9') || c == '.') {
            parse_number();
            return;
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && ((text_[pos_] >= 'a' && text_[pos_] <= 'z') ||
                                           (text_[pos_] >= 'A' && text_[pos_] <= 'Z')))
                ++pos_;
            const std::string_view ident = text_.substr(start, pos_ - start);
            if (ident.size() == 1) {
                for (std::size_t i = 0; i < kVarCount; ++i) {
                    const Var v = static_cast<Var>(i);
                    if (ident[0] == var_name(v)) {
                        if (!allowed_.contains(v))
                            throw ParseError("variable '" + std::string(ident) + "' not allowed here", start);
                        out_.push_back({Op::var, v});
                        return;
                    }
                }
            }
            Op fn;
            if (ident == "sin") fn = Op::sin;
            else if (ident == "cos") fn = Op::cos;
            else if (ident == "ln") fn = Op::ln;
            else if (ident == "abs") fn = Op::abs;
            else throw ParseError("unknown identifier '" + std::string(ident) + "'", start);
            expect('(');
            parse_expr();
            expect(')');
            out_.push_back({fn});
            return;
        }
        throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
    }

    void parse_number() {
        const std::size_t start = pos_;
        auto is_digit = [&](std::size_t i) { return i < text_.size() && text_[i] >= '0' && text_[i] <= '9'; };
        std::size_t digits = 0;
        while (is_digit(pos_)) ++pos_, ++digits;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (is_digit(pos_)) ++pos_, ++digits;
        }
        if (digits == 0) throw ParseError("malformed number", start);
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (!is_digit(p)) throw ParseError("malformed exponent", pos_);
            while (is_digit(p)) ++p;
            pos_ = p;
        }
        double value = 0.0;
        const char *first = text_.data() + start;
        const char *last = text_.data() + pos_;
        auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value))
            throw ParseError("malformed number", start);
        out_.push_back({Op::num, Var::t, value});
    }

    std::string_view text_;
    VarSet allowed_;
    std::size_t pos_ = 0;
    std::vector<Node> out_;
};

struct Program {
    std::vector<Node> nodes;
    std::string source;
    std::size_t max_depth = 0;
    std::array<bool, kVarCount> uses{};
};

inline std::shared_ptr<const Program> make_program(std::vector<Node> nodes, std::string source) {
    auto p = std::make_shared<Program>();
    std::size_t depth = 0;
    for (const Node &n : nodes) {
        const int a = arity(n.op);
        if (static_cast<std::size_t>(a) > depth) throw std::logic_error("malformed post-order expression");
        depth = depth - static_cast<std::size_t>(a) + 1;
        p->max_depth = std::max(p->max_depth, depth);
        if (n.op == Op::var) p->uses[static_cast<std::size_t>(n.var)] = true;
    }
    if (depth != 1) throw std::logic_error("malformed post-order expression");
    p->nodes = std::move(nodes);
    p->source = std::move(source);
    return p;
}

} // namespace detail

/// An immutable parsed coefficient expression. Copies share the parsed tree,
/// so a TimeFunction can be evaluated concurrently from any number of threads.
class TimeFunction {
public:
    /// The constant 0.
    TimeFunction() : TimeFunction(constant(0.0)) {}

    static TimeFunction parse(std::string_view text, VarSet allowed = VarSet::time_only()) {
        detail::Parser parser(text, allowed);
        return TimeFunction(detail::make_program(parser.run(), std::string(text)));
    }

    static TimeFunction constant(double value) {
        if (!std::isfinite(value)) throw std::invalid_argument("constant must be finite");
        std::vector<Node> nodes;
        nodes.push_back({Op::num, Var::t, std::abs(value)});
        if (std::signbit(value) && value != 0.0) nodes.push_back({Op::neg});
        auto program = detail::make_program(std::move(nodes), {});
        TimeFunction f(program);
        std::const_pointer_cast<detail::Program>(program)->source = f.serialize();
        return f;
    }

    /// Builds from post-order nodes; throws std::logic_error when malformed.
    static TimeFunction from_nodes(std::vector<Node> nodes) {
        auto program = detail::make_program(std::move(nodes), {});
        TimeFunction f(program);
        std::const_pointer_cast<detail::Program>(program)->source = f.serialize();
        return f;
    }

    double operator()(double t) const { return eval(VarValues{t, 0.0, 0.0, 0.0, 0.0}); }

    double eval(const VarValues &vars) const {
        const auto &nodes = program_->nodes;
        constexpr std::size_t kInline = 32;
        std::array<double, kInline> small{};
        std::vector<double> big;
        double *stack = small.data();
        if (program_->max_depth > kInline) {
            big.resize(program_->max_depth);
            stack = big.data();
        }
        std::size_t sp = 0;
        for (const Node &n : nodes) {
            switch (n.op) {
            case Op::num: stack[sp++] = n.value; break;
            case Op::var: stack[sp++] = vars[static_cast<std::size_t>(n.var)]; break;
            case Op::neg: stack[sp - 1] = -stack[sp - 1]; break;
            case Op::add: --sp, stack[sp - 1] += stack[sp]; break;
            case Op::sub: --sp, stack[sp - 1] -= stack[sp]; break;
            case Op::mul: --sp, stack[sp - 1] *= stack[sp]; break;
            case Op::div:
                --sp;
                if (stack[sp] == 0.0) throw DomainError("division by zero in '" + program_->source + "'");
                stack[sp - 1] /= stack[sp];
                break;
            case Op::sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
            case Op::cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
            case Op::ln:
                if (!(stack[sp - 1] > 0.0)) throw DomainError("ln of non-positive value in '" + program_->source + "'");
                stack[sp - 1] = std::log(stack[sp - 1]);
                break;
            case Op::abs: stack[sp - 1] = std::abs(stack[sp - 1]); break;
            }
        }
        const double result = stack[0];
        if (!std::isfinite(result)) throw DomainError("non-finite value from '" + program_->source + "'");
        return result;
    }

    /// Canonical infix text; parsing it reproduces this tree exactly.
    std::string serialize() const {
        struct Item {
            std::string text;
            int prec;
        };
        std::vector<Item> st;
        for (const Node &n : program_->nodes) {
            switch (n.op) {
            case Op::num: st.push_back({detail::format_number(n.value), 4}); break;
            case Op::var: st.push_back({std::string(1, detail::var_name(n.var)), 4}); break;
            case Op::neg: {
                Item a = std::move(st.back());
                st.back() = {"-" + (a.prec < 3 ? "(" + a.text + ")" : a.text), 3};
                break;
            }
            case Op::sin:
            case Op::cos:
            case Op::ln:
            case Op::abs: {
                static constexpr const char *names[] = {"sin", "cos", "ln", "abs"};
                const auto idx = static_cast<std::size_t>(n.op) - static_cast<std::size_t>(Op::sin);
                st.back() = {std::string(names[idx]) + "(" + st.back().text + ")", 4};
                break;
            }
            default: {
                Item rhs = std::move(st.back());
                st.pop_back();
                Item lhs = std::move(st.back());
                const bool additive = n.op == Op::add || n.op == Op::sub;
                const int prec = additive ? 1 : 2;
                const char sym = n.op == Op::add ? '+' : n.op == Op::sub ? '-' : n.op == Op::mul ? '*' : '/';
                std::string l = lhs.prec < prec ? "(" + lhs.text + ")" : lhs.text;
                // Left-associative grammar: an equal-precedence right operand needs parentheses.
                std::string r = rhs.prec <= prec ? "(" + rhs.text + ")" : rhs.text;
                st.back() = {l + sym + r, prec};
                break;
            }
            }
        }
        return st.back().text;
    }

    const std::string &source() const { return program_->source; }
    const std::vector<Node> &nodes() const { return program_->nodes; }
    bool depends_on(Var v) const { return program_->uses[static_cast<std::size_t>(v)]; }
    bool is_constant() const {
        for (bool u : program_->uses)
            if (u) return false;
        return true;
    }

    friend bool operator==(const TimeFunction &a, const TimeFunction &b) {
        return a.program_ == b.program_ || a.program_->nodes == b.program_->nodes;
    }

private:
    explicit TimeFunction(std::shared_ptr<const detail::Program> p) : program_(std::move(p)) {}

    std::shared_ptr<const detail::Program> program_;
};

// =============================================================================
// Bounds over [0, inf)
// =============================================================================

enum class BoundsMethod { analytic, grid };

struct BoundsPair {
    double inf = 0.0;
    double sup = 0.0;
    BoundsMethod method = BoundsMethod::analytic;

    static BoundsPair exact(double lo, double hi) { return {lo, hi, BoundsMethod::analytic}; }
    static BoundsPair point(double v) { return {v, v, BoundsMethod::analytic}; }
};

namespace detail {

// c0 + sum_k [s_k sin(w_k t) + c_k cos(w_k t)], w_k > 0.
struct TrigAffine {
    struct Term {
        double omega;
        double sin_coef;
        double cos_coef;
    };
    double c0 = 0.0;
    std::vector<Term> terms;

    void add_term(double omega, double s, double c) {
        for (Term &term : terms) {
            if (term.omega == omega) {
                term.sin_coef += s;
                term.cos_coef += c;
                return;
            }
        }
        terms.push_back({omega, s, c});
    }
    void scale(double k) {
        c0 *= k;
        for (Term &term : terms) term.sin_coef *= k, term.cos_coef *= k;
    }
    bool pure_constant() const {
        for (const Term &term : terms)
            if (term.sin_coef != 0.0 || term.cos_coef != 0.0) return false;
        return true;
    }
};

class TrigAnalyzer {
public:
    explicit TrigAnalyzer(const std::vector<Node> &nodes) : nodes_(nodes), children_(nodes.size()), has_var_(nodes.size()) {
        std::vector<int> st;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const int a = arity(nodes[i].op);
            bool var = nodes[i].op == Op::var;
            for (int k = a - 1; k >= 0; --k) {
                children_[i][static_cast<std::size_t>(k)] = st.back();
                var = var || has_var_[static_cast<std::size_t>(st.back())];
                st.pop_back();
            }
            has_var_[i] = var;
            st.push_back(static_cast<int>(i));
        }
    }

    std::optional<TrigAffine> analyze() { return affine(static_cast<int>(nodes_.size()) - 1); }

private:
    // Evaluates a variable-free subtree.
    double constant_value(int i) const {
        std::vector<Node> sub;
        collect(i, sub);
        return TimeFunction::from_nodes(std::move(sub))(0.0);
    }

    void collect(int i, std::vector<Node> &out) const {
        const auto idx = static_cast<std::size_t>(i);
        for (int k = 0; k < arity(nodes_[idx].op); ++k) collect(children_[idx][static_cast<std::size_t>(k)], out);
        out.push_back(nodes_[idx]);
    }

    // slope * t + intercept
    std::optional<std::pair<double, double>> linear(int i) const {
        const auto idx = static_cast<std::size_t>(i);
        const Node &n = nodes_[idx];
        if (!has_var_[idx]) return std::pair{0.0, constant_value(i)};
        const int l = children_[idx][0], r = children_[idx][1];
        switch (n.op) {
        case Op::var:
            if (n.var == Var::t) return std::pair{1.0, 0.0};
            return std::nullopt;
        case Op::neg: {
            auto a = linear(l);
            if (!a) return std::nullopt;
            return std::pair{-a->first, -a->second};
        }
        case Op::add:
        case Op::sub: {
            auto a = linear(l), b = linear(r);
            if (!a || !b) return std::nullopt;
            const double sg = n.op == Op::add ? 1.0 : -1.0;
            return std::pair{a->first + sg * b->first, a->second + sg * b->second};
        }
        case Op::mul: {
            auto a = linear(l), b = linear(r);
            if (!a || !b) return std::nullopt;
            if (a->first == 0.0) return std::pair{a->second * b->first, a->second * b->second};
            if (b->first == 0.0) return std::pair{b->second * a->first, b->second * a->second};
            return std::nullopt;
        }
        case Op::div: {
            auto a = linear(l), b = linear(r);
            if (!a || !b || b->first != 0.0 || b->second == 0.0) return std::nullopt;
            return std::pair{a->first / b->second, a->second / b->second};
        }
        default: return std::nullopt;
        }
    }

    std::optional<TrigAffine> affine(int i) const {
        const auto idx = static_cast<std::size_t>(i);
        const Node &n = nodes_[idx];
        if (!has_var_[idx]) {
            TrigAffine a;
            a.c0 = constant_value(i);
            return a;
        }
        const int l = children_[idx][0], r = children_[idx][1];
        switch (n.op) {
        case Op::neg: {
            auto a = affine(l);
            if (a) a->scale(-1.0);
            return a;
        }
        case Op::add:
        case Op::sub: {
            auto a = affine(l), b = affine(r);
            if (!a || !b) return std::nullopt;
            const double sg = n.op == Op::add ? 1.0 : -1.0;
            a->c0 += sg * b->c0;
            for (const auto &term : b->terms) a->add_term(term.omega, sg * term.sin_coef, sg * term.cos_coef);
            return a;
        }
        case Op::mul: {
            auto a = affine(l), b = affine(r);
            if (!a || !b) return std::nullopt;
            if (a->pure_constant()) {
                b->scale(a->c0);
                return b;
            }
            if (b->pure_constant()) {
                a->scale(b->c0);
                return a;
            }
            return std::nullopt;
        }
        case Op::div: {
            auto a = affine(l), b = affine(r);
            if (!a || !b || !b->pure_constant() || b->c0 == 0.0) return std::nullopt;
            a->scale(1.0 / b->c0);
            return a;
        }
        case Op::sin:
        case Op::cos: {
            auto arg = linear(l);
            if (!arg) return std::nullopt;
            double omega = arg->first;
            const double phase = arg->second;
            TrigAffine a;
            if (omega == 0.0) {
                a.c0 = n.op == Op::sin ? std::sin(phase) : std::cos(phase);
                return a;
            }
            // sin(wt + p) = cos p sin wt + sin p cos wt; cos(wt + p) = cos p cos wt - sin p sin wt
            double s = n.op == Op::sin ? std::cos(phase) : -std::sin(phase);
            double c = n.op == Op::sin ? std::sin(phase) : std::cos(phase);
            if (phase == 0.0) {
                s = n.op == Op::sin ? 1.0 : 0.0;
                c = n.op == Op::sin ? 0.0 : 1.0;
            }
            if (omega < 0.0) {
                omega = -omega;
                s = -s;
            }
            a.add_term(omega, s, c);
            return a;
        }
        default: return std::nullopt;
        }
    }

    const std::vector<Node> &nodes_;
    std::vector<std::array<int, 2>> children_;
    std::vector<bool> has_var_;
};

} // namespace detail

/// inf/sup of a time coefficient over [0, inf).
///
/// Exact when the expression is affine in sin/cos of a single frequency
/// (a + b sin(wt), a + b cos(wt), a + b (sin t + cos t), ...). Otherwise the
/// function is sampled on `grid_points` evenly spaced points of
/// [0, scan_horizon] plus a few far-tail probes, so monotone saturating terms
/// such as t/(1+t) report their limit to within ~1e-12 from the inside.
inline BoundsPair bounds(const TimeFunction &f, double scan_horizon = 1.0e4, std::size_t grid_points = 1'000'001) {
    for (Var v : {Var::x, Var::y, Var::z, Var::u})
        if (f.depends_on(v)) throw std::invalid_argument("bounds: expression depends on a non-time variable");
    if (!(scan_horizon > 0.0)) throw std::invalid_argument("bounds: scan_horizon must be positive");
    if (grid_points < 2) throw std::invalid_argument("bounds: need at least two grid points");

    if (f.is_constant()) return BoundsPair::point(f(0.0));

    detail::TrigAnalyzer analyzer(f.nodes());
    if (auto aff = analyzer.analyze()) {
        std::vector<detail::TrigAffine::Term> live;
        for (const auto &term : aff->terms)
            if (term.sin_coef != 0.0 || term.cos_coef != 0.0) live.push_back(term);
        if (live.empty()) return BoundsPair::point(aff->c0);
        if (live.size() == 1) {
            const double a = std::abs(live[0].sin_coef), b = std::abs(live[0].cos_coef);
            const double amp = a == b ? a * std::sqrt(2.0) : std::hypot(a, b);
            return BoundsPair::exact(aff->c0 - amp, aff->c0 + amp);
        }
    }

    double lo = f(0.0), hi = lo;
    const double h = scan_horizon / static_cast<double>(grid_points - 1);
    for (std::size_t i = 1; i < grid_points; ++i) {
        const double v = f(static_cast<double>(i) * h);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double probe = scan_horizon;
    for (int k = 0; k < 8; ++k) {
        probe *= 10.0;
        const double v = f(probe);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi, BoundsMethod::grid};
}

} // namespace ussir::expr
