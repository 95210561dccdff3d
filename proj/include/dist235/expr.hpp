#ifndef DIST235_EXPR_HPP
#define DIST235_EXPR_HPP

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dist235/rational.hpp"

namespace dist235 {

class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    [[nodiscard]] std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class eval_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a geometric precondition fails at a point (rank drop, ill-conditioning).
class degenerate_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExprKind { constant, variable, add, sub, mul, div, pow, neg, fsin, fcos, fexp };

class ExprNode;
// Immutable expression DAG; subtrees are shared freely, so per-call memoization
// keyed on node identity keeps evaluation and differentiation linear in the
// number of distinct nodes.
using Expr = std::shared_ptr<const ExprNode>;

class ExprNode {
public:
    ExprKind kind;
    Rational value;    // constant
    int var = -1;      // variable
    int exponent = 0;  // pow
    Expr a, b;
};

namespace detail {
inline Expr seal(ExprNode&& n) { return std::make_shared<const ExprNode>(std::move(n)); }
} // namespace detail

inline Expr constant(Rational r) {
    ExprNode n;
    n.kind = ExprKind::constant;
    n.value = r;
    return detail::seal(std::move(n));
}

inline Expr constant(std::int64_t v) { return constant(Rational(v)); }

inline Expr variable(int index) {
    if (index < 0) throw std::invalid_argument("negative variable index");
    ExprNode n;
    n.kind = ExprKind::variable;
    n.var = index;
    return detail::seal(std::move(n));
}

inline bool is_const(const Expr& e) { return e->kind == ExprKind::constant; }
inline bool is_zero(const Expr& e) { return is_const(e) && e->value.is_zero(); }
inline bool is_one(const Expr& e) { return is_const(e) && e->value == Rational(1); }

// Smart constructors fold constants and absorb 0/1; nothing heavier, so trees
// stay close to what the caller wrote.
inline Expr add(Expr a, Expr b) {
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
    if (is_const(a) && is_const(b)) return constant(a->value + b->value);
    ExprNode n;
    n.kind = ExprKind::add;
    n.a = std::move(a);
    n.b = std::move(b);
    return detail::seal(std::move(n));
}

inline Expr neg(Expr a);

inline Expr sub(Expr a, Expr b) {
    if (is_zero(b)) return a;
    if (is_zero(a)) return neg(std::move(b));
    if (is_const(a) && is_const(b)) return constant(a->value - b->value);
    ExprNode n;
    n.kind = ExprKind::sub;
    n.a = std::move(a);
    n.b = std::move(b);
    return detail::seal(std::move(n));
}

inline Expr mul(Expr a, Expr b) {
    if (is_zero(a) || is_zero(b)) return constant(0);
    if (is_one(a)) return b;
    if (is_one(b)) return a;
    if (is_const(a) && is_const(b)) return constant(a->value * b->value);
    ExprNode n;
    n.kind = ExprKind::mul;
    n.a = std::move(a);
    n.b = std::move(b);
    return detail::seal(std::move(n));
}

inline Expr div(Expr a, Expr b) {
    if (is_one(b)) return a;
    if (is_zero(a) && !(is_const(b) && b->value.is_zero())) return constant(0);
    if (is_const(a) && is_const(b) && !b->value.is_zero())
        return constant(a->value / b->value);
    ExprNode n;
    n.kind = ExprKind::div;
    n.a = std::move(a);
    n.b = std::move(b);
    return detail::seal(std::move(n));
}

inline Expr pow(Expr a, int e) {
    if (e == 0) return constant(1);
    if (e == 1) return a;
    if (is_const(a) && !(a->value.is_zero() && e < 0)) return constant(a->value.pow(e));
    ExprNode n;
    n.kind = ExprKind::pow;
    n.a = std::move(a);
    n.exponent = e;
    return detail::seal(std::move(n));
}

inline Expr neg(Expr a) {
    if (is_const(a)) return constant(-a->value);
    if (a->kind == ExprKind::neg) return a->a;
    ExprNode n;
    n.kind = ExprKind::neg;
    n.a = std::move(a);
    return detail::seal(std::move(n));
}

inline Expr fsin(Expr a) {
    ExprNode n;
    n.kind = ExprKind::fsin;
    n.a = std::move(a);
    return detail::seal(std::move(n));
}

inline Expr fcos(Expr a) {
    ExprNode n;
    n.kind = ExprKind::fcos;
    n.a = std::move(a);
    return detail::seal(std::move(n));
}

inline Expr fexp(Expr a) {
    ExprNode n;
    n.kind = ExprKind::fexp;
    n.a = std::move(a);
    return detail::seal(std::move(n));
}

// -------------------------------------------------------------- printing ---

inline const std::vector<std::string>& default_names() {
    static const std::vector<std::string> names{"x1", "x2", "x3", "x4", "x5", "u4", "u5"};
    return names;
}

namespace detail {

inline int precedence(const ExprNode& n) {
    switch (n.kind) {
        case ExprKind::add:
        case ExprKind::sub: return 1;
        case ExprKind::mul:
        case ExprKind::div: return 2;
        case ExprKind::neg: return 3;
        case ExprKind::pow: return 4;
        case ExprKind::constant:
            // Ratio literals reparse as division and negatives as unary minus;
            // rank them so the printer parenthesizes where reparsing would
            // otherwise regroup.
            if (!n.value.is_integer()) return 2;
            return (n.value.num() < 0) ? 3 : 5;
        default: return 5;
    }
}

inline void print_rec(const Expr& e, std::span<const std::string> names, std::string& out);

inline void print_child(const Expr& c, std::span<const std::string> names, std::string& out,
                        int parent_prec, bool strict) {
    const int p = precedence(*c);
    const bool parens = strict ? (p <= parent_prec) : (p < parent_prec);
    if (parens) out += '(';
    print_rec(c, names, out);
    if (parens) out += ')';
}

inline void print_rec(const Expr& e, std::span<const std::string> names, std::string& out) {
    switch (e->kind) {
        case ExprKind::constant: out += e->value.str(); return;
        case ExprKind::variable:
            if (e->var < static_cast<int>(names.size())) out += names[e->var];
            else out += "v" + std::to_string(e->var);
            return;
        case ExprKind::add:
            print_child(e->a, names, out, 1, false);
            out += " + ";
            print_child(e->b, names, out, 1, true);
            return;
        case ExprKind::sub:
            print_child(e->a, names, out, 1, false);
            out += " - ";
            print_child(e->b, names, out, 1, true);
            return;
        case ExprKind::mul:
            print_child(e->a, names, out, 2, false);
            out += "*";
            print_child(e->b, names, out, 2, true);
            return;
        case ExprKind::div:
            print_child(e->a, names, out, 2, false);
            out += "/";
            print_child(e->b, names, out, 2, true);
            return;
        case ExprKind::neg:
            out += '-';
            print_child(e->a, names, out, 3, true);
            return;
        case ExprKind::pow:
            print_child(e->a, names, out, 4, true);
            out += '^';
            out += std::to_string(e->exponent);
            return;
        case ExprKind::fsin: out += "sin("; break;
        case ExprKind::fcos: out += "cos("; break;
        case ExprKind::fexp: out += "exp("; break;
    }
    print_rec(e->a, names, out);
    out += ')';
}

} // namespace detail

inline std::string to_string(const Expr& e, std::span<const std::string> names) {
    std::string out;
    detail::print_rec(e, names, out);
    return out;
}

inline std::string to_string(const Expr& e) { return to_string(e, default_names()); }

// --------------------------------------------------------------- parsing ---

namespace detail {

class Parser {
public:
    Parser(std::string_view src, std::span<const std::string> names)
        : src_(src), names_(names) {}

    Expr run() {
        Expr e = parse_sum();
        skip_ws();
        if (pos_ != src_.size()) throw parse_error("unexpected input", pos_);
        return e;
    }

private:
    Expr parse_sum() {
        Expr e = parse_term();
        for (;;) {
            skip_ws();
            if (consume('+')) e = add(e, parse_term());
            else if (consume('-')) e = sub(e, parse_term());
            else return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            skip_ws();
            if (consume('*')) e = mul(e, parse_unary());
            else if (consume('/')) e = div(e, parse_unary());
            else return e;
        }
    }

    // '^' binds tighter than unary minus and associates right: -x^2 is -(x^2)
    // and x^2^3 is x^(2^3).
    Expr parse_unary() {
        skip_ws();
        if (consume('-')) return neg(parse_unary());
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        skip_ws();
        if (!consume('^')) return base;
        const std::size_t at = pos_;
        Expr e = parse_unary();
        if (!is_const(e) || !e->value.is_integer())
            throw parse_error("exponent must be an integer constant", at);
        const auto v = e->value.num();
        if (v > INT32_MAX || v < INT32_MIN)
            throw parse_error("exponent out of range", at);
        return pow(base, static_cast<int>(v));
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw parse_error("expected operand", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            skip_ws();
            if (!consume(')')) throw parse_error("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_integer();
        if (c >= 'a' && c <= 'z') return parse_identifier();
        throw parse_error(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_integer() {
        const std::size_t at = pos_;
        std::uint64_t v = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            v = v * 10 + static_cast<std::uint64_t>(src_[pos_] - '0');
            if (v > static_cast<std::uint64_t>(INT64_MAX))
                throw parse_error("integer literal too large", at);
            ++pos_;
        }
        return constant(static_cast<std::int64_t>(v));
    }

    Expr parse_identifier() {
        const std::size_t at = pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) ++pos_;
            else break;
        }
        const std::string_view name = src_.substr(at, pos_ - at);
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return variable(static_cast<int>(i));
        if (name == "sin" || name == "cos" || name == "exp") {
            skip_ws();
            if (!consume('(')) throw parse_error("expected '(' after function name", pos_);
            Expr arg = parse_sum();
            skip_ws();
            if (!consume(')')) throw parse_error("expected ')'", pos_);
            if (name == "sin") return fsin(arg);
            if (name == "cos") return fcos(arg);
            return fexp(arg);
        }
        throw parse_error("unknown identifier '" + std::string(name) + "'", at);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string_view src_;
    std::span<const std::string> names_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Expr parse_expression(std::string_view src, std::span<const std::string> names) {
    for (const auto& n : names)
        if (n == "sin" || n == "cos" || n == "exp")
            throw std::invalid_argument("variable name collides with function name: " + n);
    return detail::Parser(src, names).run();
}

inline Expr parse_expression(std::string_view src) {
    return parse_expression(src, default_names());
}

// ------------------------------------------------------------ evaluation ---

namespace detail {

inline double pow_int(double base, int e) {
    if (e < 0) {
        if (base == 0.0) throw eval_error("0 raised to a negative power");
        return 1.0 / pow_int(base, -e);
    }
    double out = 1.0, b = base;
    for (int k = e; k > 0; k >>= 1) {
        if (k & 1) out *= b;
        b *= b;
    }
    return out;
}

inline std::string clipped(const Expr& e) {
    std::string s = to_string(e);
    if (s.size() > 160) s = s.substr(0, 157) + "...";
    return s;
}

// The memo owns its keys: a cache that outlives an evaluated expression must
// not serve a recycled node address as a stale hit.
inline double eval_rec(const Expr& e, std::span<const double> p,
                       std::unordered_map<Expr, double>& memo) {
    if (auto it = memo.find(e); it != memo.end()) return it->second;
    double v = 0;
    switch (e->kind) {
        case ExprKind::constant: v = e->value.to_double(); break;
        case ExprKind::variable:
            if (e->var >= static_cast<int>(p.size()))
                throw eval_error("point has too few coordinates for variable index " +
                                 std::to_string(e->var));
            v = p[e->var];
            break;
        case ExprKind::add: v = eval_rec(e->a, p, memo) + eval_rec(e->b, p, memo); break;
        case ExprKind::sub: v = eval_rec(e->a, p, memo) - eval_rec(e->b, p, memo); break;
        case ExprKind::mul: v = eval_rec(e->a, p, memo) * eval_rec(e->b, p, memo); break;
        case ExprKind::div: {
            const double den = eval_rec(e->b, p, memo);
            if (den == 0.0) throw eval_error("division by zero in " + clipped(e));
            v = eval_rec(e->a, p, memo) / den;
            break;
        }
        case ExprKind::pow: v = pow_int(eval_rec(e->a, p, memo), e->exponent); break;
        case ExprKind::neg: v = -eval_rec(e->a, p, memo); break;
        case ExprKind::fsin: v = std::sin(eval_rec(e->a, p, memo)); break;
        case ExprKind::fcos: v = std::cos(eval_rec(e->a, p, memo)); break;
        case ExprKind::fexp: v = std::exp(eval_rec(e->a, p, memo)); break;
    }
    memo.emplace(e, v);
    return v;
}

} // namespace detail

inline double evaluate(const Expr& e, std::span<const double> point) {
    std::unordered_map<Expr, double> memo;
    return detail::eval_rec(e, point, memo);
}

// A reusable evaluation cache for evaluating many expressions that share
// subtrees at one point.
class EvalContext {
public:
    explicit EvalContext(std::span<const double> point) : point_(point) {}
    double operator()(const Expr& e) { return detail::eval_rec(e, point_, memo_); }

private:
    std::span<const double> point_;
    std::unordered_map<Expr, double> memo_;
};

// -------------------------------------------------------- differentiation ---

namespace detail {

inline Expr diff_rec(const Expr& e, int var,
                     std::unordered_map<const ExprNode*, Expr>& memo) {
    if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
    Expr d;
    switch (e->kind) {
        case ExprKind::constant: d = constant(0); break;
        case ExprKind::variable: d = constant(e->var == var ? 1 : 0); break;
        case ExprKind::add: d = add(diff_rec(e->a, var, memo), diff_rec(e->b, var, memo)); break;
        case ExprKind::sub: d = sub(diff_rec(e->a, var, memo), diff_rec(e->b, var, memo)); break;
        case ExprKind::mul:
            d = add(mul(diff_rec(e->a, var, memo), e->b), mul(e->a, diff_rec(e->b, var, memo)));
            break;
        case ExprKind::div:
            // d(a/b) = (a'b - ab') / b^2
            d = div(sub(mul(diff_rec(e->a, var, memo), e->b),
                        mul(e->a, diff_rec(e->b, var, memo))),
                    pow(e->b, 2));
            break;
        case ExprKind::pow:
            // d(a^n) = n a^(n-1) a'
            d = mul(mul(constant(e->exponent), pow(e->a, e->exponent - 1)),
                    diff_rec(e->a, var, memo));
            break;
        case ExprKind::neg: d = neg(diff_rec(e->a, var, memo)); break;
        case ExprKind::fsin: d = mul(fcos(e->a), diff_rec(e->a, var, memo)); break;
        case ExprKind::fcos: d = neg(mul(fsin(e->a), diff_rec(e->a, var, memo))); break;
        case ExprKind::fexp: d = mul(fexp(e->a), diff_rec(e->a, var, memo)); break;
    }
    memo.emplace(e.get(), d);
    return d;
}

} // namespace detail

inline Expr differentiate(const Expr& e, int var) {
    std::unordered_map<const ExprNode*, Expr> memo;
    return detail::diff_rec(e, var, memo);
}

// ----------------------------------------------------------- substitution ---

namespace detail {

inline Expr subst_rec(const Expr& e, int var, const Expr& repl,
                      std::unordered_map<const ExprNode*, Expr>& memo) {
    if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
    Expr r;
    switch (e->kind) {
        case ExprKind::constant: r = e; break;
        case ExprKind::variable: r = (e->var == var) ? repl : e; break;
        case ExprKind::add: r = add(subst_rec(e->a, var, repl, memo), subst_rec(e->b, var, repl, memo)); break;
        case ExprKind::sub: r = sub(subst_rec(e->a, var, repl, memo), subst_rec(e->b, var, repl, memo)); break;
        case ExprKind::mul: r = mul(subst_rec(e->a, var, repl, memo), subst_rec(e->b, var, repl, memo)); break;
        case ExprKind::div: r = div(subst_rec(e->a, var, repl, memo), subst_rec(e->b, var, repl, memo)); break;
        case ExprKind::pow: r = pow(subst_rec(e->a, var, repl, memo), e->exponent); break;
        case ExprKind::neg: r = neg(subst_rec(e->a, var, repl, memo)); break;
        case ExprKind::fsin: r = fsin(subst_rec(e->a, var, repl, memo)); break;
        case ExprKind::fcos: r = fcos(subst_rec(e->a, var, repl, memo)); break;
        case ExprKind::fexp: r = fexp(subst_rec(e->a, var, repl, memo)); break;
    }
    memo.emplace(e.get(), r);
    return r;
}

} // namespace detail

inline Expr substitute(const Expr& e, int var, const Expr& repl) {
    std::unordered_map<const ExprNode*, Expr> memo;
    return detail::subst_rec(e, var, repl, memo);
}

// --------------------------------------------------- structural equality ---

inline bool equals(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprKind::constant: return a->value == b->value;
        case ExprKind::variable: return a->var == b->var;
        case ExprKind::pow: return a->exponent == b->exponent && equals(a->a, b->a);
        case ExprKind::neg:
        case ExprKind::fsin:
        case ExprKind::fcos:
        case ExprKind::fexp: return equals(a->a, b->a);
        default: return equals(a->a, b->a) && equals(a->b, b->b);
    }
}

} // namespace dist235

#endif
