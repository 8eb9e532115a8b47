#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "events.hpp"
#include "rational.hpp"

namespace cfbounds {

// One probability term P_{world}(cube | given). The world is an
// intervention subscript (empty for the observational regime); cube and
// given keep their display order.
struct ProbTerm {
    Assignment world;
    std::vector<std::pair<std::string, std::string>> cube;
    std::vector<std::pair<std::string, std::string>> given;
};

inline Assignment as_assignment(const std::vector<std::pair<std::string, std::string>>& cells) {
    Assignment out;
    for (const auto& [var, val] : cells) {
        const auto it = out.find(var);
        if (it != out.end() && it->second != val) {
            throw std::invalid_argument("Probability term assigns '" + var + "' twice");
        }
        out.insert({var, val});
    }
    return out;
}

inline bool operator==(const ProbTerm& a, const ProbTerm& b) {
    return a.world == b.world && as_assignment(a.cube) == as_assignment(b.cube) &&
           as_assignment(a.given) == as_assignment(b.given);
}
inline bool operator!=(const ProbTerm& a, const ProbTerm& b) { return !(a == b); }

enum class ExprKind { Constant, Prob, Sum, Diff, Product, Quotient, Max, Min };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind = ExprKind::Constant;
    Rational constant{0};
    ProbTerm term;
    std::vector<ExprPtr> args;
};

inline ExprPtr expr_constant(const Rational& value) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Constant;
    e->constant = value;
    return e;
}

inline ExprPtr expr_prob(ProbTerm term) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Prob;
    e->term = std::move(term);
    return e;
}

namespace detail {

inline ExprPtr expr_nary(ExprKind kind, std::vector<ExprPtr> args) {
    if (args.empty()) throw std::invalid_argument("Expression node needs at least one argument");
    if (args.size() == 1 && (kind == ExprKind::Sum || kind == ExprKind::Product)) return args[0];
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->args = std::move(args);
    return e;
}

}  // namespace detail

inline ExprPtr expr_sum(std::vector<ExprPtr> args) { return detail::expr_nary(ExprKind::Sum, std::move(args)); }
inline ExprPtr expr_product(std::vector<ExprPtr> args) {
    return detail::expr_nary(ExprKind::Product, std::move(args));
}
inline ExprPtr expr_max(std::vector<ExprPtr> args) { return detail::expr_nary(ExprKind::Max, std::move(args)); }
inline ExprPtr expr_min(std::vector<ExprPtr> args) { return detail::expr_nary(ExprKind::Min, std::move(args)); }

inline ExprPtr expr_diff(ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Diff;
    e->args = {std::move(lhs), std::move(rhs)};
    return e;
}

inline ExprPtr expr_quotient(ExprPtr num, ExprPtr den) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Quotient;
    e->args = {std::move(num), std::move(den)};
    return e;
}

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprKind::Constant:
            return a->constant == b->constant;
        case ExprKind::Prob:
            return a->term == b->term;
        default:
            break;
    }
    if (a->args.size() != b->args.size()) return false;
    for (std::size_t i = 0; i < a->args.size(); ++i) {
        if (!expr_equal(a->args[i], b->args[i])) return false;
    }
    return true;
}

// Rendering. Binary variables with one-letter names use the bar
// convention: value 1 prints as the lowercase letter, value 0 with a
// combining macron. Everything else prints as Name=value.
namespace detail {

inline bool bar_style(const Variable& v) {
    return v.name.size() == 1 && v.domain == std::vector<std::string>{"0", "1"};
}

template <class G>
std::string value_token(const G& g, const std::string& var, const std::string& val, bool latex) {
    const Variable& v = g.variable(var);
    if (bar_style(v)) {
        std::string base(1, static_cast<char>(std::tolower(static_cast<unsigned char>(var[0]))));
        if (val == "1") return base;
        if (latex) return "\\bar{" + base + "}";
        return base + "̄";
    }
    return var + "=" + val;
}

template <class G>
std::string cells_token(const G& g, const std::vector<std::pair<std::string, std::string>>& cells,
                        bool latex, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += sep;
        out += value_token(g, cells[i].first, cells[i].second, latex);
    }
    return out;
}

template <class G>
std::string prob_token(const G& g, const ProbTerm& t, bool latex) {
    std::string out = "P";
    if (!t.world.empty()) {
        std::string sub;
        for (const auto& [var, val] : t.world) {
            if (!sub.empty()) sub += ",";
            sub += value_token(g, var, val, latex);
        }
        out += "_{" + sub + "}";
    }
    out += "(" + cells_token(g, t.cube, latex, ", ");
    if (!t.given.empty()) {
        out += (latex ? " \\mid " : " | ") + cells_token(g, t.given, latex, ", ");
    }
    out += ")";
    return out;
}

template <class G>
std::string render(const G& g, const ExprPtr& e, bool latex) {
    const auto wrap = [&](const ExprPtr& a) {
        const std::string s = render(g, a, latex);
        if (a->kind == ExprKind::Sum || a->kind == ExprKind::Diff) return "(" + s + ")";
        return s;
    };
    switch (e->kind) {
        case ExprKind::Constant:
            return e->constant.to_string();
        case ExprKind::Prob:
            return prob_token(g, e->term, latex);
        case ExprKind::Sum: {
            std::string out;
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i) out += " + ";
                out += e->args[i]->kind == ExprKind::Diff ? wrap(e->args[i]) : render(g, e->args[i], latex);
            }
            return out;
        }
        case ExprKind::Diff:
            return render(g, e->args[0], latex) + " - " + wrap(e->args[1]);
        case ExprKind::Product: {
            std::string out;
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i && latex) out += " ";
                out += wrap(e->args[i]);
            }
            return out;
        }
        case ExprKind::Quotient:
            if (latex) return "\\frac{" + render(g, e->args[0], true) + "}{" + render(g, e->args[1], true) + "}";
            return wrap(e->args[0]) + " / " + wrap(e->args[1]);
        case ExprKind::Max:
        case ExprKind::Min: {
            std::string out = e->kind == ExprKind::Max ? "max" : "min";
            out += latex ? "\\{" : "{";
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i) out += "; ";
                out += render(g, e->args[i], latex);
            }
            out += latex ? "\\}" : "}";
            return out;
        }
    }
    throw std::logic_error("Unhandled expression kind");
}

}  // namespace detail

template <class G>
std::string to_text(const G& g, const ExprPtr& e) {
    return detail::render(g, e, false);
}

template <class G>
std::string to_latex(const G& g, const ExprPtr& e) {
    return detail::render(g, e, true);
}

// Evaluation against a resolver for probability terms. A resolver returning
// nullopt (an undefined conditional) poisons the whole expression; the
// rendered offending term is reported.
template <class P>
struct EvalOutcome {
    std::optional<P> value;
    std::string undefined;
};

template <class P>
EvalOutcome<P> evaluate(const ExprPtr& e,
                        const std::function<std::optional<P>(const ProbTerm&)>& term_value,
                        const std::function<std::string(const ProbTerm&)>& term_name) {
    const auto undefined = [](std::string why) {
        EvalOutcome<P> out;
        out.undefined = std::move(why);
        return out;
    };
    const auto ok = [](P v) {
        EvalOutcome<P> out;
        out.value = std::move(v);
        return out;
    };
    switch (e->kind) {
        case ExprKind::Constant:
            if constexpr (std::is_same_v<P, Rational>) {
                return ok(e->constant);
            } else {
                return ok(e->constant.to_double());
            }
        case ExprKind::Prob: {
            auto v = term_value(e->term);
            if (!v) return undefined(term_name(e->term));
            return ok(*v);
        }
        default:
            break;
    }
    std::vector<P> vals;
    vals.reserve(e->args.size());
    for (const auto& a : e->args) {
        auto r = evaluate<P>(a, term_value, term_name);
        if (!r.value) return r;
        vals.push_back(*r.value);
    }
    switch (e->kind) {
        case ExprKind::Sum: {
            P s = vals[0];
            for (std::size_t i = 1; i < vals.size(); ++i) s += vals[i];
            return ok(s);
        }
        case ExprKind::Diff:
            return ok(vals[0] - vals[1]);
        case ExprKind::Product: {
            P s = vals[0];
            for (std::size_t i = 1; i < vals.size(); ++i) s *= vals[i];
            return ok(s);
        }
        case ExprKind::Quotient:
            if (vals[1] == P{0}) return undefined(term_name(e->args[1]->term));
            return ok(vals[0] / vals[1]);
        case ExprKind::Max: {
            P s = vals[0];
            for (std::size_t i = 1; i < vals.size(); ++i) {
                if (s < vals[i]) s = vals[i];
            }
            return ok(s);
        }
        case ExprKind::Min: {
            P s = vals[0];
            for (std::size_t i = 1; i < vals.size(); ++i) {
                if (vals[i] < s) s = vals[i];
            }
            return ok(s);
        }
        default:
            throw std::logic_error("Unhandled expression kind");
    }
}

}  // namespace cfbounds
