#pragma once

#include <set>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "symbolic.hpp"

namespace cfbounds {

// An interventional distribution P(. | do(treat)) is identified here when no
// treated variable touches a bidirected edge; the treated variables are then
// unconfounded given their predecessors and the g-formula applies.
inline bool can_identify(const Admg& g, const std::set<std::string>& treat) {
    for (const auto& t : treat) {
        detail::require_observed(g, t, "Intervention");
        if (g.has_bidirected(t)) return false;
    }
    return true;
}

inline void require_identifiable(const Admg& g, const std::set<std::string>& treat) {
    for (const auto& t : treat) {
        detail::require_observed(g, t, "Intervention");
        for (const auto& [a, b] : g.bidirected()) {
            if (a == t || b == t) {
                throw std::invalid_argument("Cannot identify the effect of do(" + t +
                                            "): bidirected edge (" + a + " <-> " + b + ")");
            }
        }
    }
}

namespace detail {

inline Admg induced_admg(const Admg& g, const std::set<std::string>& keep) {
    std::vector<Variable> vars;
    for (const auto& v : g.vertices()) {
        if (keep.count(v.name)) vars.push_back(v);
    }
    std::vector<std::pair<std::string, std::string>> directed;
    for (const auto& [a, b] : g.directed()) {
        if (keep.count(a) && keep.count(b)) directed.push_back({a, b});
    }
    std::vector<std::pair<std::string, std::string>> bidirected;
    for (const auto& [a, b] : g.bidirected()) {
        if (keep.count(a) && keep.count(b)) bidirected.push_back({a, b});
    }
    return Admg(vars, directed, bidirected);
}

}  // namespace detail

// Symbolic g-formula for P(cube | do(world)) in terms of the observational
// distribution: one conditional factor per untreated variable given all its
// topological predecessors, grouped by confounded district, summed over the
// variables the cube leaves free. Trailing free variables integrate out and
// are dropped.
inline ExprPtr g_formula(const Admg& g, const Intervention& world, const Assignment& cube) {
    detail::check_assignment(g, world.values, "Intervention");
    detail::check_assignment(g, cube, "Outcome");
    std::set<std::string> treat;
    for (const auto& [var, val] : world.values) {
        (void)val;
        treat.insert(var);
    }
    require_identifiable(g, treat);

    Assignment want;
    for (const auto& [var, val] : cube) {
        const auto it = world.values.find(var);
        if (it != world.values.end()) {
            if (it->second != val) return expr_constant(Rational(0));
            continue;
        }
        want.insert({var, val});
    }

    const auto term = [&](const std::vector<std::pair<std::string, std::string>>& cells,
                          const std::vector<std::pair<std::string, std::string>>& given) {
        ProbTerm t;
        t.cube = cells;
        t.given = given;
        return expr_prob(std::move(t));
    };

    if (want.empty()) return expr_constant(Rational(1));

    if (treat.empty()) {
        std::vector<std::pair<std::string, std::string>> cells;
        for (const auto& v : g.vertices()) {
            const auto it = want.find(v.name);
            if (it != want.end()) cells.push_back({v.name, it->second});
        }
        return term(cells, {});
    }

    // Parentless treatments are exogenous, so intervening equals
    // conditioning.
    bool exogenous = true;
    for (const auto& t : treat) {
        if (!g.parents(t).empty()) exogenous = false;
    }
    if (exogenous) {
        std::vector<std::pair<std::string, std::string>> cells;
        for (const auto& v : g.vertices()) {
            const auto it = want.find(v.name);
            if (it != want.end()) cells.push_back({v.name, it->second});
        }
        std::vector<std::pair<std::string, std::string>> given;
        for (const auto& v : g.vertices()) {
            const auto it = world.values.find(v.name);
            if (it != world.values.end()) given.push_back({v.name, it->second});
        }
        return term(cells, given);
    }

    const std::vector<std::string> topo = g.topological_order();
    std::set<std::string> free;
    for (const auto& v : g.vertices()) {
        if (!treat.count(v.name) && !want.count(v.name)) free.insert(v.name);
    }

    // A trailing free variable appears in no other factor's conditioning
    // set; its factor sums to one and is dropped, repeatedly.
    std::set<std::string> dropped;
    for (std::size_t i = topo.size(); i-- > 0;) {
        if (treat.count(topo[i])) continue;
        if (!free.count(topo[i])) break;
        dropped.insert(topo[i]);
    }

    std::set<std::string> untreated;
    for (const auto& v : g.vertices()) {
        if (!treat.count(v.name) && !dropped.count(v.name)) untreated.insert(v.name);
    }
    const Admg sub = detail::induced_admg(g, untreated);

    // One factor per kept variable: (variable, its topological
    // predecessors), grouped by district.
    std::vector<std::pair<std::string, std::vector<std::string>>> factors;
    for (const auto& district : sub.districts()) {
        const std::set<std::string> members(district.begin(), district.end());
        for (const auto& v : topo) {
            if (!members.count(v)) continue;
            std::vector<std::string> preds;
            for (const auto& p : topo) {
                if (p == v) break;
                if (!dropped.count(p)) preds.push_back(p);
            }
            factors.push_back({v, preds});
        }
    }

    std::vector<Variable> free_vars;
    for (const auto& v : g.vertices()) {
        if (free.count(v.name) && !dropped.count(v.name)) free_vars.push_back(v);
    }

    std::vector<ExprPtr> addends;
    for (const auto& completion : enumerate_outcomes(OutcomeSpace{free_vars})) {
        Assignment full = completion;
        for (const auto& [var, val] : want) full.insert({var, val});
        for (const auto& [var, val] : world.values) full.insert({var, val});
        std::vector<ExprPtr> parts;
        for (const auto& [v, preds] : factors) {
            std::vector<std::pair<std::string, std::string>> given;
            for (const auto& p : preds) given.push_back({p, full.at(p)});
            parts.push_back(term({{v, full.at(v)}}, given));
        }
        addends.push_back(expr_product(std::move(parts)));
    }
    return expr_sum(std::move(addends));
}

// Resolves probability terms against an observational table: subscripted
// terms expand through the g-formula first. Returns nullopt on conditioning
// events of probability zero.
template <class P>
std::function<std::optional<P>(const ProbTerm&)> make_term_evaluator(const Admg& g,
                                                                     const DiscreteDistribution<P>& dist) {
    return [&g, &dist](const ProbTerm& t) -> std::optional<P> {
        if (t.world.empty()) {
            if (t.given.empty()) return dist.prob(as_assignment(t.cube));
            return dist.conditional(as_assignment(t.cube), as_assignment(t.given));
        }
        if (!t.given.empty()) {
            throw std::invalid_argument("Subscripted probability terms cannot also condition");
        }
        const ExprPtr expanded = g_formula(g, Intervention{t.world}, as_assignment(t.cube));
        const auto inner = make_term_evaluator(g, dist);
        const auto r = evaluate<P>(expanded, inner, [](const ProbTerm&) { return std::string{}; });
        if (!r.value) return std::nullopt;
        return *r.value;
    };
}

// Full evaluation of a symbolic expression against an observational table.
template <class P>
EvalOutcome<P> evaluate_against(const Admg& g, const DiscreteDistribution<P>& dist, const ExprPtr& e) {
    return evaluate<P>(e, make_term_evaluator<P>(g, dist),
                       [&g](const ProbTerm& t) { return detail::prob_token(g, t, false); });
}

}  // namespace cfbounds
