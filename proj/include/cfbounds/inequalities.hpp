#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bounds.hpp"

namespace cfbounds {

// One observable behaviour: when the instruments are held at z, the
// treatments and outcomes take these values.
struct Triple {
    Assignment z;
    Assignment a;
    Assignment y;
};

inline bool operator==(const Triple& s, const Triple& t) {
    return s.z == t.z && s.a == t.a && s.y == t.y;
}

struct TripleSet {
    std::vector<Triple> triples;
};

namespace detail {

struct TripleContext {
    std::vector<std::string> z_vars, a_vars, y_vars;
    std::vector<Triple> triples;  // deduplicated, input order
    std::vector<SingleWorldEvent> events;
};

inline std::vector<std::string> assignment_keys(const Assignment& a) {
    std::vector<std::string> keys;
    for (const auto& [var, val] : a) keys.push_back(var);
    return keys;
}

inline void require_disjoint_roles(const std::vector<std::string>& zs,
                                   const std::vector<std::string>& as_,
                                   const std::vector<std::string>& ys) {
    std::set<std::string> seen;
    for (const auto* group : {&zs, &as_, &ys}) {
        for (const auto& v : *group) {
            if (!seen.insert(v).second) {
                throw std::invalid_argument("Variable '" + v +
                                            "' appears in more than one of instrument, treatment, outcome");
            }
        }
    }
}

inline void require_instruments(const Admg& g, const std::vector<std::string>& zs,
                                const std::vector<std::string>& as_, const std::vector<std::string>& ys) {
    if (zs.empty()) throw std::invalid_argument("Behaviour sets need at least one instrument variable");
    if (as_.empty()) throw std::invalid_argument("Behaviour sets need at least one treatment variable");
    if (ys.empty()) throw std::invalid_argument("Behaviour sets need at least one outcome variable");
    for (const auto& v : zs) require_observed(g, v, "Instrument");
    for (const auto& v : as_) require_observed(g, v, "Intervention");
    for (const auto& v : ys) require_observed(g, v, "Outcome");
    require_disjoint_roles(zs, as_, ys);
    const std::set<std::string> zset(zs.begin(), zs.end());
    const std::set<std::string> aset(as_.begin(), as_.end());
    const std::set<std::string> yset(ys.begin(), ys.end());
    if (!is_causally_irrelevant(g, zset, yset, aset)) {
        std::string names;
        for (const auto& v : zs) names += (names.empty() ? "" : ", ") + v;
        throw std::invalid_argument("Instrument set {" + names +
                                    "} affects the outcome other than through the treatment variables");
    }
}

inline TripleContext triple_context(const Admg& g, const TripleSet& s) {
    if (s.triples.empty()) throw std::invalid_argument("Behaviour sets need at least one triple");
    TripleContext ctx;
    ctx.z_vars = assignment_keys(s.triples.front().z);
    ctx.a_vars = assignment_keys(s.triples.front().a);
    ctx.y_vars = assignment_keys(s.triples.front().y);
    require_instruments(g, ctx.z_vars, ctx.a_vars, ctx.y_vars);
    for (const auto& t : s.triples) {
        if (assignment_keys(t.z) != ctx.z_vars || assignment_keys(t.a) != ctx.a_vars ||
            assignment_keys(t.y) != ctx.y_vars) {
            throw std::invalid_argument("Every triple must range over the same variables");
        }
        if (std::find(ctx.triples.begin(), ctx.triples.end(), t) != ctx.triples.end()) continue;
        Assignment outcome = t.a;
        for (const auto& [var, val] : t.y) outcome.insert({var, val});
        SingleWorldEvent e{Intervention{t.z}, std::move(outcome)};
        validate_event(g, e);
        ctx.triples.push_back(t);
        ctx.events.push_back(std::move(e));
    }
    return ctx;
}

// Pairwise compatibility between behaviours: true where the two events can
// both be realised by one unit.
inline std::vector<std::vector<bool>> compatibility(const Admg& g,
                                                    const std::vector<SingleWorldEvent>& events,
                                                    ContradictionCache* cache) {
    ContradictionCache local;
    ContradictionCache* c = cache ? cache : &local;
    std::vector<std::vector<bool>> adj(events.size(), std::vector<bool>(events.size(), false));
    for (std::size_t i = 0; i < events.size(); ++i) {
        for (std::size_t j = i + 1; j < events.size(); ++j) {
            const bool ok = !contradicts(g, events[i], events[j], c);
            adj[i][j] = ok;
            adj[j][i] = ok;
        }
    }
    return adj;
}

// Exact maximum clique, branch and bound with a greedy colouring bound.
inline int max_clique(const std::vector<std::vector<bool>>& adj) {
    const std::size_t n = adj.size();
    int best = 0;
    std::vector<std::size_t> clique;
    const auto expand = [&](auto&& self, std::vector<std::size_t>& cand) -> void {
        // Greedy colouring: candidates are re-ordered by colour class so the
        // class index bounds the largest clique extension.
        std::vector<std::size_t> ordered;
        std::vector<int> bound;
        std::vector<std::vector<std::size_t>> classes;
        for (const std::size_t v : cand) {
            bool placed = false;
            for (std::size_t k = 0; k < classes.size() && !placed; ++k) {
                bool clash = false;
                for (const std::size_t u : classes[k]) {
                    if (adj[v][u]) {
                        clash = true;
                        break;
                    }
                }
                if (!clash) {
                    classes[k].push_back(v);
                    placed = true;
                }
            }
            if (!placed) classes.push_back({v});
        }
        for (std::size_t k = 0; k < classes.size(); ++k) {
            for (const std::size_t v : classes[k]) {
                ordered.push_back(v);
                bound.push_back(static_cast<int>(k) + 1);
            }
        }
        for (std::size_t i = ordered.size(); i-- > 0;) {
            if (static_cast<int>(clique.size()) + bound[i] <= best) return;
            const std::size_t v = ordered[i];
            std::vector<std::size_t> next;
            for (std::size_t j = 0; j < i; ++j) {
                if (adj[v][ordered[j]]) next.push_back(ordered[j]);
            }
            clique.push_back(v);
            if (next.empty()) {
                best = std::max(best, static_cast<int>(clique.size()));
            } else {
                self(self, next);
            }
            clique.pop_back();
        }
    };
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    if (n > 0) expand(expand, all);
    return best;
}

}  // namespace detail

// Largest number of the given behaviours a single unit can exhibit at once:
// the maximum pairwise-compatible subset.
inline int phi(const Admg& g, const TripleSet& s, ContradictionCache* cache = nullptr) {
    if (s.triples.empty()) return 0;
    const auto ctx = detail::triple_context(g, s);
    return detail::max_clique(detail::compatibility(g, ctx.events, cache));
}

// An upper bound on the summed arm probabilities of a behaviour set: at most
// rhs of the behaviours can be realised by any one unit.
struct Constraint {
    TripleSet set;
    ExprPtr lhs;
    int rhs = 0;
};

namespace detail {

inline ExprPtr triple_term(const Admg& g, const Triple& t) {
    ProbTerm term;
    term.world = t.z;
    for (const auto& v : g.vertices()) {
        if (t.a.count(v.name)) {
            term.cube.push_back({v.name, t.a.at(v.name)});
        } else if (t.y.count(v.name)) {
            term.cube.push_back({v.name, t.y.at(v.name)});
        }
    }
    return expr_prob(std::move(term));
}

}  // namespace detail

inline Constraint make_constraint(const Admg& g, const TripleSet& s, ContradictionCache* cache = nullptr) {
    const auto ctx = detail::triple_context(g, s);
    const std::set<std::string> zset(ctx.z_vars.begin(), ctx.z_vars.end());
    require_identifiable(g, zset);
    Constraint c;
    c.set.triples = ctx.triples;
    c.rhs = detail::max_clique(detail::compatibility(g, ctx.events, cache));
    std::vector<ExprPtr> terms;
    for (const auto& t : ctx.triples) terms.push_back(detail::triple_term(g, t));
    c.lhs = expr_sum(std::move(terms));
    return c;
}

// Irredundant constraints over behaviour sets up to max_size members. When
// the ground set is too large for exhaustive enumeration the result is
// truncated and carries a warning.
struct ConstraintSet {
    std::vector<Constraint> constraints;
    std::string warning;
};

namespace detail {

inline constexpr std::size_t kConstraintDenseCap = 20;
inline constexpr std::size_t kConstraintCandidateCap = 200000;

struct GroundSet {
    TripleContext ctx;
    std::vector<Triple> triples;
    std::vector<std::vector<bool>> adj;
};

inline GroundSet constraint_ground(const Admg& g, const std::set<std::string>& instruments,
                                   const std::set<std::string>& treat, const std::set<std::string>& outcome,
                                   ContradictionCache* cache) {
    std::vector<Variable> z_space, a_space, y_space;
    for (const auto& v : g.vertices()) {
        if (instruments.count(v.name)) {
            z_space.push_back(v);
        } else if (treat.count(v.name)) {
            a_space.push_back(v);
        } else if (outcome.count(v.name)) {
            y_space.push_back(v);
        }
    }
    if (z_space.size() != instruments.size() || a_space.size() != treat.size() ||
        y_space.size() != outcome.size()) {
        for (const auto& n : instruments) require_observed(g, n, "Instrument");
        for (const auto& n : treat) require_observed(g, n, "Intervention");
        for (const auto& n : outcome) require_observed(g, n, "Outcome");
    }

    GroundSet ground;
    TripleSet all;
    for (const auto& z : enumerate_outcomes(OutcomeSpace{z_space})) {
        for (const auto& a : enumerate_outcomes(OutcomeSpace{a_space})) {
            for (const auto& y : enumerate_outcomes(OutcomeSpace{y_space})) {
                all.triples.push_back({z, a, y});
            }
        }
    }
    ground.ctx = triple_context(g, all);
    const std::set<std::string> zset(instruments.begin(), instruments.end());
    require_identifiable(g, zset);
    ground.triples = ground.ctx.triples;
    ground.adj = compatibility(g, ground.ctx.events, cache);
    return ground;
}

inline Constraint member_constraint(const Admg& g, const GroundSet& ground,
                                    const std::vector<std::size_t>& members, int value) {
    Constraint c;
    c.rhs = value;
    std::vector<ExprPtr> terms;
    for (const std::size_t v : members) {
        c.set.triples.push_back(ground.triples[v]);
        terms.push_back(triple_term(g, ground.triples[v]));
    }
    c.lhs = expr_sum(std::move(terms));
    return c;
}

}  // namespace detail

inline ConstraintSet generate_constraints(const Admg& g, const std::set<std::string>& instruments,
                                          const std::set<std::string>& treat,
                                          const std::set<std::string>& outcome, std::size_t max_size = 0) {
    ContradictionCache cache;
    const auto ground = detail::constraint_ground(g, instruments, treat, outcome, &cache);
    const std::size_t n = ground.triples.size();
    if (max_size == 0) max_size = std::min<std::size_t>(n, 12);
    max_size = std::min(max_size, n);

    ConstraintSet out;
    if (n <= detail::kConstraintDenseCap) {
        // Largest compatible subset per mask: either skip the lowest member
        // or take it together with its compatible part.
        std::vector<std::uint32_t> nbr(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (ground.adj[i][j]) nbr[i] |= std::uint32_t(1) << j;
            }
        }
        const std::size_t masks = std::size_t(1) << n;
        std::vector<std::uint8_t> best(masks, 0);
        for (std::size_t m = 1; m < masks; ++m) {
            const std::size_t v = static_cast<std::size_t>(std::countr_zero(m));
            const std::size_t rest = m & (m - 1);
            best[m] = std::max<std::uint8_t>(best[rest], 1 + best[rest & nbr[v]]);
        }
        for (std::size_t m = 1; m < masks; ++m) {
            const int size = std::popcount(m);
            if (static_cast<std::size_t>(size) > max_size) continue;
            const int value = best[m];
            if (value >= size) continue;
            bool tight = true;
            for (std::size_t v = 0; v < n && tight; ++v) {
                if ((m >> v) & 1) tight = best[m & ~(std::size_t(1) << v)] == value;
            }
            if (!tight) continue;
            std::vector<std::size_t> members;
            for (std::size_t v = 0; v < n; ++v) {
                if ((m >> v) & 1) members.push_back(v);
            }
            out.constraints.push_back(detail::member_constraint(g, ground, members, value));
        }
        return out;
    }

    // Too many behaviours for the dense subset table: enumerate candidate
    // sets by size until the cap, then report truncation.
    std::size_t seen = 0;
    bool truncated = false;
    std::vector<std::size_t> pick;
    const auto value_of = [&](const std::vector<std::size_t>& members, std::size_t skip) {
        std::vector<std::vector<bool>> sub;
        std::vector<std::size_t> kept;
        for (const std::size_t v : members) {
            if (v != skip) kept.push_back(v);
        }
        sub.assign(kept.size(), std::vector<bool>(kept.size(), false));
        for (std::size_t i = 0; i < kept.size(); ++i) {
            for (std::size_t j = 0; j < kept.size(); ++j) sub[i][j] = ground.adj[kept[i]][kept[j]];
        }
        return detail::max_clique(sub);
    };
    const auto visit = [&](auto&& self, std::size_t from, std::size_t want) -> bool {
        if (pick.size() == want) {
            if (++seen > detail::kConstraintCandidateCap) return false;
            const int value = value_of(pick, n);
            if (value < static_cast<int>(want)) {
                bool tight = true;
                for (const std::size_t v : pick) {
                    if (value_of(pick, v) != value) {
                        tight = false;
                        break;
                    }
                }
                if (tight) out.constraints.push_back(detail::member_constraint(g, ground, pick, value));
            }
            return true;
        }
        for (std::size_t v = from; v < n; ++v) {
            pick.push_back(v);
            const bool go = self(self, v + 1, want);
            pick.pop_back();
            if (!go) return false;
        }
        return true;
    };
    for (std::size_t want = 2; want <= max_size && !truncated; ++want) {
        truncated = !visit(visit, 0, want);
    }
    if (truncated) {
        out.warning = "Stopped after " + std::to_string(detail::kConstraintCandidateCap) +
                      " candidate sets; the constraint list is partial";
    }
    return out;
}

// The per-treatment grouping of the two-member constraints: for a fixed
// treatment at most one joint outcome can be realised, whichever arm each
// outcome is read from.
struct FamilyConstraint {
    Assignment a;
    ExprPtr lhs;
    int rhs = 1;
};

inline std::vector<FamilyConstraint> family_constraints(const Admg& g,
                                                        const std::set<std::string>& instruments,
                                                        const std::set<std::string>& treat,
                                                        const std::set<std::string>& outcome) {
    ContradictionCache cache;
    const auto ground = detail::constraint_ground(g, instruments, treat, outcome, &cache);

    std::vector<Variable> z_space, a_space, y_space;
    for (const auto& v : g.vertices()) {
        if (instruments.count(v.name)) {
            z_space.push_back(v);
        } else if (treat.count(v.name)) {
            a_space.push_back(v);
        } else if (outcome.count(v.name)) {
            y_space.push_back(v);
        }
    }
    const auto zs = enumerate_outcomes(OutcomeSpace{z_space});
    const auto ys = enumerate_outcomes(OutcomeSpace{y_space});

    const auto index_of = [&](const Triple& t) {
        for (std::size_t i = 0; i < ground.triples.size(); ++i) {
            if (ground.triples[i] == t) return i;
        }
        throw std::logic_error("Behaviour missing from the ground set");
    };

    std::vector<FamilyConstraint> out;
    for (const auto& a : enumerate_outcomes(OutcomeSpace{a_space})) {
        for (std::size_t i = 0; i < ys.size(); ++i) {
            for (std::size_t j = i + 1; j < ys.size(); ++j) {
                for (const auto& zi : zs) {
                    for (const auto& zj : zs) {
                        const auto u = index_of({zi, a, ys[i]});
                        const auto v = index_of({zj, a, ys[j]});
                        if (ground.adj[u][v]) {
                            throw std::invalid_argument("Cannot group this treatment into a family: behaviours " +
                                                        to_string(ground.ctx.events[u]) + " and " +
                                                        to_string(ground.ctx.events[v]) + " are compatible");
                        }
                    }
                }
            }
        }
        std::vector<ExprPtr> addends;
        for (const auto& y : ys) {
            std::vector<ExprPtr> arms;
            for (const auto& z : zs) arms.push_back(detail::triple_term(g, {z, a, y}));
            addends.push_back(expr_max(std::move(arms)));
        }
        out.push_back({a, expr_sum(std::move(addends)), 1});
    }
    return out;
}

// Evaluation of a constraint list against one observed table.
template <class P>
struct ConstraintCheck {
    Constraint constraint;
    std::optional<P> value;
    std::optional<P> slack;  // rhs minus value
    bool violated = false;
    std::string undefined;
};

template <class P>
struct ViolationReport {
    std::vector<ConstraintCheck<P>> checks;      // input order
    std::vector<std::size_t> violations;         // most violated first
};

template <class P>
ViolationReport<P> check_distribution(const Admg& g, const std::vector<Constraint>& constraints,
                                      const DiscreteDistribution<P>& dist, const P& tolerance = P(0)) {
    ViolationReport<P> report;
    for (const auto& c : constraints) {
        ConstraintCheck<P> check;
        check.constraint = c;
        auto result = evaluate_against<P>(g, dist, c.lhs);
        if (result.value) {
            check.value = *result.value;
            check.slack = P(c.rhs) - *result.value;
            check.violated = *check.slack < -tolerance;
        } else {
            check.undefined = result.undefined;
        }
        report.checks.push_back(std::move(check));
    }
    for (std::size_t i = 0; i < report.checks.size(); ++i) {
        if (report.checks[i].violated) report.violations.push_back(i);
    }
    std::stable_sort(report.violations.begin(), report.violations.end(),
                     [&](std::size_t lhs, std::size_t rhs) {
                         return *report.checks[lhs].slack < *report.checks[rhs].slack;
                     });
    return report;
}

}  // namespace cfbounds
