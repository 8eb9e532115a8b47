#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "identify.hpp"

namespace cfbounds {

// A request for bounds on P(outcome under do(world)) using a single
// instrument variable.
struct BoundQuery {
    std::string instrument;
    Intervention world;
    Assignment outcome;
};

struct BoundOptions {
    bool prune = true;
};

// An ordered partial assignment; free variables range over their domains.
using Cube = std::vector<std::pair<std::string, std::string>>;

namespace detail {

struct QueryContext {
    std::vector<std::string> treat_vars;    // declaration order
    std::vector<std::string> outcome_vars;  // declaration order
    std::vector<Variable> space_vars;       // observed minus instrument
    std::vector<std::string> z_values;
    Assignment a1;
    Assignment yt;
};

inline QueryContext validate_query(const Admg& g, const BoundQuery& q) {
    require_observed(g, q.instrument, "Instrument");
    check_assignment(g, q.world.values, "Intervention");
    check_assignment(g, q.outcome, "Outcome");
    if (q.world.values.empty()) throw std::invalid_argument("Bound query has an empty intervention");
    if (q.outcome.empty()) throw std::invalid_argument("Bound query has an empty outcome");
    if (q.world.values.count(q.instrument) || q.outcome.count(q.instrument)) {
        throw std::invalid_argument("Instrument '" + q.instrument + "' overlaps the query");
    }
    std::set<std::string> treat;
    std::set<std::string> outs;
    for (const auto& [var, val] : q.world.values) {
        (void)val;
        treat.insert(var);
    }
    for (const auto& [var, val] : q.outcome) {
        (void)val;
        if (treat.count(var)) {
            throw std::invalid_argument("Outcome variable '" + var + "' is also intervened on");
        }
        outs.insert(var);
    }
    if (!is_causally_irrelevant(g, {q.instrument}, outs, treat)) {
        throw std::invalid_argument("'" + q.instrument +
                                    "' is not a valid instrument: it affects the outcome other than "
                                    "through the intervened variables");
    }
    if (g.has_bidirected(q.instrument)) {
        throw std::invalid_argument("'" + q.instrument +
                                    "' is not a valid instrument: it touches a bidirected edge");
    }

    QueryContext ctx;
    for (const auto& v : g.vertices()) {
        if (treat.count(v.name)) ctx.treat_vars.push_back(v.name);
        if (outs.count(v.name)) ctx.outcome_vars.push_back(v.name);
        if (v.name != q.instrument) ctx.space_vars.push_back(v);
    }
    ctx.z_values = g.variable(q.instrument).domain;
    ctx.a1 = q.world.values;
    ctx.yt = q.outcome;
    return ctx;
}

// All cubes over the given variables whose completions stay inside the set;
// used for minimal covers.
inline std::vector<Assignment> cube_completions(const std::vector<Variable>& vars, const Assignment& cube) {
    OutcomeSpace space;
    for (const auto& v : vars) {
        if (!cube.count(v.name)) space.vars.push_back(v);
    }
    std::vector<Assignment> out;
    for (auto o : enumerate_outcomes(space)) {
        for (const auto& [var, val] : cube) o.insert({var, val});
        out.push_back(std::move(o));
    }
    return out;
}

inline std::string cube_pattern(const std::vector<Variable>& vars, const Assignment& cube) {
    std::string key;
    std::size_t specified = 0;
    for (const auto& v : vars) {
        const auto it = cube.find(v.name);
        if (it == cube.end()) {
            key += '\x01';
        } else {
            const auto pos = std::find(v.domain.begin(), v.domain.end(), it->second) - v.domain.begin();
            key += static_cast<char>('\x02' + pos);
            ++specified;
        }
    }
    return std::string(1, static_cast<char>('0' + specified)) + key;
}

// Minimal number of pairwise-disjoint cubes whose union is exactly the
// piece. Exhaustive search; ties resolved toward the cover whose sorted
// pattern list is lexicographically least, with free slots ranking before
// values.
inline std::vector<Cube> minimal_disjoint_cover(const std::vector<Variable>& vars,
                                                const std::set<Assignment>& piece) {
    if (piece.empty()) return {};

    std::vector<Assignment> candidates;
    std::vector<std::vector<Assignment>> completions;
    std::vector<std::size_t> subset(vars.size(), 0);
    for (;;) {
        Assignment cube;
        bool overflow = true;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (subset[i] > 0) cube.insert({vars[i].name, vars[i].domain[subset[i] - 1]});
        }
        auto comp = cube_completions(vars, cube);
        bool inside = true;
        for (const auto& o : comp) {
            if (!piece.count(o)) {
                inside = false;
                break;
            }
        }
        if (inside) {
            candidates.push_back(cube);
            completions.push_back(std::move(comp));
        }
        for (std::size_t i = vars.size(); i-- > 0;) {
            if (++subset[i] <= vars[i].domain.size()) {
                overflow = false;
                break;
            }
            subset[i] = 0;
        }
        if (overflow) break;
    }

    const std::vector<Assignment> targets(piece.begin(), piece.end());
    std::vector<std::vector<std::size_t>> covering(targets.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        for (const auto& o : completions[c]) {
            const auto it = std::lower_bound(targets.begin(), targets.end(), o);
            covering[it - targets.begin()].push_back(c);
        }
    }

    std::vector<std::size_t> chosen;
    std::vector<std::vector<std::size_t>> best;
    std::set<Assignment> covered;
    const auto search = [&](auto&& self) -> void {
        if (!best.empty() && chosen.size() > best.front().size()) return;
        std::size_t first = targets.size();
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (!covered.count(targets[i])) {
                first = i;
                break;
            }
        }
        if (first == targets.size()) {
            if (best.empty() || chosen.size() < best.front().size()) best.clear();
            if (best.empty() || chosen.size() == best.front().size()) best.push_back(chosen);
            return;
        }
        for (const auto c : covering[first]) {
            bool disjoint = true;
            for (const auto& o : completions[c]) {
                if (covered.count(o)) {
                    disjoint = false;
                    break;
                }
            }
            if (!disjoint) continue;
            for (const auto& o : completions[c]) covered.insert(o);
            chosen.push_back(c);
            self(self);
            chosen.pop_back();
            for (const auto& o : completions[c]) covered.erase(o);
        }
    };
    search(search);

    std::vector<std::string> best_key;
    std::size_t best_at = 0;
    for (std::size_t i = 0; i < best.size(); ++i) {
        std::vector<std::string> key;
        for (const auto c : best[i]) key.push_back(cube_pattern(vars, candidates[c]));
        std::sort(key.begin(), key.end());
        if (i == 0 || key < best_key) {
            best_key = key;
            best_at = i;
        }
    }

    std::vector<std::size_t> order = best[best_at];
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cube_pattern(vars, candidates[a]) < cube_pattern(vars, candidates[b]);
    });
    std::vector<Cube> out;
    for (const auto c : order) {
        Cube cube;
        for (const auto& v : vars) {
            const auto it = candidates[c].find(v.name);
            if (it != candidates[c].end()) cube.push_back({v.name, it->second});
        }
        out.push_back(std::move(cube));
    }
    return out;
}

}  // namespace detail

// One max-argument: a point probability at one instrument arm minus the
// probabilities of the compatible contradicting outcomes at another arm.
struct BranchReport {
    std::string family;  // "E1" or "E2"
    std::size_t j = 0;   // index into the instrument domain
    Cube positive_cube;
    Assignment positive_world;
    Assignment subtract_world;
    std::set<Assignment> subtracted;  // full outcomes over the non-instrument variables
    std::vector<Cube> subtract_cubes;
    ExprPtr expr;
};

struct CandidateReport {
    std::string family;
    std::size_t j = 0;
    Cube cube;
    Assignment extension;
    bool kept = false;
    std::string dropped;  // empty, or the prune rule that removed it
    std::vector<Assignment> psi;
    std::vector<Cube> psi_cover;
    ExprPtr expr;  // branch expression (also for dropped candidates)
};

struct ClassReport {
    Assignment a_k;
    std::vector<CounterfactualEvent> gammas;  // per non-base instrument value
    std::vector<CandidateReport> candidates;
    std::vector<BranchReport> branches;
    ExprPtr expr;  // max over zero and the kept branches
};

struct LowerBound {
    BoundQuery query;
    ExprPtr identified;
    std::vector<ClassReport> classes;
    ExprPtr expr;
};

// The response-type partition of the target event by the treatment the
// first instrument value selects.
struct Partition {
    CounterfactualEvent target;
    CounterfactualEvent identified;
    std::vector<std::pair<Assignment, CounterfactualEvent>> classes;
};

inline Partition partition_events(const Admg& g, const BoundQuery& q) {
    const detail::QueryContext ctx = detail::validate_query(g, q);
    Partition out;
    out.target.merge(SingleWorldEvent{q.world, q.outcome});
    const Intervention z1{{{q.instrument, ctx.z_values[0]}}};
    out.identified.merge(SingleWorldEvent{z1, ctx.a1});
    out.identified.merge(SingleWorldEvent{q.world, ctx.yt});
    std::vector<Variable> treat_space;
    for (const auto& v : ctx.space_vars) {
        if (ctx.a1.count(v.name)) treat_space.push_back(v);
    }
    for (const auto& ak : enumerate_outcomes(OutcomeSpace{treat_space})) {
        if (ak == ctx.a1) continue;
        CounterfactualEvent e;
        e.merge(SingleWorldEvent{z1, ak});
        e.merge(SingleWorldEvent{q.world, ctx.yt});
        out.classes.push_back({ak, std::move(e)});
    }
    return out;
}

namespace detail {

// Extension cubes in trace order: subsets of the extension variables by
// size then position, values enumerated with the first variable slowest.
inline std::vector<Assignment> extension_cubes(const std::vector<Variable>& priority) {
    std::vector<std::vector<std::size_t>> subsets{{}};
    std::vector<std::size_t> idx(priority.size());
    for (std::size_t size = 1; size <= priority.size(); ++size) {
        std::vector<std::size_t> pick(size);
        const auto rec = [&](auto&& self, std::size_t from, std::size_t depth) -> void {
            if (depth == size) {
                subsets.push_back(pick);
                return;
            }
            for (std::size_t i = from; i < priority.size(); ++i) {
                pick[depth] = i;
                self(self, i + 1, depth + 1);
            }
        };
        rec(rec, 0, 0);
    }
    std::vector<Assignment> out;
    for (const auto& subset : subsets) {
        std::vector<std::size_t> val(subset.size(), 0);
        for (;;) {
            Assignment a;
            for (std::size_t i = 0; i < subset.size(); ++i) {
                a.insert({priority[subset[i]].name, priority[subset[i]].domain[val[i]]});
            }
            out.push_back(std::move(a));
            bool done = true;
            for (std::size_t i = subset.size(); i-- > 0;) {
                if (++val[i] < priority[subset[i]].domain.size()) {
                    done = false;
                    break;
                }
                val[i] = 0;
            }
            if (done) break;
        }
    }
    return out;
}

inline Cube ordered_cube(const std::vector<std::string>& first_vars, const std::vector<Variable>& space,
                         const Assignment& values, const Assignment& extension) {
    Cube cube;
    for (const auto& v : first_vars) cube.push_back({v, values.at(v)});
    for (const auto& v : space) {
        const auto it = extension.find(v.name);
        if (it != extension.end()) cube.push_back({v.name, it->second});
    }
    return cube;
}

inline ExprPtr cube_term(const Assignment& world, const Cube& cube) {
    ProbTerm t;
    t.world = world;
    t.cube = cube;
    return expr_prob(std::move(t));
}

inline bool satisfies(const Assignment& o, const Assignment& cube) {
    for (const auto& [var, val] : cube) {
        if (o.at(var) != val) return false;
    }
    return true;
}

}  // namespace detail

// Symbolic sharp-side lower bound on P(outcome under do(world)) from the
// instrument inequalities: identified mass plus, per alternative treatment
// response class, the best of the derivable class bounds.
inline LowerBound lower_bound(const Admg& g, const BoundQuery& q, const BoundOptions& opts = {}) {
    const detail::QueryContext ctx = detail::validate_query(g, q);
    ContradictionCache cache;

    const auto z_world = [&](std::size_t j) { return Assignment{{q.instrument, ctx.z_values[j]}}; };

    LowerBound out;
    out.query = q;

    std::vector<std::string> treat_then_outcome = ctx.treat_vars;
    for (const auto& v : ctx.outcome_vars) treat_then_outcome.push_back(v);
    Assignment a1y = ctx.a1;
    for (const auto& [var, val] : ctx.yt) a1y.insert({var, val});
    out.identified = detail::cube_term(z_world(0), detail::ordered_cube(treat_then_outcome, ctx.space_vars, a1y, {}));

    // Full outcomes of one instrument arm, and the target-behaviour subset.
    const auto all_outcomes = enumerate_outcomes(OutcomeSpace{ctx.space_vars});
    const auto in_target = [&](const Assignment& o) {
        return detail::satisfies(o, ctx.a1) && detail::satisfies(o, ctx.yt);
    };

    std::vector<Variable> treat_space;
    std::vector<Variable> outcome_space;
    std::vector<Variable> e1_priority;
    std::vector<Variable> e2_priority;
    for (const auto& v : ctx.space_vars) {
        if (ctx.a1.count(v.name)) treat_space.push_back(v);
        if (ctx.yt.count(v.name)) outcome_space.push_back(v);
    }
    for (const auto& v : outcome_space) e1_priority.push_back(v);
    for (const auto& v : ctx.space_vars) {
        if (!ctx.a1.count(v.name) && !ctx.yt.count(v.name)) {
            e1_priority.push_back(v);
            e2_priority.push_back(v);
        }
    }

    // Outcome-first decomposition of a subtracted set: one piece per
    // non-target outcome value, then the piece that meets the target
    // outcome with a different treatment.
    const auto decompose = [&](const std::set<Assignment>& sub) {
        std::vector<Cube> cubes;
        for (const auto& yv : enumerate_outcomes(OutcomeSpace{outcome_space})) {
            if (yv == ctx.yt) continue;
            std::set<Assignment> piece;
            for (const auto& o : sub) {
                if (detail::satisfies(o, yv)) piece.insert(o);
            }
            for (auto& c : detail::minimal_disjoint_cover(ctx.space_vars, piece)) cubes.push_back(std::move(c));
        }
        std::set<Assignment> last;
        for (const auto& o : sub) {
            if (detail::satisfies(o, ctx.yt)) last.insert(o);
        }
        for (auto& c : detail::minimal_disjoint_cover(ctx.space_vars, last)) cubes.push_back(std::move(c));
        return cubes;
    };
    const auto single_piece = [&](const std::set<Assignment>& sub) {
        return detail::minimal_disjoint_cover(ctx.space_vars, sub);
    };

    const auto branch_expr = [&](const ExprPtr& positive, const Assignment& sub_world,
                                 const std::vector<Cube>& cubes) {
        if (cubes.empty()) return positive;
        std::vector<ExprPtr> terms;
        for (const auto& c : cubes) terms.push_back(detail::cube_term(sub_world, c));
        return expr_diff(positive, expr_sum(std::move(terms)));
    };

    for (const auto& ak : enumerate_outcomes(OutcomeSpace{treat_space})) {
        if (ak == ctx.a1) continue;
        ClassReport klass;
        klass.a_k = ak;
        for (std::size_t j = 1; j < ctx.z_values.size(); ++j) {
            CounterfactualEvent gamma;
            gamma.merge(SingleWorldEvent{Intervention{z_world(0)}, ak});
            gamma.merge(SingleWorldEvent{Intervention{z_world(j)}, a1y});
            klass.gammas.push_back(std::move(gamma));
        }

        // Candidate events at the base arm (treatment a_k observed) and, per
        // other arm, at that arm (target treatment and outcome observed).
        struct Seen {
            Assignment extension;
            std::set<Assignment> psi;
        };
        std::vector<std::vector<Seen>> seen_e1(ctx.z_values.size());
        std::vector<std::vector<Seen>> seen_e2(ctx.z_values.size());

        const auto process = [&](const std::string& family, std::size_t j, const Assignment& extension) {
            CandidateReport cand;
            cand.family = family;
            cand.j = j;
            cand.extension = extension;

            const bool e1 = family == "E1";
            Assignment base = e1 ? ak : a1y;
            for (const auto& [var, val] : extension) base.insert({var, val});
            cand.cube = e1 ? detail::ordered_cube(ctx.treat_vars, ctx.space_vars, base, extension)
                           : detail::ordered_cube(treat_then_outcome, ctx.space_vars, base, extension);
            const Assignment pos_world = e1 ? z_world(0) : z_world(j);
            const Assignment sub_world = e1 ? z_world(j) : z_world(0);
            const SingleWorldEvent cand_event{Intervention{pos_world}, base};
            const SingleWorldEvent requirement = e1 ? SingleWorldEvent{Intervention{sub_world}, a1y}
                                                    : SingleWorldEvent{Intervention{sub_world}, ak};

            const auto psi_set = psi(g, Intervention{sub_world},
                                     CounterfactualEvent{std::vector<SingleWorldEvent>{cand_event}}, &cache);
            cand.psi = psi_set;
            const std::set<Assignment> psi_sorted(psi_set.begin(), psi_set.end());
            cand.psi_cover = detail::minimal_disjoint_cover(ctx.space_vars, psi_sorted);

            std::set<Assignment> sub;
            for (const auto& o : psi_sorted) {
                const bool keep = e1 ? !in_target(o) : !detail::satisfies(o, ak);
                if (keep) sub.insert(o);
            }
            const auto cubes = e1 ? decompose(sub) : single_piece(sub);
            cand.expr = branch_expr(detail::cube_term(pos_world, cand.cube), sub_world, cubes);

            std::string drop;
            if (opts.prune) {
                if (contradicts(g, cand_event, requirement, &cache)) {
                    drop = "contradicts the class requirement at the other arm";
                } else {
                    bool total = true;
                    for (const auto& o : all_outcomes) {
                        const bool relevant = e1 ? !in_target(o) : !detail::satisfies(o, ak);
                        if (relevant && !psi_sorted.count(o)) {
                            total = false;
                            break;
                        }
                    }
                    const bool bare_e2 = !e1 && extension.empty();
                    if (total && !bare_e2) {
                        drop = "subtracts every non-target outcome";
                    } else {
                        auto& seen = e1 ? seen_e1[j] : seen_e2[j];
                        for (const auto& s : seen) {
                            if (s.extension.size() >= extension.size()) continue;
                            bool subset = true;
                            for (const auto& [var, val] : s.extension) {
                                const auto it = extension.find(var);
                                if (it == extension.end() || it->second != val) {
                                    subset = false;
                                    break;
                                }
                            }
                            if (subset && s.psi == psi_sorted) {
                                drop = "refines an earlier candidate without narrowing its outcomes";
                                break;
                            }
                        }
                    }
                }
            }
            (e1 ? seen_e1[j] : seen_e2[j]).push_back({extension, psi_sorted});

            cand.kept = drop.empty();
            cand.dropped = drop;
            if (cand.kept) {
                BranchReport b;
                b.family = family;
                b.j = j;
                b.positive_cube = cand.cube;
                b.positive_world = pos_world;
                b.subtract_world = sub_world;
                b.subtracted = sub;
                b.subtract_cubes = cubes;
                b.expr = cand.expr;
                klass.branches.push_back(std::move(b));
            }
            klass.candidates.push_back(std::move(cand));
        };

        for (const auto& extension : detail::extension_cubes(e1_priority)) {
            for (std::size_t j = 1; j < ctx.z_values.size(); ++j) process("E1", j, extension);
        }
        for (std::size_t j = 1; j < ctx.z_values.size(); ++j) {
            for (const auto& extension : detail::extension_cubes(e2_priority)) process("E2", j, extension);
        }

        if (opts.prune) {
            // Same branch emitted twice, or a branch whose positive part
            // matches another's but subtracts more: keep the stronger one.
            std::vector<BranchReport> kept;
            for (const auto& b : klass.branches) {
                bool drop = false;
                std::string why;
                for (const auto& o : kept) {
                    if (o.positive_world == b.positive_world && o.positive_cube == b.positive_cube &&
                        o.subtract_world == b.subtract_world) {
                        if (o.subtracted == b.subtracted) {
                            drop = true;
                            why = "duplicates an earlier branch";
                        } else if (std::includes(b.subtracted.begin(), b.subtracted.end(),
                                                 o.subtracted.begin(), o.subtracted.end())) {
                            drop = true;
                            why = "subtracts a superset of an earlier branch";
                        }
                    }
                    if (drop) break;
                }
                if (drop) {
                    for (auto& c : klass.candidates) {
                        if (c.kept && c.family == b.family && c.j == b.j && c.cube == b.positive_cube) {
                            c.kept = false;
                            c.dropped = why;
                            break;
                        }
                    }
                } else {
                    kept.push_back(b);
                }
            }
            klass.branches = std::move(kept);
        }

        std::vector<ExprPtr> args{expr_constant(Rational(0))};
        for (const auto& b : klass.branches) args.push_back(b.expr);
        klass.expr = expr_max(std::move(args));
        out.classes.push_back(std::move(klass));
    }

    std::vector<ExprPtr> addends{out.identified};
    for (const auto& k : out.classes) addends.push_back(k.expr);
    out.expr = expr_sum(std::move(addends));
    return out;
}

struct UpperBound {
    ExprPtr expr;
    std::vector<LowerBound> complements;
};

// One minus the lower bounds of the other joint outcome values.
inline UpperBound upper_bound(const Admg& g, const BoundQuery& q, const BoundOptions& opts = {}) {
    const detail::QueryContext ctx = detail::validate_query(g, q);
    UpperBound out;
    std::vector<Variable> outcome_space;
    for (const auto& v : ctx.space_vars) {
        if (ctx.yt.count(v.name)) outcome_space.push_back(v);
    }
    for (const auto& yv : enumerate_outcomes(OutcomeSpace{outcome_space})) {
        if (yv == ctx.yt) continue;
        BoundQuery other = q;
        other.outcome = yv;
        out.complements.push_back(lower_bound(g, other, opts));
    }
    std::vector<ExprPtr> parts;
    for (const auto& c : out.complements) parts.push_back(c.expr);
    out.expr = expr_diff(expr_constant(Rational(1)), expr_sum(std::move(parts)));
    return out;
}

struct BoundPair {
    LowerBound lower;
    UpperBound upper;
};

inline BoundPair bound_probability(const Admg& g, const BoundQuery& q, const BoundOptions& opts = {}) {
    return BoundPair{lower_bound(g, q, opts), upper_bound(g, q, opts)};
}

// Assumption-free bounds: the target event observed outright, and one minus
// the complementary outcomes observed with the target treatment.
struct TrivialBounds {
    ExprPtr lower;
    ExprPtr upper;
};

inline TrivialBounds trivial_bounds(const Admg& g, const Intervention& world, const Assignment& outcome) {
    detail::check_assignment(g, world.values, "Intervention");
    detail::check_assignment(g, outcome, "Outcome");
    if (world.values.empty() || outcome.empty()) {
        throw std::invalid_argument("Trivial bounds need an intervention and an outcome");
    }
    for (const auto& [var, val] : outcome) {
        (void)val;
        if (world.values.count(var)) {
            throw std::invalid_argument("Outcome variable '" + var + "' is also intervened on");
        }
    }
    std::vector<std::string> order;
    Assignment joint = world.values;
    for (const auto& [var, val] : outcome) joint.insert({var, val});
    for (const auto& v : g.vertices()) {
        if (joint.count(v.name)) order.push_back(v.name);
    }
    Cube cube;
    for (const auto& v : order) cube.push_back({v, joint.at(v)});
    TrivialBounds out;
    out.lower = detail::cube_term({}, cube);

    std::vector<Variable> outcome_space;
    for (const auto& v : g.vertices()) {
        if (outcome.count(v.name)) outcome_space.push_back(v);
    }
    std::vector<ExprPtr> others;
    for (const auto& yv : enumerate_outcomes(OutcomeSpace{outcome_space})) {
        if (yv == outcome) continue;
        Assignment o = world.values;
        for (const auto& [var, val] : yv) o.insert({var, val});
        Cube c;
        for (const auto& v : order) c.push_back({v, o.at(v)});
        others.push_back(detail::cube_term({}, c));
    }
    out.upper = expr_diff(expr_constant(Rational(1)), expr_sum(std::move(others)));
    return out;
}

// Bounds from intervening on an identifiable subset of the treatments: the
// joint behaviour of the outcome and the remaining treatments under the
// partial intervention brackets the full effect.
struct SubsetBounds {
    ExprPtr lower;
    ExprPtr upper;
};

inline SubsetBounds subset_bounds(const Admg& g, const Intervention& world, const Assignment& outcome,
                                  const std::set<std::string>& intervene) {
    detail::check_assignment(g, world.values, "Intervention");
    detail::check_assignment(g, outcome, "Outcome");
    if (outcome.empty()) throw std::invalid_argument("Subset bounds need an outcome");
    for (const auto& v : intervene) {
        if (!world.values.count(v)) {
            throw std::invalid_argument("Subset variable '" + v + "' is not part of the intervention");
        }
    }
    if (intervene.empty() || intervene.size() == world.values.size()) {
        throw std::invalid_argument("Subset bounds need a strict nonempty treatment subset");
    }
    require_identifiable(g, intervene);

    Intervention tilde;
    Assignment rest;
    for (const auto& [var, val] : world.values) {
        if (intervene.count(var)) {
            tilde.values.insert({var, val});
        } else {
            rest.insert({var, val});
        }
    }
    Assignment joint = outcome;
    for (const auto& [var, val] : rest) joint.insert({var, val});

    SubsetBounds out;
    out.lower = g_formula(g, tilde, joint);

    std::vector<Variable> outcome_space;
    for (const auto& v : g.vertices()) {
        if (outcome.count(v.name)) outcome_space.push_back(v);
    }
    std::vector<ExprPtr> others;
    for (const auto& yv : enumerate_outcomes(OutcomeSpace{outcome_space})) {
        if (yv == outcome) continue;
        Assignment o = rest;
        for (const auto& [var, val] : yv) o.insert({var, val});
        others.push_back(g_formula(g, tilde, o));
    }
    out.upper = expr_diff(expr_constant(Rational(1)), expr_sum(std::move(others)));
    return out;
}

}  // namespace cfbounds
