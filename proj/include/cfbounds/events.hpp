#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"

namespace cfbounds {

// Variable name -> value, canonically ordered by name.
using Assignment = std::map<std::string, std::string>;

// The do-assignment defining a counterfactual world; empty means the
// natural regime.
struct Intervention {
    Assignment values;

    friend bool operator==(const Intervention& a, const Intervention& b) { return a.values == b.values; }
    friend bool operator!=(const Intervention& a, const Intervention& b) { return !(a == b); }
    friend bool operator<(const Intervention& a, const Intervention& b) { return a.values < b.values; }
};

// A conjunction of outcome assignments evaluated in one world.
struct SingleWorldEvent {
    Intervention world;
    Assignment outcome;

    friend bool operator==(const SingleWorldEvent& a, const SingleWorldEvent& b) {
        return a.world == b.world && a.outcome == b.outcome;
    }
    friend bool operator!=(const SingleWorldEvent& a, const SingleWorldEvent& b) { return !(a == b); }
    friend bool operator<(const SingleWorldEvent& a, const SingleWorldEvent& b) {
        if (a.world != b.world) return a.world < b.world;
        return a.outcome < b.outcome;
    }
};

// A conjunction of single-world events, at most one conjunct per world.
// Merging clashing outcome values for one world does not throw; it marks the
// whole event as inconsistent (the empty event).
class CounterfactualEvent {
public:
    CounterfactualEvent() = default;
    explicit CounterfactualEvent(const std::vector<SingleWorldEvent>& conjuncts) {
        for (const auto& c : conjuncts) merge(c);
    }

    void merge(const SingleWorldEvent& e) {
        for (auto& c : conjuncts_) {
            if (c.world == e.world) {
                for (const auto& [var, val] : e.outcome) {
                    const auto it = c.outcome.find(var);
                    if (it == c.outcome.end()) {
                        c.outcome.insert({var, val});
                    } else if (it->second != val) {
                        inconsistent_ = true;
                    }
                }
                return;
            }
        }
        auto pos = conjuncts_.begin();
        while (pos != conjuncts_.end() && pos->world < e.world) ++pos;
        conjuncts_.insert(pos, e);
    }

    const std::vector<SingleWorldEvent>& conjuncts() const { return conjuncts_; }
    bool inconsistent() const { return inconsistent_; }
    bool trivial() const { return conjuncts_.empty() && !inconsistent_; }

    friend bool operator==(const CounterfactualEvent& a, const CounterfactualEvent& b) {
        return a.inconsistent_ == b.inconsistent_ && a.conjuncts_ == b.conjuncts_;
    }
    friend bool operator!=(const CounterfactualEvent& a, const CounterfactualEvent& b) { return !(a == b); }

private:
    std::vector<SingleWorldEvent> conjuncts_;
    bool inconsistent_ = false;
};

namespace detail {

template <class G>
void check_assignment(const G& g, const Assignment& a, const std::string& role) {
    for (const auto& [var, val] : a) {
        require_observed(g, var, role);
        const auto& dom = g.variable(var).domain;
        if (std::find(dom.begin(), dom.end(), val) == dom.end()) {
            throw std::invalid_argument(role + " value '" + val + "' is not in the domain of '" + var + "'");
        }
    }
}

}  // namespace detail

// Throws unless worlds and outcomes use declared variables with in-domain
// values and no variable is both intervened and observed in one conjunct.
template <class G>
void validate_event(const G& g, const SingleWorldEvent& e) {
    detail::check_assignment(g, e.world.values, "Intervention");
    detail::check_assignment(g, e.outcome, "Outcome");
    for (const auto& [var, val] : e.outcome) {
        (void)val;
        if (e.world.values.count(var)) {
            throw std::invalid_argument("Outcome variable '" + var + "' is also intervened in its world");
        }
    }
}

template <class G>
void validate_event(const G& g, const CounterfactualEvent& e) {
    for (const auto& c : e.conjuncts()) validate_event(g, c);
}

// Canonical text form: conjuncts sorted by world, outcomes sorted by name,
// e.g. "A(Z=0)=1 & Y(Z=0)=0". Round-trips through parse_event.
inline std::string to_string(const SingleWorldEvent& e) {
    std::string world;
    bool first = true;
    for (const auto& [var, val] : e.world.values) {
        if (!first) world += ",";
        world += var + "=" + val;
        first = false;
    }
    std::string out;
    first = true;
    for (const auto& [var, val] : e.outcome) {
        if (!first) out += " & ";
        out += var + "(" + world + ")=" + val;
        first = false;
    }
    if (e.outcome.empty()) out = "(" + world + ")";
    return out;
}

inline std::string to_string(const CounterfactualEvent& e) {
    if (e.inconsistent()) return "<inconsistent>";
    std::string out;
    bool first = true;
    for (const auto& c : e.conjuncts()) {
        if (!first) out += " & ";
        out += to_string(c);
        first = false;
    }
    return out;
}

// Parses the canonical event syntax: atoms "Var(W1=v1,W2=v2)=val" joined
// with '&'; an empty parenthesis pair is the natural world.
template <class G>
CounterfactualEvent parse_event(const G& g, const std::string& text) {
    std::size_t i = 0;
    const auto fail = [&](const std::string& what) -> void {
        throw std::invalid_argument("Cannot parse event '" + text + "' at position " +
                                    std::to_string(i + 1) + ": " + what);
    };
    const auto skip_ws = [&]() {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    const auto ident = [&]() -> std::string {
        skip_ws();
        std::size_t j = i;
        while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
        if (j == i) fail("expected an identifier");
        std::string out = text.substr(i, j - i);
        i = j;
        return out;
    };
    const auto expect = [&](char c) {
        skip_ws();
        if (i >= text.size() || text[i] != c) fail(std::string("expected '") + c + "'");
        ++i;
    };

    CounterfactualEvent event;
    for (;;) {
        const std::string var = ident();
        expect('(');
        Intervention world;
        skip_ws();
        if (i < text.size() && text[i] != ')') {
            for (;;) {
                const std::string wvar = ident();
                expect('=');
                const std::string wval = ident();
                if (world.values.count(wvar)) fail("intervention repeats variable '" + wvar + "'");
                world.values.insert({wvar, wval});
                skip_ws();
                if (i < text.size() && text[i] == ',') {
                    ++i;
                    continue;
                }
                break;
            }
        }
        expect(')');
        expect('=');
        const std::string val = ident();
        SingleWorldEvent atom{world, {{var, val}}};
        validate_event(g, atom);
        event.merge(atom);
        skip_ws();
        if (i < text.size() && text[i] == '&') {
            ++i;
            continue;
        }
        break;
    }
    skip_ws();
    if (i != text.size()) fail("trailing input");
    return event;
}

// Drops intervened variables that are causally irrelevant to every outcome
// variable given the rest of the intervention.
template <class G>
SingleWorldEvent minimal_label(const G& g, const SingleWorldEvent& e) {
    std::set<std::string> world_vars;
    for (const auto& [var, val] : e.world.values) {
        (void)val;
        world_vars.insert(var);
    }
    std::set<std::string> keep;
    for (const auto& [ovar, oval] : e.outcome) {
        (void)oval;
        for (const auto& w : relevant_context_subset(g, ovar, world_vars)) keep.insert(w);
    }
    SingleWorldEvent out;
    out.outcome = e.outcome;
    for (const auto& [var, val] : e.world.values) {
        if (keep.count(var)) out.world.values.insert({var, val});
    }
    return out;
}

template <class G>
CounterfactualEvent minimal_label(const G& g, const CounterfactualEvent& e) {
    CounterfactualEvent out;
    if (e.inconsistent()) {
        // Preserve impossibility through an explicit conflict marker.
        return e;
    }
    for (const auto& c : e.conjuncts()) out.merge(minimal_label(g, c));
    return out;
}

// Memo for the recursive contradiction test, keyed on the canonical pair of
// event strings.
struct ContradictionCache {
    std::map<std::string, bool> memo;
};

namespace detail {

template <class G>
bool relevant_given(const G& g, const std::string& c, const std::string& target,
                    const std::set<std::string>& s) {
    return directed_path_exists(g, c, target, [&](const std::string& w) { return !s.count(w); });
}

template <class G>
bool contradicts_impl(const G& g, const SingleWorldEvent& e1, const SingleWorldEvent& e2,
                      ContradictionCache* cache);

// One candidate conflict variable z*: both events pin z* to different
// values. The events contradict through z* when the contexts force z* to
// coincide across the two worlds.
template <class G>
bool seed_establishes(const G& g, const SingleWorldEvent& e1, const SingleWorldEvent& e2,
                      const std::string& zstar, ContradictionCache* cache) {
    std::set<std::string> s1;
    std::set<std::string> s2;
    Assignment vals1 = e1.outcome;
    Assignment vals2 = e2.outcome;
    for (const auto& [var, val] : e1.world.values) {
        s1.insert(var);
        vals1.insert({var, val});
    }
    for (const auto& [var, val] : e2.world.values) {
        s2.insert(var);
        vals2.insert({var, val});
    }
    for (const auto& [var, val] : e1.outcome) {
        (void)val;
        s1.insert(var);
    }
    for (const auto& [var, val] : e2.outcome) {
        (void)val;
        s2.insert(var);
    }

    std::set<std::string> ctx1 = s1;
    ctx1.erase(zstar);
    std::set<std::string> ctx2 = s2;
    ctx2.erase(zstar);
    const auto rel1v = relevant_context_subset(g, zstar, ctx1);
    const auto rel2v = relevant_context_subset(g, zstar, ctx2);
    const std::set<std::string> rel1(rel1v.begin(), rel1v.end());
    const std::set<std::string> rel2(rel2v.begin(), rel2v.end());

    // Shared relevant context must agree.
    for (const auto& c : rel1) {
        if (rel2.count(c) && vals1.at(c) != vals2.at(c)) return false;
    }

    // Context private to one side must be forced: every alternative value,
    // adjoined to the other event, must already be contradictory.
    const auto side = [&](const std::set<std::string>& mine, const std::set<std::string>& other,
                          const std::set<std::string>& my_rel, const Assignment& my_vals,
                          const SingleWorldEvent& my_event, const SingleWorldEvent& other_event,
                          bool augment_other) {
        for (const auto& c : mine) {
            if (c == zstar || other.count(c) || !my_rel.count(c)) continue;
            if (!relevant_given(g, c, zstar, other)) continue;
            const std::string& cval = my_vals.at(c);
            for (const auto& alt : g.variable(c).domain) {
                if (alt == cval) continue;
                SingleWorldEvent augmented = other_event;
                augmented.outcome[c] = alt;
                const bool contra = augment_other ? contradicts_impl(g, my_event, augmented, cache)
                                                  : contradicts_impl(g, augmented, my_event, cache);
                if (!contra) return false;
            }
        }
        return true;
    };
    if (!side(s1, s2, rel1, vals1, e1, e2, true)) return false;
    if (!side(s2, s1, rel2, vals2, e2, e1, false)) return false;
    return true;
}

template <class G>
bool contradicts_impl(const G& g, const SingleWorldEvent& e1, const SingleWorldEvent& e2,
                      ContradictionCache* cache) {
    std::string key;
    if (cache) {
        std::string k1 = to_string(e1);
        std::string k2 = to_string(e2);
        key = k1 < k2 ? k1 + "|" + k2 : k2 + "|" + k1;
        const auto it = cache->memo.find(key);
        if (it != cache->memo.end()) return it->second;
    }

    bool result = false;
    if (e1.world == e2.world) {
        for (const auto& [var, val] : e1.outcome) {
            const auto it = e2.outcome.find(var);
            if (it != e2.outcome.end() && it->second != val) {
                result = true;
                break;
            }
        }
    } else {
        for (const auto& [var, val] : e1.outcome) {
            const auto it = e2.outcome.find(var);
            if (it == e2.outcome.end() || it->second == val) continue;
            if (seed_establishes(g, e1, e2, var, cache)) {
                result = true;
                break;
            }
        }
    }
    if (cache) cache->memo.insert({key, result});
    return result;
}

}  // namespace detail

// Can the two events hold together in some structural causal model over the
// graph? Returns true when they provably cannot. Sound but conservative:
// false means no contradiction was derived.
template <class G>
bool contradicts(const G& g, const SingleWorldEvent& e1, const SingleWorldEvent& e2,
                 ContradictionCache* cache = nullptr) {
    validate_event(g, e1);
    validate_event(g, e2);
    ContradictionCache local;
    return detail::contradicts_impl(g, e1, e2, cache ? cache : &local);
}

// Conjunction-level wrapper: contradiction of any conjunct pair across the
// two events (or an internally inconsistent operand).
template <class G>
bool contradicts(const G& g, const CounterfactualEvent& e1, const CounterfactualEvent& e2,
                 ContradictionCache* cache = nullptr) {
    if (e1.inconsistent() || e2.inconsistent()) return true;
    ContradictionCache local;
    ContradictionCache* c = cache ? cache : &local;
    for (const auto& a : e1.conjuncts()) {
        for (const auto& b : e2.conjuncts()) {
            if (contradicts(g, a, b, c)) return true;
        }
    }
    return false;
}

// Ordered enumeration domain over a list of variables.
struct OutcomeSpace {
    std::vector<Variable> vars;
};

inline constexpr std::size_t kOutcomeCap = 1000000;

// All full assignments in lexicographic order (first variable slowest,
// domain order within a variable).
inline std::vector<Assignment> enumerate_outcomes(const OutcomeSpace& space) {
    std::size_t total = 1;
    for (const auto& v : space.vars) {
        detail::validate_variable(v);
        total *= v.domain.size();
        if (total > kOutcomeCap) {
            throw std::length_error("Outcome space exceeds the enumeration cap of " +
                                    std::to_string(kOutcomeCap) + " assignments");
        }
    }
    std::vector<Assignment> out;
    out.reserve(total);
    std::vector<std::size_t> idx(space.vars.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
        Assignment a;
        for (std::size_t i = 0; i < space.vars.size(); ++i) {
            a.insert({space.vars[i].name, space.vars[i].domain[idx[i]]});
        }
        out.push_back(std::move(a));
        for (std::size_t i = space.vars.size(); i-- > 0;) {
            if (++idx[i] < space.vars[i].domain.size()) break;
            idx[i] = 0;
        }
    }
    return out;
}

// Sample space of an intervened world: every observed variable that is not
// intervened, in declaration order.
inline OutcomeSpace sample_space(const Admg& g, const Intervention& world) {
    OutcomeSpace space;
    for (const auto& v : g.vertices()) {
        if (!world.values.count(v.name)) space.vars.push_back(v);
    }
    return space;
}

// Full outcomes under the given world that do not contradict any conjunct of
// the event.
inline std::vector<Assignment> psi(const Admg& g, const Intervention& world,
                                   const CounterfactualEvent& event, ContradictionCache* cache = nullptr) {
    if (event.inconsistent()) return {};
    ContradictionCache local;
    ContradictionCache* c = cache ? cache : &local;
    std::vector<Assignment> out;
    for (const auto& o : enumerate_outcomes(sample_space(g, world))) {
        const SingleWorldEvent cand{world, o};
        bool compatible = true;
        for (const auto& conj : event.conjuncts()) {
            if (detail::contradicts_impl(g, cand, conj, c)) {
                compatible = false;
                break;
            }
        }
        if (compatible) out.push_back(o);
    }
    return out;
}

namespace detail {

// Restriction of a world assignment to the context relevant to var.
template <class G>
Assignment restrict_relevant(const G& g, const Assignment& w, const std::string& var) {
    std::set<std::string> dom;
    for (const auto& [u, uv] : w) {
        (void)uv;
        dom.insert(u);
    }
    Assignment out;
    for (const auto& u : relevant_context_subset(g, var, dom)) out.insert({u, w.at(u)});
    return out;
}

// Extends a world by outcomes the event pins at an equivalent world, to a
// fixpoint. A pin u=uv at world w' applies when the relevant contexts of u
// under w and w' coincide; each step is intervention consistency plus
// irrelevance, so the target variable's value is unchanged.
template <class G>
Assignment close_world(const G& g, const CounterfactualEvent& e, const Assignment& world,
                       const std::string& target) {
    Assignment w = world;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& c : e.conjuncts()) {
            for (const auto& [u, uv] : c.outcome) {
                if (u == target || w.count(u)) continue;
                if (restrict_relevant(g, w, u) != restrict_relevant(g, c.world.values, u)) continue;
                w.insert({u, uv});
                changed = true;
            }
        }
    }
    return w;
}

}  // namespace detail

// Sound, incomplete cross-world implication. Each conjunct atom var(w)=val
// of e2 must be certified by a conjunct of e1 assigning var the same value:
// both worlds are closed under outcomes e1 pins at them (consistency) and
// restricted to the context relevant to var (irrelevance); the atom is
// certified when the restrictions coincide. Conjunct containment,
// instrument substitution and consistency substitution are special cases.
template <class G>
bool cross_world_implies(const G& g, const CounterfactualEvent& e1, const CounterfactualEvent& e2) {
    validate_event(g, e1);
    validate_event(g, e2);
    if (e1.inconsistent()) return true;
    if (e2.inconsistent()) return false;
    const CounterfactualEvent m1 = minimal_label(g, e1);
    if (m1.inconsistent()) return true;
    const CounterfactualEvent m2 = minimal_label(g, e2);

    const auto atom_implied = [&](const Intervention& w2, const std::string& var, const std::string& val) {
        const Assignment target_ctx =
            detail::restrict_relevant(g, detail::close_world(g, m1, w2.values, var), var);
        for (const auto& c : m1.conjuncts()) {
            const auto it = c.outcome.find(var);
            if (it == c.outcome.end() || it->second != val) continue;
            const Assignment source_ctx =
                detail::restrict_relevant(g, detail::close_world(g, m1, c.world.values, var), var);
            if (source_ctx == target_ctx) return true;
        }
        return false;
    };

    for (const auto& c : m2.conjuncts()) {
        for (const auto& [var, val] : c.outcome) {
            if (!atom_implied(c.world, var, val)) return false;
        }
    }
    return true;
}

// No pair of events in the collection provably contradicts; joint
// satisfiability beyond pairs is not checked.
template <class G>
bool pairwise_compatible(const G& g, const std::vector<CounterfactualEvent>& events,
                         ContradictionCache* cache = nullptr) {
    ContradictionCache local;
    ContradictionCache* c = cache ? cache : &local;
    for (std::size_t i = 0; i < events.size(); ++i) {
        for (std::size_t j = i + 1; j < events.size(); ++j) {
            if (contradicts(g, events[i], events[j], c)) return false;
        }
    }
    return true;
}

}  // namespace cfbounds
