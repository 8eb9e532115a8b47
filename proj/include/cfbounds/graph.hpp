#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace cfbounds {

// An observed variable together with its ordered, finite domain.
struct Variable {
    std::string name;
    std::vector<std::string> domain{"0", "1"};

    friend bool operator==(const Variable& a, const Variable& b) {
        return a.name == b.name && a.domain == b.domain;
    }
};

namespace detail {

inline void validate_variable(const Variable& v) {
    if (v.name.empty()) throw std::invalid_argument("Variable with empty name");
    if (v.domain.size() < 2) {
        throw std::invalid_argument("Variable '" + v.name + "' needs a domain with at least two values");
    }
    std::set<std::string> seen;
    for (const auto& val : v.domain) {
        if (!seen.insert(val).second) {
            throw std::invalid_argument("Variable '" + v.name + "' repeats domain value '" + val + "'");
        }
    }
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Finds a directed cycle and returns it as v0 -> ... -> v0, or nullopt.
inline std::optional<std::vector<std::string>> find_cycle(
    const std::vector<std::string>& vertices,
    const std::map<std::string, std::vector<std::string>>& children) {
    std::map<std::string, int> state;  // 0 unseen, 1 on stack, 2 done
    std::vector<std::string> stack;
    std::optional<std::vector<std::string>> found;

    struct Frame {
        std::string v;
        std::size_t next = 0;
    };
    for (const auto& root : vertices) {
        if (state[root] != 0) continue;
        std::vector<Frame> frames{{root, 0}};
        state[root] = 1;
        stack.push_back(root);
        while (!frames.empty()) {
            Frame& f = frames.back();
            const auto it = children.find(f.v);
            const auto& kids = it == children.end() ? std::vector<std::string>{} : it->second;
            if (f.next < kids.size()) {
                const std::string w = kids[f.next++];
                if (state[w] == 1) {
                    std::vector<std::string> cycle;
                    auto pos = std::find(stack.begin(), stack.end(), w);
                    cycle.assign(pos, stack.end());
                    cycle.push_back(w);
                    return cycle;
                }
                if (state[w] == 0) {
                    state[w] = 1;
                    stack.push_back(w);
                    frames.push_back({w, 0});
                }
            } else {
                state[f.v] = 2;
                stack.pop_back();
                frames.pop_back();
            }
        }
    }
    return std::nullopt;
}

}  // namespace detail

// A causal DAG over observed variables (with domains) and hidden variables
// (domains unspecified). Edges may run between any pair of vertices.
class CausalGraph {
public:
    CausalGraph(std::vector<Variable> observed, std::vector<std::string> hidden,
                std::vector<std::pair<std::string, std::string>> edges)
        : observed_(std::move(observed)), hidden_(std::move(hidden)), edges_(std::move(edges)) {
        for (const auto& v : observed_) {
            detail::validate_variable(v);
            if (!names_.insert(v.name).second) {
                throw std::invalid_argument("Duplicate vertex '" + v.name + "'");
            }
        }
        for (const auto& h : hidden_) {
            if (h.empty()) throw std::invalid_argument("Variable with empty name");
            if (!names_.insert(h).second) {
                throw std::invalid_argument("Duplicate vertex '" + h + "'");
            }
            hidden_set_.insert(h);
        }
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& [a, b] : edges_) {
            if (!names_.count(a)) throw std::invalid_argument("Edge (" + a + " -> " + b + ") references undeclared vertex '" + a + "'");
            if (!names_.count(b)) throw std::invalid_argument("Edge (" + a + " -> " + b + ") references undeclared vertex '" + b + "'");
            if (a == b) throw std::invalid_argument("Self loop on '" + a + "'");
            if (!seen.insert({a, b}).second) {
                throw std::invalid_argument("Duplicate edge (" + a + " -> " + b + ")");
            }
            children_[a].push_back(b);
            parents_[b].push_back(a);
        }
    }

    const std::vector<Variable>& observed() const { return observed_; }
    const std::vector<std::string>& hidden() const { return hidden_; }
    const std::vector<std::pair<std::string, std::string>>& edges() const { return edges_; }

    bool has_vertex(const std::string& n) const { return names_.count(n) != 0; }
    bool is_hidden(const std::string& n) const { return hidden_set_.count(n) != 0; }
    bool is_observed(const std::string& n) const { return has_vertex(n) && !is_hidden(n); }

    const Variable& variable(const std::string& name) const {
        for (const auto& v : observed_) {
            if (v.name == name) return v;
        }
        throw std::out_of_range("Variable '" + name + "' not found");
    }

    std::vector<std::string> parents(const std::string& n) const {
        require_vertex(n);
        const auto it = parents_.find(n);
        return it == parents_.end() ? std::vector<std::string>{} : it->second;
    }
    std::vector<std::string> children(const std::string& n) const {
        require_vertex(n);
        const auto it = children_.find(n);
        return it == children_.end() ? std::vector<std::string>{} : it->second;
    }

    std::vector<std::string> vertex_names() const {
        std::vector<std::string> out;
        for (const auto& v : observed_) out.push_back(v.name);
        for (const auto& h : hidden_) out.push_back(h);
        return out;
    }

private:
    void require_vertex(const std::string& n) const {
        if (!has_vertex(n)) throw std::out_of_range("Vertex '" + n + "' not found");
    }

    std::vector<Variable> observed_;
    std::vector<std::string> hidden_;
    std::vector<std::pair<std::string, std::string>> edges_;
    std::set<std::string> names_;
    std::set<std::string> hidden_set_;
    std::map<std::string, std::vector<std::string>> children_;
    std::map<std::string, std::vector<std::string>> parents_;
};

// Acyclic directed mixed graph: every vertex observed, directed plus
// bidirected edges.
class Admg {
public:
    Admg(std::vector<Variable> vertices,
         std::vector<std::pair<std::string, std::string>> directed,
         std::vector<std::pair<std::string, std::string>> bidirected)
        : vertices_(std::move(vertices)), directed_(std::move(directed)), bidirected_(std::move(bidirected)) {
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            detail::validate_variable(vertices_[i]);
            if (!index_.insert({vertices_[i].name, i}).second) {
                throw std::invalid_argument("Duplicate vertex '" + vertices_[i].name + "'");
            }
        }
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& [a, b] : directed_) {
            require_vertex(a, "Edge (" + a + " -> " + b + ")");
            require_vertex(b, "Edge (" + a + " -> " + b + ")");
            if (a == b) throw std::invalid_argument("Self loop on '" + a + "'");
            if (!seen.insert({a, b}).second) {
                throw std::invalid_argument("Duplicate edge (" + a + " -> " + b + ")");
            }
            children_[a].push_back(b);
            parents_[b].push_back(a);
        }
        std::set<std::pair<std::string, std::string>> bseen;
        for (const auto& [a, b] : bidirected_) {
            require_vertex(a, "Edge (" + a + " <-> " + b + ")");
            require_vertex(b, "Edge (" + a + " <-> " + b + ")");
            if (a == b) throw std::invalid_argument("Self loop on '" + a + "'");
            if (!bseen.insert(norm(a, b)).second) {
                throw std::invalid_argument("Duplicate edge (" + a + " <-> " + b + ")");
            }
            siblings_[a].push_back(b);
            siblings_[b].push_back(a);
        }
    }

    const std::vector<Variable>& vertices() const { return vertices_; }
    const std::vector<std::pair<std::string, std::string>>& directed() const { return directed_; }
    const std::vector<std::pair<std::string, std::string>>& bidirected() const { return bidirected_; }

    bool has_vertex(const std::string& n) const { return index_.count(n) != 0; }
    std::size_t vertex_index(const std::string& n) const {
        const auto it = index_.find(n);
        if (it == index_.end()) throw std::out_of_range("Vertex '" + n + "' not found");
        return it->second;
    }
    const Variable& variable(const std::string& n) const { return vertices_[vertex_index(n)]; }

    std::vector<std::string> parents(const std::string& n) const {
        vertex_index(n);
        const auto it = parents_.find(n);
        return it == parents_.end() ? std::vector<std::string>{} : it->second;
    }
    std::vector<std::string> children(const std::string& n) const {
        vertex_index(n);
        const auto it = children_.find(n);
        return it == children_.end() ? std::vector<std::string>{} : it->second;
    }
    std::vector<std::string> siblings(const std::string& n) const {
        vertex_index(n);
        const auto it = siblings_.find(n);
        return it == siblings_.end() ? std::vector<std::string>{} : it->second;
    }
    bool has_bidirected(const std::string& n) const { return !siblings(n).empty(); }

    // Connected components of the bidirected part; singletons included.
    // Vertices inside a component and the components themselves follow
    // declaration order.
    std::vector<std::vector<std::string>> districts() const {
        std::vector<std::vector<std::string>> out;
        std::set<std::string> done;
        for (const auto& v : vertices_) {
            if (done.count(v.name)) continue;
            std::vector<std::string> stack{v.name};
            std::set<std::string> comp;
            done.insert(v.name);
            comp.insert(v.name);
            while (!stack.empty()) {
                const std::string cur = stack.back();
                stack.pop_back();
                for (const auto& s : siblings(cur)) {
                    if (comp.insert(s).second) {
                        done.insert(s);
                        stack.push_back(s);
                    }
                }
            }
            std::vector<std::string> ordered;
            for (const auto& u : vertices_) {
                if (comp.count(u.name)) ordered.push_back(u.name);
            }
            out.push_back(std::move(ordered));
        }
        return out;
    }

    // Kahn's algorithm with declaration-order tie break; throws on a cycle
    // naming the offending vertices.
    std::vector<std::string> topological_order() const {
        std::map<std::string, std::size_t> indeg;
        for (const auto& v : vertices_) indeg[v.name] = 0;
        for (const auto& [a, b] : directed_) {
            (void)a;
            ++indeg[b];
        }
        std::vector<std::string> order;
        std::set<std::string> emitted;
        while (order.size() < vertices_.size()) {
            bool advanced = false;
            for (const auto& v : vertices_) {
                if (emitted.count(v.name) || indeg[v.name] != 0) continue;
                order.push_back(v.name);
                emitted.insert(v.name);
                for (const auto& c : children(v.name)) --indeg[c];
                advanced = true;
                break;
            }
            if (!advanced) {
                std::vector<std::string> names;
                std::map<std::string, std::vector<std::string>> kids;
                for (const auto& v : vertices_) {
                    if (!emitted.count(v.name)) names.push_back(v.name);
                }
                for (const auto& [a, b] : directed_) {
                    if (!emitted.count(a) && !emitted.count(b)) kids[a].push_back(b);
                }
                auto cycle = detail::find_cycle(names, kids);
                throw std::invalid_argument("Directed cycle: " + detail::join(*cycle, " -> "));
            }
        }
        return order;
    }

    friend bool operator==(const Admg& x, const Admg& y) {
        if (x.vertices_ != y.vertices_) return false;
        const std::set<std::pair<std::string, std::string>> dx(x.directed_.begin(), x.directed_.end());
        const std::set<std::pair<std::string, std::string>> dy(y.directed_.begin(), y.directed_.end());
        if (dx != dy) return false;
        std::set<std::pair<std::string, std::string>> bx;
        std::set<std::pair<std::string, std::string>> by;
        for (const auto& [a, b] : x.bidirected_) bx.insert(norm(a, b));
        for (const auto& [a, b] : y.bidirected_) by.insert(norm(a, b));
        return bx == by;
    }

private:
    static std::pair<std::string, std::string> norm(const std::string& a, const std::string& b) {
        return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    }
    void require_vertex(const std::string& n, const std::string& ctx) const {
        if (!has_vertex(n)) throw std::invalid_argument(ctx + " references undeclared vertex '" + n + "'");
    }

    std::vector<Variable> vertices_;
    std::vector<std::pair<std::string, std::string>> directed_;
    std::vector<std::pair<std::string, std::string>> bidirected_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, std::vector<std::string>> children_;
    std::map<std::string, std::vector<std::string>> parents_;
    std::map<std::string, std::vector<std::string>> siblings_;
};

namespace detail {

// Is there a directed path src -> ... -> dst whose intermediate vertices all
// satisfy the predicate?
template <class G, class Pred>
bool directed_path_exists(const G& g, const std::string& src, const std::string& dst, Pred allow_intermediate) {
    if (src == dst) return false;
    std::vector<std::string> stack{src};
    std::set<std::string> visited{src};
    while (!stack.empty()) {
        const std::string cur = stack.back();
        stack.pop_back();
        for (const auto& w : g.children(cur)) {
            if (w == dst) return true;
            if (!visited.count(w) && allow_intermediate(w)) {
                visited.insert(w);
                stack.push_back(w);
            }
        }
    }
    return false;
}

}  // namespace detail

// Projects a hidden-variable causal graph onto its observed vertices.
// A directed edge a -> b appears when some directed path a -> ... -> b has
// only hidden intermediates. A bidirected edge a <-> b appears when some
// path between a and b has an arrowhead at both ends, only hidden
// intermediates, and no vertex with two adjacent path edges pointing into it.
inline Admg latent_projection(const CausalGraph& g) {
    {
        std::map<std::string, std::vector<std::string>> kids;
        for (const auto& [a, b] : g.edges()) kids[a].push_back(b);
        if (auto cycle = detail::find_cycle(g.vertex_names(), kids)) {
            throw std::invalid_argument("Directed cycle: " + detail::join(*cycle, " -> "));
        }
    }

    std::vector<std::pair<std::string, std::string>> directed;
    for (const auto& a : g.observed()) {
        for (const auto& b : g.observed()) {
            if (a.name == b.name) continue;
            if (detail::directed_path_exists(g, a.name, b.name,
                                             [&](const std::string& w) { return g.is_hidden(w); })) {
                directed.push_back({a.name, b.name});
            }
        }
    }

    // Simple-path search; state tracks whether the edge we arrived by points
    // into the current vertex.
    std::vector<std::pair<std::string, std::string>> bidirected;
    for (std::size_t i = 0; i < g.observed().size(); ++i) {
        for (std::size_t j = i + 1; j < g.observed().size(); ++j) {
            const std::string& a = g.observed()[i].name;
            const std::string& b = g.observed()[j].name;
            bool found = false;
            std::vector<std::string> path{a};
            std::set<std::string> on_path{a};

            std::function<void(const std::string&, bool)> dfs =
                [&](const std::string& cur, bool came_in_by_arrow) {
                    if (found) return;
                    // Leave through an edge pointing into cur (toward a parent).
                    if (!came_in_by_arrow) {
                        for (const auto& p : g.parents(cur)) {
                            if (found) return;
                            if (on_path.count(p)) continue;
                            if (p == b) continue;  // would arrive without an arrowhead at b
                            if (!g.is_hidden(p)) continue;
                            on_path.insert(p);
                            dfs(p, false);
                            on_path.erase(p);
                        }
                    }
                    // Leave through an edge pointing away (toward a child).
                    for (const auto& c : g.children(cur)) {
                        if (found) return;
                        if (on_path.count(c)) continue;
                        if (c == b) {
                            found = true;
                            return;
                        }
                        if (!g.is_hidden(c)) continue;
                        on_path.insert(c);
                        dfs(c, true);
                        on_path.erase(c);
                    }
                };

            // First edge must point into a, so start through a parent.
            for (const auto& p : g.parents(a)) {
                if (found) break;
                if (p == b || !g.is_hidden(p)) continue;
                on_path.insert(p);
                dfs(p, false);
                on_path.erase(p);
            }
            (void)path;
            if (found) bidirected.push_back({a, b});
        }
    }

    std::vector<Variable> vertices = g.observed();
    return Admg(std::move(vertices), std::move(directed), std::move(bidirected));
}

// Rebuilds a hidden-variable graph from an ADMG: one fresh hidden parent per
// bidirected edge.
inline CausalGraph to_causal_graph(const Admg& g) {
    std::vector<std::string> hidden;
    std::vector<std::pair<std::string, std::string>> edges = g.directed();
    std::size_t n = 0;
    for (const auto& [a, b] : g.bidirected()) {
        std::string h = "U" + std::to_string(n++);
        while (g.has_vertex(h)) h = "U" + std::to_string(n++);
        hidden.push_back(h);
        edges.push_back({h, a});
        edges.push_back({h, b});
    }
    return CausalGraph(g.vertices(), std::move(hidden), std::move(edges));
}

namespace detail {

template <class G>
void require_observed(const G& g, const std::string& n, const std::string& role) {
    if constexpr (std::is_same_v<G, CausalGraph>) {
        if (!g.has_vertex(n)) throw std::out_of_range(role + " variable '" + n + "' not found");
        if (!g.is_observed(n)) {
            throw std::invalid_argument(role + " variable '" + n + "' is hidden");
        }
    } else {
        if (!g.has_vertex(n)) throw std::out_of_range(role + " variable '" + n + "' not found");
    }
}

template <class G>
bool causally_irrelevant_impl(const G& g, const std::set<std::string>& z,
                              const std::set<std::string>& y, const std::set<std::string>& a) {
    for (const auto& n : z) require_observed(g, n, "Intervention");
    for (const auto& n : a) require_observed(g, n, "Context");
    for (const auto& n : y) require_observed(g, n, "Outcome");
    for (const auto& n : y) {
        if (z.count(n) || a.count(n)) {
            throw std::invalid_argument("Outcome variable '" + n + "' overlaps the intervention sets");
        }
    }
    for (const auto& src : z) {
        if (a.count(src)) continue;
        for (const auto& dst : y) {
            if (directed_path_exists(g, src, dst, [&](const std::string& w) { return !a.count(w); })) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace detail

// True when every directed path from a member of z to a member of y passes
// through a. Members of z that already sit in a are ignored.
inline bool is_causally_irrelevant(const CausalGraph& g, const std::set<std::string>& z,
                                   const std::set<std::string>& y, const std::set<std::string>& a) {
    return detail::causally_irrelevant_impl(g, z, y, a);
}
inline bool is_causally_irrelevant(const Admg& g, const std::set<std::string>& z,
                                   const std::set<std::string>& y, const std::set<std::string>& a) {
    return detail::causally_irrelevant_impl(g, z, y, a);
}

namespace detail {

template <class G>
std::vector<std::string> relevant_context_subset_impl(const G& g, const std::string& target,
                                                      const std::set<std::string>& s) {
    require_observed(g, target, "Target");
    if (s.count(target)) {
        throw std::invalid_argument("Target '" + target + "' must not be a member of the context set");
    }
    for (const auto& n : s) require_observed(g, n, "Context");
    std::vector<std::string> out;
    for (const auto& c : s) {
        if (directed_path_exists(g, c, target, [&](const std::string& w) { return !s.count(w); })) {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace detail

// Members of s with a directed path to the target that avoids the rest of s.
inline std::vector<std::string> relevant_context_subset(const CausalGraph& g, const std::string& target,
                                                        const std::set<std::string>& s) {
    return detail::relevant_context_subset_impl(g, target, s);
}
inline std::vector<std::string> relevant_context_subset(const Admg& g, const std::string& target,
                                                        const std::set<std::string>& s) {
    return detail::relevant_context_subset_impl(g, target, s);
}

// z qualifies when it is causally irrelevant to y given a and the joint
// distribution over y and a under interventions on z is identified (no
// member of z touches a bidirected edge after projection).
inline bool is_generalized_instrument(const Admg& g, const std::set<std::string>& z,
                                      const std::set<std::string>& a, const std::set<std::string>& y) {
    if (!is_causally_irrelevant(g, z, y, a)) return false;
    for (const auto& n : z) {
        if (g.has_bidirected(n)) return false;
    }
    return true;
}
inline bool is_generalized_instrument(const CausalGraph& g, const std::set<std::string>& z,
                                      const std::set<std::string>& a, const std::set<std::string>& y) {
    if (!is_causally_irrelevant(g, z, y, a)) return false;
    return is_generalized_instrument(latent_projection(g), z, a, y);
}

}  // namespace cfbounds
