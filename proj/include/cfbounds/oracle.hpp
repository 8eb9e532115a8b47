#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cfbounds/bounds.hpp"
#include "cfbounds/rng.hpp"

namespace cfbounds {

// One observed variable inside a response-function model: its response
// function is an arbitrary map from parent configurations to values, so
// there are card^configs of them.
struct ResponseVariable {
    std::string name;
    std::vector<std::string> parents;      // graph edge order
    std::vector<std::size_t> parent_card;  // aligned with parents
    std::size_t card = 0;
    std::size_t configs = 1;    // product of parent cardinalities
    std::size_t functions = 1;  // card^configs
};

// Variables joined by bidirected edges share one latent block; the block's
// state picks a response function for every member at once. The law lives
// on joint response profiles, members in declaration order with the first
// member varying slowest.
struct DistrictModel {
    std::vector<ResponseVariable> members;
    std::vector<double> law;

    std::size_t profiles() const {
        std::size_t n = 1;
        for (const auto& m : members) n *= m.functions;
        return n;
    }
};

// A fully specified structural model over an Admg: every district carries a
// law over its joint response profiles. Mixtures with fewer latent states
// than profiles are stored collapsed onto the same profile law.
struct ResponseFunctionScm {
    Admg graph;
    std::vector<DistrictModel> districts;
};

// How sample_scm draws a model: unconfounded conditional rows get a
// symmetric Dirichlet prior with parameter beta_alpha (Beta(a,a) when the
// variable is binary), district laws a symmetric Dirichlet with parameter
// dirichlet_alpha. cardinality overrides the latent state count per
// district, keyed by the sorted member names joined with commas; the
// default is the full response-profile count.
struct ScmSamplerConfig {
    double beta_alpha = 1.0;
    double dirichlet_alpha = 0.1;
    std::map<std::string, std::size_t> cardinality;
    std::uint64_t seed = 0;
};

// The config key for a district's cardinality override.
inline std::string district_key(std::vector<std::string> members) {
    std::sort(members.begin(), members.end());
    std::string out;
    for (const auto& m : members) {
        if (!out.empty()) out += ',';
        out += m;
    }
    return out;
}

namespace detail {

constexpr std::size_t kProfileCap = std::size_t{1} << 20;

inline std::size_t checked_pow(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base) {
            throw std::overflow_error("Response function count overflows");
        }
        r *= base;
    }
    return r;
}

inline ResponseVariable response_shape(const Admg& g, const std::string& name) {
    ResponseVariable rv;
    rv.name = name;
    rv.parents = g.parents(name);
    rv.card = g.variable(name).domain.size();
    for (const auto& p : rv.parents) {
        rv.parent_card.push_back(g.variable(p).domain.size());
        if (rv.configs > std::numeric_limits<std::size_t>::max() / rv.parent_card.back()) {
            throw std::overflow_error("Parent configuration count overflows");
        }
        rv.configs *= rv.parent_card.back();
    }
    rv.functions = checked_pow(rv.card, rv.configs);
    return rv;
}

inline DistrictModel district_shape(const Admg& g, const std::vector<std::string>& members) {
    if (members.empty()) throw std::invalid_argument("A district needs at least one variable");
    DistrictModel d;
    std::size_t profiles = 1;
    for (const auto& m : members) {
        d.members.push_back(response_shape(g, m));
        const std::size_t f = d.members.back().functions;
        if (f > kProfileCap || profiles > kProfileCap / f) {
            throw std::overflow_error("District '" + district_key(members) +
                                      "' has too many response profiles to enumerate");
        }
        profiles *= f;
    }
    return d;
}

inline std::vector<DistrictModel> scm_shape(const Admg& g) {
    std::vector<DistrictModel> out;
    for (const auto& district : g.districts()) out.push_back(district_shape(g, district));
    return out;
}

// The value a response function takes at one parent configuration; the
// first configuration is the most significant digit of the function index.
inline std::size_t response_value(const ResponseVariable& rv, std::size_t function, std::size_t config) {
    std::size_t divisor = 1;
    for (std::size_t c = config + 1; c < rv.configs; ++c) divisor *= rv.card;
    return (function / divisor) % rv.card;
}

// Splits a joint profile into per-member function indices, first member
// most significant.
inline std::vector<std::size_t> member_functions(const DistrictModel& d, std::size_t profile) {
    std::vector<std::size_t> out(d.members.size());
    for (std::size_t m = d.members.size(); m-- > 0;) {
        out[m] = profile % d.members[m].functions;
        profile /= d.members[m].functions;
    }
    return out;
}

// Precomputed lookup tables for evaluating one model by exhaustive latent
// enumeration. Holds a pointer to the district models it was built from.
class ProfileWalker {
public:
    ProfileWalker(const Admg& g, const std::vector<DistrictModel>& districts)
        : districts_(&districts), topo_(g.topological_order()) {
        for (std::size_t i = 0; i < topo_.size(); ++i) pos_[topo_[i]] = i;
        shape_.resize(topo_.size(), nullptr);
        slot_.resize(topo_.size());
        for (std::size_t d = 0; d < districts.size(); ++d) {
            radix_.push_back(districts[d].profiles());
            for (std::size_t m = 0; m < districts[d].members.size(); ++m) {
                const ResponseVariable& rv = districts[d].members[m];
                const auto it = pos_.find(rv.name);
                if (it == pos_.end()) {
                    throw std::invalid_argument("Response model variable '" + rv.name +
                                                "' is not in the graph");
                }
                shape_[it->second] = &rv;
                slot_[it->second] = {d, m};
            }
        }
        for (const auto& name : topo_) {
            if (shape_[pos_.at(name)] == nullptr) {
                throw std::invalid_argument("Variable '" + name + "' has no response model");
            }
        }
        for (std::size_t i = 0; i < topo_.size(); ++i) {
            std::vector<std::size_t> ps;
            for (const auto& p : shape_[i]->parents) ps.push_back(pos_.at(p));
            parent_slots_.push_back(std::move(ps));
            std::map<std::string, std::size_t> vi;
            const auto& dom = g.variable(topo_[i]).domain;
            for (std::size_t v = 0; v < dom.size(); ++v) vi[dom[v]] = v;
            value_index_.push_back(std::move(vi));
        }
    }

    const std::vector<std::string>& topo() const { return topo_; }
    std::size_t slot_of(const std::string& name) const { return pos_.at(name); }
    std::size_t value_of(std::size_t slot, const std::string& value) const {
        return value_index_[slot].at(value);
    }

    // Recursive substitution under one intervention, profile fixed.
    void evaluate(const std::vector<std::vector<std::size_t>>& funcs,
                  const std::vector<std::optional<std::size_t>>& world,
                  std::vector<std::size_t>& values) const {
        for (std::size_t i = 0; i < topo_.size(); ++i) {
            if (world[i]) {
                values[i] = *world[i];
                continue;
            }
            const ResponseVariable& rv = *shape_[i];
            std::size_t config = 0;
            for (std::size_t j = 0; j < parent_slots_[i].size(); ++j) {
                config = config * rv.parent_card[j] + values[parent_slots_[i][j]];
            }
            const auto [d, m] = slot_[i];
            values[i] = response_value(rv, funcs[d][m], config);
        }
    }

    std::vector<std::optional<std::size_t>> world_slots(const Intervention& world) const {
        std::vector<std::optional<std::size_t>> out(topo_.size());
        for (const auto& [var, val] : world.values) {
            out[pos_.at(var)] = value_index_[pos_.at(var)].at(val);
        }
        return out;
    }

    // Runs fn(funcs, weight) over every joint profile; weighted walks skip
    // zero-mass profiles, unweighted ones visit all with weight 1. fn may
    // return false to stop early.
    template <class Fn>
    void for_each_profile(bool weighted, Fn&& fn) const {
        if (radix_.empty()) return;
        std::vector<std::size_t> profile(radix_.size(), 0);
        std::vector<std::vector<std::size_t>> funcs;
        for (;;) {
            double w = 1.0;
            if (weighted) {
                for (std::size_t d = 0; d < radix_.size(); ++d) {
                    w *= (*districts_)[d].law[profile[d]];
                }
            }
            if (w != 0.0) {
                funcs.clear();
                for (std::size_t d = 0; d < radix_.size(); ++d) {
                    funcs.push_back(member_functions((*districts_)[d], profile[d]));
                }
                if (!fn(funcs, w)) return;
            }
            std::size_t d = radix_.size();
            bool carried = true;
            while (d-- > 0) {
                if (++profile[d] < radix_[d]) {
                    carried = false;
                    break;
                }
                profile[d] = 0;
            }
            if (carried) return;
        }
    }

private:
    const std::vector<DistrictModel>* districts_;
    std::vector<std::string> topo_;
    std::map<std::string, std::size_t> pos_;
    std::vector<const ResponseVariable*> shape_;
    std::vector<std::pair<std::size_t, std::size_t>> slot_;
    std::vector<std::vector<std::size_t>> parent_slots_;
    std::vector<std::map<std::string, std::size_t>> value_index_;
    std::vector<std::size_t> radix_;
};

// One conjunct prepared for profile evaluation.
struct PreparedConjunct {
    std::vector<std::optional<std::size_t>> world;
    std::vector<std::pair<std::size_t, std::size_t>> checks;  // slot, value index
};

inline std::vector<PreparedConjunct> prepare_conjuncts(const ProfileWalker& walker,
                                                       const CounterfactualEvent& e) {
    std::vector<PreparedConjunct> out;
    for (const auto& c : e.conjuncts()) {
        PreparedConjunct pc;
        pc.world = walker.world_slots(c.world);
        for (const auto& [var, val] : c.outcome) {
            const std::size_t slot = walker.slot_of(var);
            pc.checks.push_back({slot, walker.value_of(slot, val)});
        }
        out.push_back(std::move(pc));
    }
    return out;
}

inline bool profile_satisfies(const ProfileWalker& walker,
                              const std::vector<std::vector<std::size_t>>& funcs,
                              const std::vector<PreparedConjunct>& conjuncts,
                              std::vector<std::size_t>& scratch) {
    for (const auto& pc : conjuncts) {
        walker.evaluate(funcs, pc.world, scratch);
        for (const auto& [slot, want] : pc.checks) {
            if (scratch[slot] != want) return false;
        }
    }
    return true;
}

inline std::uint64_t mix_u64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent per-sample stream so aggregate results do not depend on the
// order samples are drawn in.
inline std::uint64_t stream_seed(std::uint64_t seed, std::size_t sample) {
    return mix_u64(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(sample + 1));
}

}  // namespace detail

// Number of joint response profiles a district supports: the product over
// members of card^configs.
inline std::size_t canonical_latent_cardinality(const Admg& g, const std::vector<std::string>& district) {
    if (district.empty()) throw std::invalid_argument("A district needs at least one variable");
    std::size_t n = 1;
    for (const auto& m : district) {
        const ResponseVariable rv = detail::response_shape(g, m);
        if (rv.functions != 0 && n > std::numeric_limits<std::size_t>::max() / rv.functions) {
            throw std::overflow_error("Latent cardinality overflows");
        }
        n *= rv.functions;
    }
    return n;
}

// Draws a model from the priors in cfg. Districts are visited in
// declaration order. A lone unconfounded variable gets one conditional row
// per parent configuration; a confounded district draws its profile law in
// one piece, unless a cardinality override asks for a kappa-state mixture,
// which draws mixture weights, then per state one conditional row per
// member per configuration, and collapses the mixture onto profiles.
inline ResponseFunctionScm sample_scm(const Admg& g, const ScmSamplerConfig& cfg, Rng& rng) {
    if (cfg.beta_alpha <= 0.0 || cfg.dirichlet_alpha <= 0.0) {
        throw std::invalid_argument("Prior parameters must be positive");
    }
    ResponseFunctionScm scm{g, {}};
    std::set<std::string> used;
    for (const auto& district : g.districts()) {
        DistrictModel d = detail::district_shape(g, district);
        const std::size_t canonical = d.profiles();
        const std::string key = district_key(district);
        std::optional<std::size_t> kappa;
        if (const auto it = cfg.cardinality.find(key); it != cfg.cardinality.end()) {
            if (it->second == 0) throw std::invalid_argument("Latent cardinality must be at least 1");
            kappa = it->second;
            used.insert(key);
        }
        if (d.members.size() == 1 && !kappa) {
            const ResponseVariable& rv = d.members.front();
            std::vector<std::vector<double>> rows;
            for (std::size_t s = 0; s < rv.configs; ++s) {
                rows.push_back(rng.dirichlet(cfg.beta_alpha, rv.card));
            }
            d.law.assign(canonical, 1.0);
            for (std::size_t f = 0; f < canonical; ++f) {
                for (std::size_t s = 0; s < rv.configs; ++s) {
                    d.law[f] *= rows[s][detail::response_value(rv, f, s)];
                }
            }
        } else if (!kappa || *kappa == canonical) {
            d.law = rng.dirichlet(cfg.dirichlet_alpha, canonical);
        } else {
            const std::vector<double> pi = rng.dirichlet(cfg.dirichlet_alpha, *kappa);
            d.law.assign(canonical, 0.0);
            for (std::size_t u = 0; u < *kappa; ++u) {
                std::vector<std::vector<std::vector<double>>> rows;  // member, config, value
                for (const auto& rv : d.members) {
                    std::vector<std::vector<double>> member_rows;
                    for (std::size_t s = 0; s < rv.configs; ++s) {
                        member_rows.push_back(rng.dirichlet(cfg.beta_alpha, rv.card));
                    }
                    rows.push_back(std::move(member_rows));
                }
                for (std::size_t r = 0; r < canonical; ++r) {
                    const std::vector<std::size_t> funcs = detail::member_functions(d, r);
                    double w = pi[u];
                    for (std::size_t m = 0; m < d.members.size(); ++m) {
                        const ResponseVariable& rv = d.members[m];
                        for (std::size_t s = 0; s < rv.configs; ++s) {
                            w *= rows[m][s][detail::response_value(rv, funcs[m], s)];
                        }
                    }
                    d.law[r] += w;
                }
            }
        }
        scm.districts.push_back(std::move(d));
    }
    for (const auto& [key, card] : cfg.cardinality) {
        (void)card;
        if (!used.count(key)) {
            throw std::invalid_argument("Latent cardinality key '" + key + "' does not name a district");
        }
    }
    return scm;
}

// Exact observational joint over the declared variables, first declared
// variable varying slowest.
inline NumericDistribution observed_joint(const ResponseFunctionScm& scm) {
    const Admg& g = scm.graph;
    const detail::ProfileWalker walker(g, scm.districts);
    const std::vector<Variable> vars = g.vertices();
    std::size_t total = 1;
    for (const auto& v : vars) total *= v.domain.size();
    std::vector<double> cells(total, 0.0);
    std::vector<std::size_t> decl_slot;
    for (const auto& v : vars) decl_slot.push_back(walker.slot_of(v.name));
    const std::vector<std::optional<std::size_t>> empty_world(walker.topo().size());
    std::vector<std::size_t> values(walker.topo().size());
    walker.for_each_profile(true, [&](const std::vector<std::vector<std::size_t>>& funcs, double w) {
        walker.evaluate(funcs, empty_world, values);
        std::size_t idx = 0;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            idx = idx * vars[i].domain.size() + values[decl_slot[i]];
        }
        cells[idx] += w;
        return true;
    });
    return NumericDistribution(vars, cells);
}

// Exact probability of a conjunction of single-world events: one latent
// profile drives the recursive substitution in every world at once.
inline double counterfactual_prob(const ResponseFunctionScm& scm, const CounterfactualEvent& e) {
    validate_event(scm.graph, e);
    if (e.inconsistent()) return 0.0;
    if (e.conjuncts().empty()) return 1.0;
    const detail::ProfileWalker walker(scm.graph, scm.districts);
    const std::vector<detail::PreparedConjunct> prepared = detail::prepare_conjuncts(walker, e);
    std::vector<std::size_t> scratch(walker.topo().size());
    double mass = 0.0;
    walker.for_each_profile(true, [&](const std::vector<std::vector<std::size_t>>& funcs, double w) {
        if (detail::profile_satisfies(walker, funcs, prepared, scratch)) mass += w;
        return true;
    });
    return mass;
}

inline double counterfactual_prob(const ResponseFunctionScm& scm, const SingleWorldEvent& e) {
    return counterfactual_prob(scm, CounterfactualEvent({e}));
}

// Whether any response profile at full canonical cardinality makes the
// event true; with that cardinality an event has positive probability
// under some model consistent with the graph exactly when one does.
inline bool satisfiable(const Admg& g, const CounterfactualEvent& e) {
    validate_event(g, e);
    if (e.inconsistent()) return false;
    if (e.conjuncts().empty()) return true;
    const std::vector<DistrictModel> shape = detail::scm_shape(g);
    const detail::ProfileWalker walker(g, shape);
    const std::vector<detail::PreparedConjunct> prepared = detail::prepare_conjuncts(walker, e);
    std::vector<std::size_t> scratch(walker.topo().size());
    bool found = false;
    walker.for_each_profile(false, [&](const std::vector<std::vector<std::size_t>>& funcs, double) {
        if (detail::profile_satisfies(walker, funcs, prepared, scratch)) {
            found = true;
            return false;
        }
        return true;
    });
    return found;
}

// What to bound and against which machinery: an instrument selects the
// branch-and-prune bounds, a treatment subset the partial-intervention
// bounds, neither the assumption-free ones.
struct VerifyQuery {
    Intervention world;
    Assignment outcome;
    std::optional<std::string> instrument;
    std::optional<std::set<std::string>> subset;
};

struct VerifyReport {
    std::size_t samples = 0;
    std::size_t contained = 0;
    std::size_t skipped = 0;  // a bound hit an undefined conditional
    std::size_t order_violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    double mean_slack = 0.0;
    ExprPtr lower;
    ExprPtr upper;
};

// Samples models, evaluates the symbolic bounds on each model's observed
// joint, and checks they contain the model's exact counterfactual
// probability to within 1e-9.
inline VerifyReport verify_bounds(const Admg& g, const VerifyQuery& q, std::size_t n_samples,
                                  const ScmSamplerConfig& cfg) {
    constexpr double tol = 1e-9;
    VerifyReport report;
    if (q.instrument && q.subset) {
        throw std::invalid_argument("Choose an instrument or a treatment subset, not both");
    }
    if (q.instrument) {
        const BoundPair bp = bound_probability(g, BoundQuery{*q.instrument, q.world, q.outcome});
        report.lower = bp.lower.expr;
        report.upper = bp.upper.expr;
    } else if (q.subset) {
        const SubsetBounds sb = subset_bounds(g, q.world, q.outcome, *q.subset);
        report.lower = sb.lower;
        report.upper = sb.upper;
    } else {
        const TrivialBounds tb = trivial_bounds(g, q.world, q.outcome);
        report.lower = tb.lower;
        report.upper = tb.upper;
    }
    const CounterfactualEvent target({SingleWorldEvent{q.world, q.outcome}});
    report.samples = n_samples;
    double slack_sum = 0.0;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        Rng rng(detail::stream_seed(cfg.seed, i));
        const ResponseFunctionScm scm = sample_scm(g, cfg, rng);
        const NumericDistribution dist = observed_joint(scm);
        const EvalOutcome<double> lo = evaluate_against<double>(g, dist, report.lower);
        const EvalOutcome<double> hi = evaluate_against<double>(g, dist, report.upper);
        if (!lo.value || !hi.value) {
            ++report.skipped;
            continue;
        }
        const double truth = counterfactual_prob(scm, target);
        if (*lo.value > *hi.value + tol) ++report.order_violations;
        const double slack = std::min(truth - *lo.value, *hi.value - truth);
        if (slack >= -tol) ++report.contained;
        report.min_slack = std::min(report.min_slack, slack);
        slack_sum += slack;
        ++checked;
    }
    if (checked > 0) report.mean_slack = slack_sum / static_cast<double>(checked);
    return report;
}

// Which variables play instrument, treatment and outcome in the bound
// width study; treatment and outcome must be binary.
struct StudyRoles {
    std::string instrument = "Z";
    std::string treatment = "A";
    std::string outcome = "Y";
};

struct StudyRow {
    double corr = 0.0;
    double width = 0.0;
    bool excludes_zero = false;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    double mean_width = 0.0;
    double sd_width = 0.0;
    double fraction_excluding = 0.0;
};

// Samples models and reports, per model, the observed instrument-treatment
// correlation against the width of the average-effect interval
// [lower(active) - upper(baseline), upper(active) - lower(baseline)].
inline StudyResult bound_width_study(const Admg& g, std::size_t n, const ScmSamplerConfig& cfg,
                                     const StudyRoles& roles = {}) {
    const std::vector<std::string>& tdom = g.variable(roles.treatment).domain;
    const std::vector<std::string>& ydom = g.variable(roles.outcome).domain;
    if (tdom.size() != 2 || ydom.size() != 2) {
        throw std::invalid_argument("Bound width study needs a binary treatment and outcome");
    }
    const Assignment y1{{roles.outcome, ydom[1]}};
    const BoundPair active =
        bound_probability(g, BoundQuery{roles.instrument, Intervention{{{roles.treatment, tdom[1]}}}, y1});
    const BoundPair baseline =
        bound_probability(g, BoundQuery{roles.instrument, Intervention{{{roles.treatment, tdom[0]}}}, y1});

    const std::vector<std::string>& zdom = g.variable(roles.instrument).domain;
    StudyResult out;
    double width_sum = 0.0;
    double width_sq = 0.0;
    std::size_t excluding = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(detail::stream_seed(cfg.seed, i));
        const ResponseFunctionScm scm = sample_scm(g, cfg, rng);
        const NumericDistribution dist = observed_joint(scm);
        const EvalOutcome<double> l1 = evaluate_against<double>(g, dist, active.lower.expr);
        const EvalOutcome<double> u1 = evaluate_against<double>(g, dist, active.upper.expr);
        const EvalOutcome<double> l0 = evaluate_against<double>(g, dist, baseline.lower.expr);
        const EvalOutcome<double> u0 = evaluate_against<double>(g, dist, baseline.upper.expr);
        if (!l1.value || !u1.value || !l0.value || !u0.value) continue;

        double ez = 0.0;
        double ea = 0.0;
        double ezz = 0.0;
        double eaa = 0.0;
        double eza = 0.0;
        for (std::size_t zi = 0; zi < zdom.size(); ++zi) {
            const double pz = dist.prob({{roles.instrument, zdom[zi]}});
            ez += zi * pz;
            ezz += static_cast<double>(zi * zi) * pz;
            for (std::size_t ai = 0; ai < tdom.size(); ++ai) {
                const double pza =
                    dist.prob({{roles.instrument, zdom[zi]}, {roles.treatment, tdom[ai]}});
                eza += static_cast<double>(zi * ai) * pza;
            }
        }
        for (std::size_t ai = 0; ai < tdom.size(); ++ai) {
            const double pa = dist.prob({{roles.treatment, tdom[ai]}});
            ea += ai * pa;
            eaa += static_cast<double>(ai * ai) * pa;
        }
        const double var_z = ezz - ez * ez;
        const double var_a = eaa - ea * ea;
        StudyRow row;
        row.corr = (var_z > 0.0 && var_a > 0.0) ? (eza - ez * ea) / std::sqrt(var_z * var_a) : 0.0;
        const double effect_lower = *l1.value - *u0.value;
        const double effect_upper = *u1.value - *l0.value;
        row.width = effect_upper - effect_lower;
        row.excludes_zero = effect_lower > 0.0 || effect_upper < 0.0;
        if (row.excludes_zero) ++excluding;
        width_sum += row.width;
        width_sq += row.width * row.width;
        out.rows.push_back(row);
    }
    const double m = static_cast<double>(out.rows.size());
    if (!out.rows.empty()) {
        out.mean_width = width_sum / m;
        out.fraction_excluding = static_cast<double>(excluding) / m;
    }
    if (out.rows.size() > 1) {
        const double ss = width_sq - m * out.mean_width * out.mean_width;
        out.sd_width = std::sqrt(std::max(0.0, ss / (m - 1.0)));
    }
    return out;
}

}  // namespace cfbounds
