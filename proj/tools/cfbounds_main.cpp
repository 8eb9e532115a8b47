// Command line front end: symbolic bounds, distributional constraints,
// oracle verification, and simulation studies for hidden-variable models.
//
// Exit codes: 0 success, 1 domain error (bad query, unreadable input),
// 2 usage error (bad flags). Randomized subcommands require --seed and
// echo it; JSON and CSV outputs carry a run manifest and are byte
// identical for identical inputs and seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cfbounds/bounds.hpp>
#include <cfbounds/dsl.hpp>
#include <cfbounds/identify.hpp>
#include <cfbounds/inequalities.hpp>
#include <cfbounds/oracle.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace cfb = cfbounds;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Flag combinations CLI11 cannot express; reported like parse errors.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config of the subcommand in flight, dumped by --verbose on failure.
json g_active_config = json::object();

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), used to fingerprint input files in run manifests.

class Sha256 {
public:
    void update(const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        total_ += len;
        while (len > 0) {
            const std::size_t take = std::min<std::size_t>(64 - fill_, len);
            std::copy(p, p + take, buf_ + fill_);
            fill_ += take;
            p += take;
            len -= take;
            if (fill_ == 64) {
                process(buf_);
                fill_ = 0;
            }
        }
    }

    std::string hex() {
        const std::uint64_t bits = total_ * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        const unsigned char zero = 0;
        while (fill_ != 56) update(&zero, 1);
        unsigned char len[8];
        for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
        update(len, 8);
        std::string out;
        static const char* digits = "0123456789abcdef";
        for (std::uint32_t h : h_) {
            for (int i = 28; i >= 0; i -= 4) out += digits[(h >> i) & 0xF];
        }
        return out;
    }

private:
    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void process(const unsigned char* p) {
        static const std::uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
            0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
            0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
            0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
            0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
            0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
            0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        }
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3];
        std::uint32_t e = h_[4], f = h_[5], g = h_[6], h = h_[7];
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = h + s1 + ch + k[i] + w[i];
            const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = s0 + maj;
            h = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h_[0] += a;
        h_[1] += b;
        h_[2] += c;
        h_[3] += d;
        h_[4] += e;
        h_[5] += f;
        h_[6] += g;
        h_[7] += h;
    }

    std::uint32_t h_[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                           0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    unsigned char buf_[64] = {};
    std::size_t fill_ = 0;
    std::uint64_t total_ = 0;
};

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("Cannot open file '" + path + "'");
    Sha256 h;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h.update(buf, static_cast<std::size_t>(in.gcount()));
        if (!in) break;
    }
    return h.hex();
}

// ---------------------------------------------------------------------------
// Manifest and output plumbing.

json make_manifest(const std::vector<std::pair<std::string, std::string>>& inputs,
                   std::optional<std::uint64_t> seed) {
    json m;
    m["tool"] = "cfbounds";
    m["version"] = kVersion;
    json files = json::object();
    for (const auto& [name, path] : inputs) {
        files[name] = json{{"path", path}, {"sha256", sha256_file(path)}};
    }
    m["inputs"] = files;
    m["config"] = g_active_config;
    if (seed) m["seed"] = *seed;
    return m;
}

// Relative output paths land in $CFBOUNDS_OUT_DIR when it is set.
std::string resolve_out(const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    const char* dir = std::getenv("CFBOUNDS_OUT_DIR");
    if (dir && *dir) return std::string(dir) + "/" + path;
    return path;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("Cannot write output file '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("Failed while writing '" + path + "'");
}

void deliver(const std::string& out_flag, const std::string& content) {
    if (out_flag.empty()) {
        std::cout << content;
        return;
    }
    const std::string path = resolve_out(out_flag);
    write_file(path, content);
    std::cout << "wrote " << path << "\n";
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json json_number_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

// ---------------------------------------------------------------------------
// Shared helpers.

cfb::SingleWorldEvent parse_target(const cfb::Admg& g, const std::string& text) {
    const cfb::CounterfactualEvent ev = cfb::parse_event(g, text);
    if (ev.conjuncts().size() != 1) {
        throw std::invalid_argument("Target must be a single-world event like \"Y(A=1)=1\"");
    }
    const cfb::SingleWorldEvent& sw = ev.conjuncts().front();
    if (sw.world.values.empty()) {
        throw std::invalid_argument("Target needs at least one intervened variable, like \"Y(A=1)=1\"");
    }
    if (sw.outcome.empty()) {
        throw std::invalid_argument("Target needs at least one outcome variable, like \"Y(A=1)=1\"");
    }
    return sw;
}

std::string assignment_text(const cfb::Assignment& a) {
    std::string out;
    for (const auto& [var, val] : a) {
        if (!out.empty()) out += ", ";
        out += var + "=" + val;
    }
    return out;
}

std::string event_at(const cfb::Assignment& world, const cfb::Assignment& outcome) {
    return cfb::to_string(cfb::SingleWorldEvent{cfb::Intervention{world}, outcome});
}

std::string cube_event(const cfb::Assignment& world, const cfb::Cube& cube) {
    cfb::Assignment outcome;
    for (const auto& [var, val] : cube) outcome.insert({var, val});
    return event_at(world, outcome);
}

std::string cube_list_event(const cfb::Assignment& world, const std::vector<cfb::Cube>& cubes) {
    if (cubes.empty()) return "(nothing)";
    std::string out;
    for (const auto& c : cubes) {
        if (!out.empty()) out += "  |  ";
        out += cube_event(world, c);
    }
    return out;
}

std::map<std::string, std::size_t> parse_cardinality(const std::vector<std::string>& entries) {
    std::map<std::string, std::size_t> out;
    for (const auto& e : entries) {
        const std::size_t eq = e.rfind('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == e.size()) {
            throw UsageError("--cardinality entries look like NAME=COUNT or NAME,NAME=COUNT, got '" + e + "'");
        }
        std::size_t count = 0;
        try {
            count = std::stoull(e.substr(eq + 1));
        } catch (const std::exception&) {
            throw UsageError("Cardinality count in '" + e + "' is not a number");
        }
        out[e.substr(0, eq)] = count;
    }
    return out;
}

using Renderer = std::function<std::string(const cfb::ExprPtr&)>;

Renderer make_renderer(const cfb::Admg& g, const std::string& format) {
    if (format == "latex") {
        return [&g](const cfb::ExprPtr& e) { return cfb::to_latex(g, e); };
    }
    return [&g](const cfb::ExprPtr& e) { return cfb::to_text(g, e); };
}

// ---------------------------------------------------------------------------
// project: parse a graph file and print its latent projection.

struct ProjectOpts {
    std::string graph;
    std::string format = "text";
    std::string out;
};

void run_project(const ProjectOpts& o) {
    g_active_config = json{{"command", "project"}, {"graph", o.graph}, {"format", o.format}};
    const cfb::Admg g = cfb::load_graph_file(o.graph).to_admg();

    if (o.format == "json") {
        json nodes = json::array();
        for (const auto& v : g.vertices()) {
            nodes.push_back(json{{"name", v.name}, {"domain", v.domain}});
        }
        json j;
        j["manifest"] = make_manifest({{"graph", o.graph}}, std::nullopt);
        j["nodes"] = nodes;
        j["directed"] = g.directed();
        j["bidirected"] = g.bidirected();
        deliver(o.out, j.dump(2) + "\n");
        return;
    }

    std::ostringstream t;
    for (const auto& v : g.vertices()) {
        t << "node " << v.name;
        if (v.domain != std::vector<std::string>{"0", "1"}) {
            t << " in {";
            for (std::size_t i = 0; i < v.domain.size(); ++i) t << (i ? ", " : "") << v.domain[i];
            t << "}";
        }
        t << ";\n";
    }
    for (const auto& [a, b] : g.directed()) t << a << " -> " << b << ";\n";
    for (const auto& [a, b] : g.bidirected()) t << a << " <-> " << b << ";\n";
    deliver(o.out, t.str());
}

// ---------------------------------------------------------------------------
// bound: symbolic bounds, optionally with the full derivation trace.

struct BoundOpts {
    std::string graph;
    std::string target;
    std::string instrument;
    std::vector<std::string> subset;
    std::string format = "text";
    std::string out;
    bool no_prune = false;
    bool trace = false;
};

// The derivation as printed text: the partition of the target event, the
// candidate events per class and arm, and every branch with its
// compatible set and subtracted portion.
std::vector<std::string> bound_trace(const cfb::Admg& g, const cfb::BoundQuery& q,
                                     const cfb::LowerBound& lb, const Renderer& render) {
    const cfb::detail::QueryContext ctx = cfb::detail::validate_query(g, q);
    const cfb::Partition part = cfb::partition_events(g, q);
    const auto arm_world = [&](std::size_t j) {
        return cfb::Assignment{{q.instrument, ctx.z_values[j]}};
    };

    std::vector<std::string> lines;
    lines.push_back("target: P(" + cfb::to_string(part.target) + ")");
    {
        std::string vals;
        for (std::size_t i = 0; i < ctx.z_values.size(); ++i) vals += (i ? ", " : "") + ctx.z_values[i];
        lines.push_back("instrument: " + q.instrument + " with values {" + vals + "}, base arm " +
                        q.instrument + "=" + ctx.z_values[0]);
    }
    lines.push_back("");
    lines.push_back("partition of the target by the treatment response at " + q.instrument + "=" +
                    ctx.z_values[0] + ":");
    lines.push_back("  identified piece: " + cfb::to_string(part.identified));
    lines.push_back("    observed as " + render(lb.identified));
    for (std::size_t k = 0; k < part.classes.size(); ++k) {
        const auto& [ak, ev] = part.classes[k];
        lines.push_back("  class " + assignment_text(ak) + " piece: " + cfb::to_string(ev));
        const cfb::ClassReport* cr = k < lb.classes.size() ? &lb.classes[k] : nullptr;
        if (cr != nullptr) {
            for (std::size_t j = 1; j < ctx.z_values.size(); ++j) {
                if (j - 1 < cr->gammas.size()) {
                    lines.push_back("    component bounded from arm " + q.instrument + "=" +
                                    ctx.z_values[j] + ": " + cfb::to_string(cr->gammas[j - 1]));
                }
            }
        }
        if (part.classes.size() == 1 && ctx.z_values.size() == 2) {
            cfb::CounterfactualEvent rest = ev;
            rest.merge(cfb::SingleWorldEvent{cfb::Intervention{arm_world(1)}, ak});
            lines.push_back("    component with no nontrivial lower bound: " + cfb::to_string(rest));
        }
    }

    for (std::size_t k = 0; k < lb.classes.size(); ++k) {
        const cfb::ClassReport& cr = lb.classes[k];

        // Pair kept candidates with their branches; both were built in the
        // same order.
        std::vector<const cfb::BranchReport*> branch_of(cr.candidates.size(), nullptr);
        std::size_t bi = 0;
        for (std::size_t i = 0; i < cr.candidates.size(); ++i) {
            if (cr.candidates[i].kept && bi < cr.branches.size()) branch_of[i] = &cr.branches[bi++];
        }

        std::set<std::size_t> arms;
        for (const auto& c : cr.candidates) arms.insert(c.j);
        for (std::size_t j : arms) {
            lines.push_back("");
            lines.push_back("class " + assignment_text(cr.a_k) + ", arm " + q.instrument + "=" +
                            ctx.z_values[j] + ":");
            const std::string e1_implies = event_at(arm_world(0), cr.a_k);
            cfb::Assignment gamma_arm = ctx.a1;
            for (const auto& [var, val] : ctx.yt) gamma_arm.insert({var, val});
            const std::string e2_implies = event_at(arm_world(j), gamma_arm);

            lines.push_back("  events implying " + e1_implies + ", usable as E1 events:");
            for (const auto& c : cr.candidates) {
                if (c.j == j && c.family == "E1" && c.kept) {
                    lines.push_back("    " + cube_event(arm_world(0), c.cube));
                }
            }
            lines.push_back("  events implying " + e2_implies + ", usable as E2 events:");
            for (const auto& c : cr.candidates) {
                if (c.j == j && c.family == "E2" && c.kept) {
                    lines.push_back("    " + cube_event(arm_world(j), c.cube));
                }
            }
            bool any_dropped = false;
            for (const auto& c : cr.candidates) {
                if (c.j == j && !c.kept) {
                    if (!any_dropped) {
                        lines.push_back("  discarded candidates:");
                        any_dropped = true;
                    }
                    const cfb::Assignment w = c.family == "E1" ? arm_world(0) : arm_world(j);
                    lines.push_back("    " + cube_event(w, c.cube) + " (" + c.family + "): " + c.dropped);
                }
            }
            for (std::size_t i = 0; i < cr.candidates.size(); ++i) {
                const auto& c = cr.candidates[i];
                if (c.j != j || !c.kept) continue;
                const cfb::Assignment pos_w = c.family == "E1" ? arm_world(0) : arm_world(j);
                const cfb::Assignment sub_w = c.family == "E1" ? arm_world(j) : arm_world(0);
                lines.push_back("  " + c.family + " event " + cube_event(pos_w, c.cube) + ":");
                lines.push_back("    compatible with " + cube_list_event(sub_w, c.psi_cover));
                if (branch_of[i] != nullptr) {
                    lines.push_back("    subtracting " +
                                    cube_list_event(sub_w, branch_of[i]->subtract_cubes));
                }
                lines.push_back("    bound: " + render(c.expr));
            }
        }
        lines.push_back("  class bound: " + render(cr.expr));
    }

    lines.push_back("");
    lines.push_back("lower bound: " + render(lb.expr));
    lines.push_back("the upper bound is one minus the lower bounds of the other outcomes, derived the same way");
    return lines;
}

void run_bound(const BoundOpts& o) {
    if (!o.instrument.empty() && !o.subset.empty()) {
        throw UsageError("Choose --instrument or --subset, not both");
    }
    if (o.trace && o.instrument.empty()) {
        throw UsageError("--trace needs --instrument");
    }
    const cfb::Admg g = cfb::load_graph_file(o.graph).to_admg();
    const cfb::SingleWorldEvent sw = parse_target(g, o.target);
    const std::string engine = !o.instrument.empty() ? "instrument"
                               : !o.subset.empty()   ? "subset"
                                                     : "trivial";

    g_active_config = json{{"command", "bound"},   {"graph", o.graph},
                           {"target", cfb::to_string(sw)}, {"engine", engine},
                           {"format", o.format},   {"prune", !o.no_prune}};
    if (!o.instrument.empty()) g_active_config["instrument"] = o.instrument;
    if (!o.subset.empty()) g_active_config["subset"] = o.subset;

    cfb::ExprPtr lower, upper;
    std::optional<cfb::BoundPair> pair;
    cfb::BoundQuery q;
    if (engine == "instrument") {
        q = cfb::BoundQuery{o.instrument, sw.world, sw.outcome};
        pair = cfb::bound_probability(g, q, cfb::BoundOptions{!o.no_prune});
        lower = pair->lower.expr;
        upper = pair->upper.expr;
    } else if (engine == "subset") {
        const std::set<std::string> sub(o.subset.begin(), o.subset.end());
        const cfb::SubsetBounds sb = cfb::subset_bounds(g, sw.world, sw.outcome, sub);
        lower = sb.lower;
        upper = sb.upper;
    } else {
        const cfb::TrivialBounds tb = cfb::trivial_bounds(g, sw.world, sw.outcome);
        lower = tb.lower;
        upper = tb.upper;
    }

    const Renderer render = make_renderer(g, o.format == "json" ? "text" : o.format);
    std::vector<std::string> trace_lines;
    if (o.trace) trace_lines = bound_trace(g, q, pair->lower, render);

    if (o.format == "json") {
        json j;
        j["manifest"] = make_manifest({{"graph", o.graph}}, std::nullopt);
        j["lower"] = json{{"text", cfb::to_text(g, lower)}, {"latex", cfb::to_latex(g, lower)}};
        j["upper"] = json{{"text", cfb::to_text(g, upper)}, {"latex", cfb::to_latex(g, upper)}};
        if (o.trace) j["trace"] = trace_lines;
        deliver(o.out, j.dump(2) + "\n");
        return;
    }

    std::ostringstream t;
    t << "bounds on P(" << cfb::to_string(sw) << ") from " << o.graph;
    if (engine == "instrument") t << " (instrument " << o.instrument << ")";
    if (engine == "subset") {
        t << " (intervening on";
        for (const auto& s : o.subset) t << " " << s;
        t << ")";
    }
    if (engine == "trivial") t << " (no assumptions)";
    t << "\n\n";
    t << "lower: " << render(lower) << "\n";
    t << "upper: " << render(upper) << "\n";
    if (o.trace) {
        t << "\nderivation:\n";
        for (const auto& line : trace_lines) t << line << "\n";
    }
    deliver(o.out, t.str());
}

// ---------------------------------------------------------------------------
// constraints: inequality constraints on one observed law.

struct ConstraintsOpts {
    std::string graph;
    std::vector<std::string> instruments;
    std::vector<std::string> treatments;
    std::vector<std::string> outcomes;
    std::size_t max_size = 0;
    std::string check;
    double tolerance = 0.0;
    std::string format = "text";
    std::string out;
};

std::string triple_text(const cfb::Triple& t) {
    return assignment_text(t.z) + " : " + assignment_text(t.a) + ", " + assignment_text(t.y);
}

void run_constraints(const ConstraintsOpts& o) {
    g_active_config = json{{"command", "constraints"}, {"graph", o.graph},
                           {"instruments", o.instruments}, {"treatments", o.treatments},
                           {"outcomes", o.outcomes},   {"max_size", o.max_size},
                           {"tolerance", o.tolerance}, {"format", o.format}};
    if (!o.check.empty()) g_active_config["check"] = o.check;

    const cfb::Admg g = cfb::load_graph_file(o.graph).to_admg();
    const std::set<std::string> zs(o.instruments.begin(), o.instruments.end());
    const std::set<std::string> as(o.treatments.begin(), o.treatments.end());
    const std::set<std::string> ys(o.outcomes.begin(), o.outcomes.end());

    const cfb::ConstraintSet cs = cfb::generate_constraints(g, zs, as, ys, o.max_size);
    std::vector<cfb::FamilyConstraint> fams;
    std::string family_note;
    try {
        fams = cfb::family_constraints(g, zs, as, ys);
    } catch (const std::invalid_argument& e) {
        family_note = e.what();
    }

    std::optional<cfb::NumericDistribution> dist;
    std::optional<cfb::ViolationReport<double>> report;
    struct FamCheck {
        std::optional<double> value;
        std::string undefined;
        bool violated = false;
    };
    std::vector<FamCheck> fam_checks;
    if (!o.check.empty()) {
        dist = cfb::load_distribution_csv<double>(g.vertices(), o.check);
        report = cfb::check_distribution<double>(g, cs.constraints, *dist, o.tolerance);
        for (const auto& f : fams) {
            const auto r = cfb::evaluate_against<double>(g, *dist, f.lhs);
            FamCheck fc;
            fc.value = r.value;
            fc.undefined = r.undefined;
            fc.violated = r.value && *r.value > f.rhs + o.tolerance;
            fam_checks.push_back(fc);
        }
    }

    if (o.format == "json") {
        json j;
        std::vector<std::pair<std::string, std::string>> inputs{{"graph", o.graph}};
        if (!o.check.empty()) inputs.push_back({"distribution", o.check});
        j["manifest"] = make_manifest(inputs, std::nullopt);
        json carr = json::array();
        for (const auto& c : cs.constraints) {
            json triples = json::array();
            for (const auto& t : c.set.triples) {
                triples.push_back(json{{"z", t.z}, {"a", t.a}, {"y", t.y}});
            }
            carr.push_back(json{{"text", cfb::to_text(g, c.lhs)},
                                {"latex", cfb::to_latex(g, c.lhs)},
                                {"rhs", c.rhs},
                                {"triples", triples}});
        }
        j["constraints"] = carr;
        json farr = json::array();
        for (const auto& f : fams) {
            farr.push_back(json{{"treatment", f.a},
                                {"text", cfb::to_text(g, f.lhs)},
                                {"latex", cfb::to_latex(g, f.lhs)},
                                {"rhs", f.rhs}});
        }
        j["families"] = farr;
        if (!cs.warning.empty()) j["warning"] = cs.warning;
        if (!family_note.empty()) j["family_note"] = family_note;
        if (report) {
            json checks = json::array();
            for (const auto& ch : report->checks) {
                json c;
                c["value"] = ch.value ? json(*ch.value) : json(nullptr);
                c["slack"] = ch.slack ? json(*ch.slack) : json(nullptr);
                c["violated"] = ch.violated;
                if (!ch.undefined.empty()) c["undefined"] = ch.undefined;
                checks.push_back(c);
            }
            json fchecks = json::array();
            for (const auto& fc : fam_checks) {
                json c;
                c["value"] = fc.value ? json(*fc.value) : json(nullptr);
                c["violated"] = fc.violated;
                if (!fc.undefined.empty()) c["undefined"] = fc.undefined;
                fchecks.push_back(c);
            }
            j["check"] = json{{"violations", report->violations},
                              {"checks", checks},
                              {"families", fchecks}};
        }
        deliver(o.out, j.dump(2) + "\n");
        return;
    }

    const Renderer render = make_renderer(g, o.format);
    std::ostringstream t;
    t << "constraints for " << o.graph << ": instrument";
    for (const auto& z : o.instruments) t << " " << z;
    t << ", treatment";
    for (const auto& a : o.treatments) t << " " << a;
    t << ", outcome";
    for (const auto& y : o.outcomes) t << " " << y;
    t << "\n\n";
    t << cs.constraints.size() << " summed constraints; each right side counts how many of the"
      << " listed behaviours one unit can realise\n";
    for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
        const auto& c = cs.constraints[i];
        t << "\n" << (i + 1) << ". " << render(c.lhs) << " <= " << c.rhs << "\n";
        t << "   behaviours:";
        for (const auto& tr : c.set.triples) t << "  [" << triple_text(tr) << "]";
        t << "\n";
    }
    if (!cs.warning.empty()) t << "\nwarning: " << cs.warning << "\n";
    t << "\nfamily constraints (at most one joint outcome per treatment):\n";
    if (!family_note.empty()) {
        t << "  none: " << family_note << "\n";
    }
    for (const auto& f : fams) {
        t << "  [" << assignment_text(f.a) << "] " << render(f.lhs) << " <= " << f.rhs << "\n";
    }
    if (report) {
        std::size_t fam_violated = 0;
        for (const auto& fc : fam_checks) fam_violated += fc.violated ? 1 : 0;
        t << "\ncheck against " << o.check << ": " << report->violations.size() << " of "
          << report->checks.size() << " summed constraints violated, " << fam_violated << " of "
          << fam_checks.size() << " family constraints violated\n";
        for (std::size_t idx : report->violations) {
            const auto& ch = report->checks[idx];
            t << "  #" << (idx + 1) << " value " << *ch.value << " > "
              << ch.constraint.rhs << ": " << render(ch.constraint.lhs) << "\n";
        }
        for (std::size_t i = 0; i < fam_checks.size(); ++i) {
            if (fam_checks[i].violated) {
                t << "  family [" << assignment_text(fams[i].a) << "] value "
                  << *fam_checks[i].value << " > " << fams[i].rhs << "\n";
            }
        }
        std::size_t undefined = 0;
        for (const auto& ch : report->checks) undefined += ch.undefined.empty() ? 0 : 1;
        for (const auto& fc : fam_checks) undefined += fc.undefined.empty() ? 0 : 1;
        if (undefined > 0) t << "  (" << undefined << " constraints undefined on this table)\n";
    }
    deliver(o.out, t.str());
}

// ---------------------------------------------------------------------------
// verify: sample exact models and test every emitted bound against truth.

struct VerifyOpts {
    std::string graph;
    std::string target;
    std::string instrument;
    std::vector<std::string> subset;
    std::size_t samples = 500;
    std::uint64_t seed = 0;
    double beta_alpha = 1.0;
    double dirichlet_alpha = 0.1;
    std::vector<std::string> cardinality;
    std::string format = "text";
    std::string out;
};

void run_verify(const VerifyOpts& o) {
    if (!o.instrument.empty() && !o.subset.empty()) {
        throw UsageError("Choose --instrument or --subset, not both");
    }
    const cfb::Admg g = cfb::load_graph_file(o.graph).to_admg();
    const cfb::SingleWorldEvent sw = parse_target(g, o.target);
    const std::string engine = !o.instrument.empty() ? "instrument"
                               : !o.subset.empty()   ? "subset"
                                                     : "trivial";

    cfb::ScmSamplerConfig cfg;
    cfg.beta_alpha = o.beta_alpha;
    cfg.dirichlet_alpha = o.dirichlet_alpha;
    cfg.cardinality = parse_cardinality(o.cardinality);
    cfg.seed = o.seed;

    g_active_config = json{{"command", "verify"},   {"graph", o.graph},
                           {"target", cfb::to_string(sw)}, {"engine", engine},
                           {"samples", o.samples},  {"beta_alpha", o.beta_alpha},
                           {"dirichlet_alpha", o.dirichlet_alpha},
                           {"cardinality", cfg.cardinality}, {"format", o.format}};
    if (!o.instrument.empty()) g_active_config["instrument"] = o.instrument;
    if (!o.subset.empty()) g_active_config["subset"] = o.subset;

    cfb::VerifyQuery vq;
    vq.world = sw.world;
    vq.outcome = sw.outcome;
    if (!o.instrument.empty()) vq.instrument = o.instrument;
    if (!o.subset.empty()) vq.subset = std::set<std::string>(o.subset.begin(), o.subset.end());

    const cfb::VerifyReport rep = cfb::verify_bounds(g, vq, o.samples, cfg);

    if (o.format == "json") {
        json j;
        j["manifest"] = make_manifest({{"graph", o.graph}}, o.seed);
        j["report"] = json{{"samples", rep.samples},
                           {"contained", rep.contained},
                           {"skipped", rep.skipped},
                           {"order_violations", rep.order_violations},
                           {"min_slack", json_number_or_null(rep.min_slack)},
                           {"mean_slack", json_number_or_null(rep.mean_slack)}};
        j["bounds"] = json{{"lower", cfb::to_text(g, rep.lower)}, {"upper", cfb::to_text(g, rep.upper)}};
        deliver(o.out, j.dump(2) + "\n");
        return;
    }

    std::ostringstream t;
    t << "verify: P(" << cfb::to_string(sw) << ") from " << o.graph;
    if (engine == "instrument") t << " (instrument " << o.instrument << ")";
    if (engine == "subset") {
        t << " (intervening on";
        for (const auto& s : o.subset) t << " " << s;
        t << ")";
    }
    if (engine == "trivial") t << " (assumption-free bounds)";
    t << "\n";
    t << "seed: " << o.seed << "\n";
    t << "samples: " << rep.samples << ", contained: " << rep.contained << ", skipped: "
      << rep.skipped << ", order violations: " << rep.order_violations << "\n";
    t << "min slack: " << (std::isfinite(rep.min_slack) ? fmt_double(rep.min_slack) : "n/a")
      << ", mean slack: " << fmt_double(rep.mean_slack) << "\n";
    t << "lower: " << cfb::to_text(g, rep.lower) << "\n";
    t << "upper: " << cfb::to_text(g, rep.upper) << "\n";
    deliver(o.out, t.str());
}

// ---------------------------------------------------------------------------
// simulate: effect-interval width study over sampled models, written as CSV.

struct SimulateOpts {
    std::string graph;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::string out;
    std::string instrument = "Z";
    std::string treatment = "A";
    std::string outcome = "Y";
    double beta_alpha = 1.0;
    double dirichlet_alpha = 0.1;
    std::vector<std::string> cardinality;
};

void run_simulate(const SimulateOpts& o) {
    cfb::ScmSamplerConfig cfg;
    cfg.beta_alpha = o.beta_alpha;
    cfg.dirichlet_alpha = o.dirichlet_alpha;
    cfg.cardinality = parse_cardinality(o.cardinality);
    cfg.seed = o.seed;

    g_active_config = json{{"command", "simulate"},  {"graph", o.graph},
                           {"n", o.n},               {"instrument", o.instrument},
                           {"treatment", o.treatment}, {"outcome", o.outcome},
                           {"beta_alpha", o.beta_alpha},
                           {"dirichlet_alpha", o.dirichlet_alpha},
                           {"cardinality", cfg.cardinality}, {"out", o.out}};

    const cfb::Admg g = cfb::load_graph_file(o.graph).to_admg();
    const cfb::StudyRoles roles{o.instrument, o.treatment, o.outcome};
    const cfb::StudyResult res = cfb::bound_width_study(g, o.n, cfg, roles);

    std::ostringstream csv;
    csv << "corr,width,excludes_zero\n";
    for (const auto& r : res.rows) {
        csv << fmt_double(r.corr) << "," << fmt_double(r.width) << ","
            << (r.excludes_zero ? 1 : 0) << "\n";
    }
    const std::string path = resolve_out(o.out);
    write_file(path, csv.str());

    json manifest = make_manifest({{"graph", o.graph}}, o.seed);
    manifest["rows"] = res.rows.size();
    write_file(path + ".manifest.json", manifest.dump(2) + "\n");

    std::cout << "wrote " << path << ": " << res.rows.size() << " rows (seed " << o.seed << ")\n";
    std::cout << "mean width " << res.mean_width << ", sd " << res.sd_width
              << ", fraction excluding zero " << res.fraction_excluding << "\n";
}

// ---------------------------------------------------------------------------
// evaluate: numeric bounds for one query against one observed table.

struct EvaluateOpts {
    std::string graph;
    std::string target;
    std::string instrument;
    std::vector<std::string> subset;
    std::string dist;
    std::string format = "text";
    std::string out;
    bool no_prune = false;
};

void run_evaluate(const EvaluateOpts& o) {
    if (!o.instrument.empty() && !o.subset.empty()) {
        throw UsageError("Choose --instrument or --subset, not both");
    }
    const cfb::Admg g = cfb::load_graph_file(o.graph).to_admg();
    const cfb::SingleWorldEvent sw = parse_target(g, o.target);
    const std::string engine = !o.instrument.empty() ? "instrument"
                               : !o.subset.empty()   ? "subset"
                                                     : "trivial";

    g_active_config = json{{"command", "evaluate"}, {"graph", o.graph},
                           {"target", cfb::to_string(sw)}, {"engine", engine},
                           {"dist", o.dist},        {"format", o.format},
                           {"prune", !o.no_prune}};
    if (!o.instrument.empty()) g_active_config["instrument"] = o.instrument;
    if (!o.subset.empty()) g_active_config["subset"] = o.subset;

    cfb::ExprPtr lower, upper;
    if (engine == "instrument") {
        const cfb::BoundQuery q{o.instrument, sw.world, sw.outcome};
        const cfb::BoundPair bp = cfb::bound_probability(g, q, cfb::BoundOptions{!o.no_prune});
        lower = bp.lower.expr;
        upper = bp.upper.expr;
    } else if (engine == "subset") {
        const std::set<std::string> sub(o.subset.begin(), o.subset.end());
        const cfb::SubsetBounds sb = cfb::subset_bounds(g, sw.world, sw.outcome, sub);
        lower = sb.lower;
        upper = sb.upper;
    } else {
        const cfb::TrivialBounds tb = cfb::trivial_bounds(g, sw.world, sw.outcome);
        lower = tb.lower;
        upper = tb.upper;
    }

    const cfb::NumericDistribution dist = cfb::load_distribution_csv<double>(g.vertices(), o.dist);
    const auto lo = cfb::evaluate_against<double>(g, dist, lower);
    const auto hi = cfb::evaluate_against<double>(g, dist, upper);

    if (o.format == "json") {
        json j;
        j["manifest"] = make_manifest({{"graph", o.graph}, {"distribution", o.dist}}, std::nullopt);
        json jl{{"expression", cfb::to_text(g, lower)}};
        jl["value"] = lo.value ? json(*lo.value) : json(nullptr);
        if (!lo.undefined.empty()) jl["undefined"] = lo.undefined;
        json ju{{"expression", cfb::to_text(g, upper)}};
        ju["value"] = hi.value ? json(*hi.value) : json(nullptr);
        if (!hi.undefined.empty()) ju["undefined"] = hi.undefined;
        j["lower"] = jl;
        j["upper"] = ju;
        deliver(o.out, j.dump(2) + "\n");
        return;
    }

    const Renderer render = make_renderer(g, o.format);
    std::ostringstream t;
    t << "P(" << cfb::to_string(sw) << ") evaluated against " << o.dist << "\n";
    if (lo.value && hi.value) {
        t << "interval: [" << *lo.value << ", " << *hi.value << "]\n";
    }
    if (lo.value) {
        t << "lower = " << *lo.value << "   [" << render(lower) << "]\n";
    } else {
        t << "lower undefined: zero-probability conditioning in " << lo.undefined << "\n";
    }
    if (hi.value) {
        t << "upper = " << *hi.value << "   [" << render(upper) << "]\n";
    } else {
        t << "upper undefined: zero-probability conditioning in " << hi.undefined << "\n";
    }
    deliver(o.out, t.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic bounds and constraints for counterfactuals in hidden-variable causal models"};
    app.set_version_flag("--version", std::string("cfbounds ") + kVersion);
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("--verbose", verbose, "print the active configuration when a command fails");

    const std::string fmt_help = "output format";
    const auto tl_formats = CLI::IsMember({"text", "latex", "json"});
    const auto tj_formats = CLI::IsMember({"text", "json"});

    ProjectOpts po;
    CLI::App* project = app.add_subcommand("project", "print the latent projection of a graph file");
    project->add_option("--graph", po.graph, "graph file")->required();
    project->add_option("--format", po.format, fmt_help)->check(tj_formats);
    project->add_option("--out", po.out, "write output to this file");

    BoundOpts bo;
    CLI::App* bound = app.add_subcommand("bound", "symbolic bounds on a counterfactual probability");
    bound->add_option("--graph", bo.graph, "graph file")->required();
    bound->add_option("--target", bo.target, "single-world event, e.g. \"Y(A=1)=1\"")->required();
    bound->add_option("--instrument", bo.instrument, "instrument variable");
    bound->add_option("--subset", bo.subset, "identifiable treatment subset to intervene on");
    bound->add_flag("--trace", bo.trace, "print the full derivation (needs --instrument)");
    bound->add_flag("--no-prune", bo.no_prune, "keep dominated and redundant branches");
    bound->add_option("--format", bo.format, fmt_help)->check(tl_formats);
    bound->add_option("--out", bo.out, "write output to this file");

    ConstraintsOpts co;
    CLI::App* constraints = app.add_subcommand("constraints", "inequality constraints on the observed law");
    constraints->add_option("--graph", co.graph, "graph file")->required();
    constraints->add_option("--instrument", co.instruments, "instrument variables")->required();
    constraints->add_option("--treatment", co.treatments, "treatment variables")->required();
    constraints->add_option("--outcome", co.outcomes, "outcome variables")->required();
    constraints->add_option("--max-size", co.max_size, "largest behaviour set to consider");
    constraints->add_option("--check", co.check, "observed table (CSV) to test against");
    constraints->add_option("--tolerance", co.tolerance, "violation tolerance for --check");
    constraints->add_option("--format", co.format, fmt_help)->check(tl_formats);
    constraints->add_option("--out", co.out, "write output to this file");

    VerifyOpts vo;
    CLI::App* verify = app.add_subcommand("verify", "test emitted bounds against exact sampled models");
    verify->add_option("--graph", vo.graph, "graph file")->required();
    verify->add_option("--target", vo.target, "single-world event")->required();
    verify->add_option("--instrument", vo.instrument, "instrument variable");
    verify->add_option("--subset", vo.subset, "identifiable treatment subset");
    verify->add_option("--samples", vo.samples, "number of sampled models");
    verify->add_option("--seed", vo.seed, "sampling seed")->required();
    verify->add_option("--beta-alpha", vo.beta_alpha, "symmetric prior for singleton response laws");
    verify->add_option("--dirichlet-alpha", vo.dirichlet_alpha, "sparsity prior for joint response laws");
    verify->add_option("--cardinality", vo.cardinality,
                       "latent cardinality override, NAME,NAME=COUNT per district");
    verify->add_option("--format", vo.format, fmt_help)->check(tj_formats);
    verify->add_option("--out", vo.out, "write output to this file");

    SimulateOpts so;
    CLI::App* simulate = app.add_subcommand("simulate", "bound width study over sampled models (CSV)");
    simulate->add_option("--graph", so.graph, "graph file")->required();
    simulate->add_option("--n", so.n, "number of sampled models");
    simulate->add_option("--seed", so.seed, "sampling seed")->required();
    simulate->add_option("--out", so.out, "CSV output path")->required();
    simulate->add_option("--instrument", so.instrument, "instrument variable");
    simulate->add_option("--treatment", so.treatment, "treatment variable");
    simulate->add_option("--outcome", so.outcome, "outcome variable");
    simulate->add_option("--beta-alpha", so.beta_alpha, "symmetric prior for singleton response laws");
    simulate->add_option("--dirichlet-alpha", so.dirichlet_alpha, "sparsity prior for joint response laws");
    simulate->add_option("--cardinality", so.cardinality,
                         "latent cardinality override, NAME,NAME=COUNT per district");

    EvaluateOpts eo;
    CLI::App* evaluate = app.add_subcommand("evaluate", "numeric bounds against an observed table");
    evaluate->add_option("--graph", eo.graph, "graph file")->required();
    evaluate->add_option("--target", eo.target, "single-world event")->required();
    evaluate->add_option("--instrument", eo.instrument, "instrument variable");
    evaluate->add_option("--subset", eo.subset, "identifiable treatment subset");
    evaluate->add_option("--dist", eo.dist, "observed table (CSV)")->required();
    evaluate->add_flag("--no-prune", eo.no_prune, "keep dominated and redundant branches");
    evaluate->add_option("--format", eo.format, fmt_help)->check(tl_formats);
    evaluate->add_option("--out", eo.out, "write output to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (project->parsed()) run_project(po);
        if (bound->parsed()) run_bound(bo);
        if (constraints->parsed()) run_constraints(co);
        if (verify->parsed()) run_verify(vo);
        if (simulate->parsed()) run_simulate(so);
        if (evaluate->parsed()) run_evaluate(eo);
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (verbose) {
            std::cerr << "while running: " << g_active_config.dump() << "\n";
        }
        return 1;
    }
}
