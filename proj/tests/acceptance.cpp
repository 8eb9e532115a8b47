// Acceptance gate: the released claims about the engine, each run end to
// end at its stated tolerance. One [PASS]/[FAIL] line per criterion;
// exits nonzero if any criterion fails.

#include <cfbounds/bounds.hpp>
#include <cfbounds/dsl.hpp>
#include <cfbounds/identify.hpp>
#include <cfbounds/inequalities.hpp>
#include <cfbounds/oracle.hpp>
#include <cfbounds/rational.hpp>
#include <cfbounds/rng.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace cfbounds;

namespace {

Admg load(const std::string& name) {
    return load_graph_file(std::string(CFB_DATA_DIR) + "/" + name).to_admg();
}

std::string run_cli(const std::string& args, int* exit_code = nullptr) {
    const std::string cmd = std::string(CFB_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) throw std::runtime_error("Cannot spawn the command line tool");
    std::string out;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    if (exit_code != nullptr) *exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
    void note(const std::string& info) {
        if (!detail.empty()) detail += "; ";
        detail += info;
    }
};

int g_failures = 0;

void run_criterion(int num, const std::string& name, double limit_s,
                   const std::function<void(Outcome&)>& fn) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        fn(out);
    } catch (const std::exception& e) {
        out.fail(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_s > 0 && elapsed >= limit_s) {
        out.fail("took " + std::to_string(elapsed) + "s, limit " + std::to_string(limit_s) + "s");
    }
    if (!out.pass) ++g_failures;
    std::printf("[%s] %d. %s (%.2fs)%s%s\n", out.pass ? "PASS" : "FAIL", num, name.c_str(),
                elapsed, out.detail.empty() ? "" : " - ", out.detail.c_str());
    std::fflush(stdout);
}

std::multiset<std::string> branch_texts(const Admg& g, const LowerBound& lo) {
    std::multiset<std::string> out;
    for (const auto& cls : lo.classes) {
        for (const auto& b : cls.branches) out.insert(to_text(g, b.expr));
    }
    return out;
}

void check_branch_set(Outcome& out, const Admg& g, const LowerBound& lo,
                      const std::string& identified,
                      const std::vector<std::string>& expected) {
    if (to_text(g, lo.identified) != identified) {
        out.fail("identified term is " + to_text(g, lo.identified));
    }
    const std::multiset<std::string> got = branch_texts(g, lo);
    const std::multiset<std::string> want(expected.begin(), expected.end());
    if (got != want) {
        out.fail("branch set mismatch (" + std::to_string(got.size()) + " branches, expected " +
                 std::to_string(want.size()) + ")");
        for (const auto& b : got) {
            if (!want.count(b)) out.note("unexpected: " + b);
        }
        for (const auto& b : want) {
            if (!got.count(b)) out.note("missing: " + b);
        }
    }
    if (to_text(g, lo.expr).find("max{0;") == std::string::npos) {
        out.fail("lower bound lacks the zero branch");
    }
}

// Random single-world or cross-world event over a few variables.
CounterfactualEvent random_event(Rng& rng, const std::vector<Variable>& vars) {
    while (true) {
        SingleWorldEvent e;
        for (const auto& v : vars) {
            const double roll = rng.uniform();
            const std::string val =
                v.domain[static_cast<std::size_t>(rng.uniform() * double(v.domain.size())) %
                         v.domain.size()];
            if (roll < 0.35) {
                e.world.values.insert({v.name, val});
            } else if (roll < 0.75) {
                e.outcome.insert({v.name, val});
            }
        }
        if (e.outcome.empty()) continue;
        CounterfactualEvent ev;
        ev.merge(e);
        return ev;
    }
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double avg = (double(i + 1) + double(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// 1. The classic binary model: emitted lower bound equals the known four
// branch display, and both bounds match an independently coded closed form
// on random model-consistent tables to 1e-9.

void classic_binary_recovery(Outcome& out) {
    const Admg iv = load("iv.cg");
    const BoundQuery q{"Z", Intervention{{{"A", "1"}}}, {{"Y", "1"}}};
    const LowerBound lo = lower_bound(iv, q);
    const UpperBound hi = upper_bound(iv, q);

    check_branch_set(out, iv, lo, "P_{z̄}(a, y)",
                     {"P_{z̄}(ā, ȳ) - P_{z}(ȳ)",
                      "P_{z̄}(ā, y) - (P_{z}(a, ȳ) + P_{z}(ā, y))",
                      "P_{z}(a, y) - P_{z̄}(a, y)"});

    // The command line tool prints the same expression.
    int code = 0;
    const std::string cli = run_cli("bound --graph " + std::string(CFB_DATA_DIR) +
                                    "/iv.cg --target 'Y(A=1)=1' --instrument Z", &code);
    if (code != 0) out.fail("bound command exited with " + std::to_string(code));
    if (cli.find(to_text(iv, lo.expr)) == std::string::npos) {
        out.fail("bound command output does not show the derived lower bound");
    }

    ScmSamplerConfig cfg;
    cfg.seed = 9001;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        Rng rng(detail::stream_seed(cfg.seed, static_cast<std::size_t>(i)));
        const ResponseFunctionScm scm = sample_scm(iv, cfg, rng);
        const NumericDistribution table = observed_joint(scm);
        const auto cond = [&](const std::string& a, const std::string& y, const std::string& z) {
            const auto v = table.conditional({{"A", a}, {"Y", y}}, {{"Z", z}});
            if (!v) throw std::runtime_error("zero-probability arm in a sampled table");
            return *v;
        };
        const double closed_lo =
            cond("1", "1", "0") +
            std::max({0.0,
                      cond("0", "0", "0") - cond("0", "0", "1") - cond("1", "0", "1"),
                      cond("0", "1", "0") - cond("0", "1", "1") - cond("1", "0", "1"),
                      cond("1", "1", "1") - cond("1", "1", "0")});
        const double closed_hi =
            1.0 - (cond("1", "0", "0") +
                   std::max({0.0,
                             cond("0", "1", "0") - cond("0", "1", "1") - cond("1", "1", "1"),
                             cond("0", "0", "0") - cond("0", "0", "1") - cond("1", "1", "1"),
                             cond("1", "0", "1") - cond("1", "0", "0")}));
        const auto got_lo = evaluate_against<double>(iv, table, lo.expr);
        const auto got_hi = evaluate_against<double>(iv, table, hi.expr);
        if (!got_lo.value || !got_hi.value) {
            out.fail("bound evaluation undefined on a sampled table");
            return;
        }
        worst = std::max({worst, std::abs(*got_lo.value - closed_lo),
                          std::abs(*got_hi.value - closed_hi)});
    }
    if (worst > 1e-9) out.fail("closed form deviates by " + std::to_string(worst));
    out.note("200 tables, max closed-form gap " + std::to_string(worst));
}

// ---------------------------------------------------------------------------
// 2. Covariate model: the twelve entry max display (zero plus eleven
// branches) and the printed derivation with its 8 + 3 candidate events.

const std::vector<std::string>& covariate_branches() {
    static const std::vector<std::string> v = {
        "P_{z̄}(a, ȳ) - (P_{z}(ā, y) + P_{z}(a, ȳ))",
        "P_{z̄}(a, y) - P_{z}(y)",
        "P_{z̄}(a, c̄) - (P_{z}(c̄, y) + P_{z}(c̄, a, ȳ))",
        "P_{z̄}(a, c) - (P_{z}(c, y) + P_{z}(c, a, ȳ))",
        "P_{z̄}(a, c̄, ȳ) - (P_{z}(c̄, ā, y) + P_{z}(c̄, a, ȳ))",
        "P_{z̄}(a, c, ȳ) - (P_{z}(c, ā, y) + P_{z}(c, a, ȳ))",
        "P_{z̄}(a, c̄, y) - P_{z}(c̄, y)",
        "P_{z̄}(a, c, y) - P_{z}(c, y)",
        "P_{z}(ā, ȳ) - P_{z̄}(ā, ȳ)",
        "P_{z}(ā, ȳ, c̄) - P_{z̄}(c̄, ā, ȳ)",
        "P_{z}(ā, ȳ, c) - P_{z̄}(c, ā, ȳ)"};
    return v;
}

void covariate_model_recovery(Outcome& out) {
    const Admg cov = load("ivcov.cg");
    const BoundQuery q{"Z", Intervention{{{"A", "0"}}}, {{"Y", "0"}}};
    const LowerBound lo = lower_bound(cov, q);
    check_branch_set(out, cov, lo, "P_{z̄}(ā, ȳ)", covariate_branches());

    int code = 0;
    const std::string trace = run_cli("bound --graph " + std::string(CFB_DATA_DIR) +
                                      "/ivcov.cg --target 'Y(A=0)=0' --instrument Z --trace",
                                      &code);
    if (code != 0) out.fail("trace command exited with " + std::to_string(code));

    const std::vector<std::string> e1 = {
        "A(Z=0)=1 & Y(Z=0)=0",           "A(Z=0)=1 & Y(Z=0)=1",
        "A(Z=0)=1 & C(Z=0)=0",           "A(Z=0)=1 & C(Z=0)=1",
        "A(Z=0)=1 & C(Z=0)=0 & Y(Z=0)=0", "A(Z=0)=1 & C(Z=0)=1 & Y(Z=0)=0",
        "A(Z=0)=1 & C(Z=0)=0 & Y(Z=0)=1", "A(Z=0)=1 & C(Z=0)=1 & Y(Z=0)=1"};
    const std::vector<std::string> e2 = {"A(Z=1)=0 & Y(Z=1)=0",
                                         "A(Z=1)=0 & C(Z=1)=0 & Y(Z=1)=0",
                                         "A(Z=1)=0 & C(Z=1)=1 & Y(Z=1)=0"};

    const auto listed = [&](const std::string& header, const std::vector<std::string>& events) {
        const std::size_t at = trace.find(header);
        if (at == std::string::npos) {
            out.fail("trace lacks header '" + header + "'");
            return;
        }
        for (const auto& e : events) {
            if (trace.find("    " + e + "\n") == std::string::npos) {
                out.fail("trace lacks candidate " + e);
            }
        }
    };
    listed("usable as E1 events:", e1);
    listed("usable as E2 events:", e2);
    if (trace.find("A(Z=0)=1 (E1): subtracts every non-target outcome") == std::string::npos) {
        out.fail("trace lacks the discarded bare candidate");
    }
    for (const auto& b : covariate_branches()) {
        if (trace.find("bound: " + b) == std::string::npos) {
            out.fail("trace lacks the branch " + b);
        }
    }
    out.note("11 branches, 8 + 3 candidates in the printed derivation");
}

// ---------------------------------------------------------------------------
// 3. Mediator model: the twelve entry max display (zero plus eleven).

void mediator_model_recovery(Outcome& out) {
    const Admg fd = load("frontdoor.cg");
    const BoundQuery q{"Z", Intervention{{{"A", "0"}}}, {{"Y", "0"}}};
    const LowerBound lo = lower_bound(fd, q);
    check_branch_set(out, fd, lo, "P_{z̄}(ā, ȳ)",
                     {"P_{z̄}(a, ȳ) - (P_{z}(ā, y) + P_{z}(a, ȳ))",
                      "P_{z̄}(a, y) - P_{z}(y)",
                      "P_{z̄}(a, m̄) - (P_{z}(m̄, y) + P_{z}(ā, m, y) + P_{z}(a, m̄, ȳ))",
                      "P_{z̄}(a, m) - (P_{z}(m, y) + P_{z}(ā, m̄, y) + P_{z}(a, m, ȳ))",
                      "P_{z̄}(a, m̄, y) - (P_{z}(m̄, y) + P_{z}(ā, m, y))",
                      "P_{z̄}(a, m, y) - (P_{z}(m, y) + P_{z}(ā, m̄, y))",
                      "P_{z̄}(a, m, ȳ) - (P_{z}(ā, m̄, y) + P_{z}(a, m, ȳ))",
                      "P_{z̄}(a, m̄, ȳ) - (P_{z}(ā, m, y) + P_{z}(a, m̄, ȳ))",
                      "P_{z}(ā, ȳ) - P_{z̄}(ā, ȳ)",
                      "P_{z}(ā, ȳ, m̄) - P_{z̄}(ā, m̄, ȳ)",
                      "P_{z}(ā, ȳ, m) - P_{z̄}(ā, m, ȳ)"});
    out.note("11 branches beside the zero entry");
}

// ---------------------------------------------------------------------------
// 4. Ternary instrument: the five behaviour cycle constraint with budget 2,
// and the two per-treatment instrumental inequalities.

void ternary_instrument_constraints(Outcome& out) {
    const Admg iv3 = load("iv3.cg");
    const auto cs = generate_constraints(iv3, {"Z"}, {"A"}, {"Y"});
    if (!cs.warning.empty()) out.fail("constraint generation truncated: " + cs.warning);

    const auto t3 = [](const char* z, const char* a, const char* y) {
        return Triple{{{"Z", z}}, {{"A", a}}, {{"Y", y}}};
    };
    const std::vector<Triple> cycle = {t3("1", "0", "1"), t3("2", "0", "0"), t3("0", "0", "1"),
                                       t3("1", "1", "1"), t3("0", "1", "0")};
    const auto key = [](const Triple& t) {
        return t.z.at("Z") + "|" + t.a.at("A") + "|" + t.y.at("Y");
    };
    std::multiset<std::string> want;
    for (const auto& t : cycle) want.insert(key(t));

    const Constraint* found = nullptr;
    for (const auto& c : cs.constraints) {
        std::multiset<std::string> got;
        for (const auto& t : c.set.triples) got.insert(key(t));
        if (got == want) {
            found = &c;
            break;
        }
    }
    if (found == nullptr) {
        out.fail("the five behaviour cycle constraint is missing");
    } else if (found->rhs != 2) {
        out.fail("cycle constraint budget is " + std::to_string(found->rhs));
    }

    int code = 0;
    const std::string cli = run_cli("constraints --graph " + std::string(CFB_DATA_DIR) +
                                    "/iv3.cg --instrument Z --treatment A --outcome Y --format json",
                                    &code);
    if (code != 0) out.fail("constraints command exited with " + std::to_string(code));
    if (found != nullptr && cli.find(to_text(iv3, found->lhs)) == std::string::npos) {
        out.fail("constraints command output lacks the cycle constraint");
    }

    const auto families = family_constraints(iv3, {"Z"}, {"A"}, {"Y"});
    if (families.size() != 2) {
        out.fail("expected 2 per-treatment inequalities, got " + std::to_string(families.size()));
    }
    for (const auto& f : families) {
        if (f.rhs != 1) out.fail("per-treatment inequality budget is " + std::to_string(f.rhs));
        const std::string text = to_text(iv3, f.lhs);
        std::size_t maxes = 0;
        for (std::size_t at = text.find("max{"); at != std::string::npos;
             at = text.find("max{", at + 1)) {
            ++maxes;
        }
        if (maxes != 2) out.fail("per-treatment inequality is not a sum of two maxima");
        if (text.find("P_{Z=2}") == std::string::npos) {
            out.fail("per-treatment inequality does not span all three arms");
        }
    }
    out.note(std::to_string(cs.constraints.size()) + " summed constraints, cycle budget 2, " +
             "2 per-treatment inequalities");
}

// ---------------------------------------------------------------------------
// 5. Two sequential treatments: stored tables reproduce the published
// intervals exactly.

void subset_interval_recovery(Outcome& out) {
    const Admg twostage = load("twostage.cg");
    using ExactDist = DiscreteDistribution<Rational>;
    const ExactDist s1 = load_distribution_csv<Rational>(
        twostage.vertices(), std::string(CFB_DATA_DIR) + "/twostage_table1.csv");
    const ExactDist s2 = load_distribution_csv<Rational>(
        twostage.vertices(), std::string(CFB_DATA_DIR) + "/twostage_table2.csv");

    const Intervention world{{{"A1", "1"}, {"A2", "1"}}};
    const Assignment outcome{{"Y", "1"}};

    const auto eval = [&](const ExactDist& d, const ExprPtr& e) {
        const auto r = evaluate_against<Rational>(twostage, d, e);
        if (!r.value) throw std::runtime_error("undefined evaluation on a stored table");
        return *r.value;
    };

    const TrivialBounds tb = trivial_bounds(twostage, world, outcome);
    if (eval(s1, tb.lower) != Rational(1, 100) || eval(s1, tb.upper) != Rational(23, 25)) {
        out.fail("assumption-free interval on the first table is not [.01, .92]");
    }

    const SubsetBounds sb = subset_bounds(twostage, world, outcome, {"A2"});
    if (eval(s1, sb.lower) != Rational(1, 10) || eval(s1, sb.upper) != Rational(1, 5)) {
        out.fail("subset interval on the first table is not [.1, .2]");
    }
    if (eval(s2, sb.lower) != Rational(1, 50) || eval(s2, sb.upper) != Rational(21, 25)) {
        out.fail("subset interval on the second table is not [.02, .84]");
    }
    out.note("[.01, .92], [.1, .2], [.02, .84] all exact");
}

// ---------------------------------------------------------------------------
// 6. Oracle sweep: 500 sampled models per graph; every emitted bound
// contains the exact truth, lower never exceeds upper, and no generated
// constraint is violated by any sampled observational law.

void oracle_bound_verification(Outcome& out) {
    struct ModelRun {
        std::string file;
        VerifyQuery query;
        bool constraints;
    };
    const std::vector<ModelRun> runs = {
        {"iv.cg", {Intervention{{{"A", "1"}}}, {{"Y", "1"}}, "Z", std::nullopt}, true},
        {"seq.cg",
         {Intervention{{{"A1", "1"}, {"A2", "1"}}}, {{"Y2", "1"}}, std::nullopt,
          std::set<std::string>{"A2"}},
         false},
        {"ivcov.cg", {Intervention{{{"A", "1"}}}, {{"Y", "1"}}, "Z", std::nullopt}, true},
        {"frontdoor.cg", {Intervention{{{"A", "1"}}}, {{"Y", "1"}}, "Z", std::nullopt}, true},
    };

    const std::size_t n = 500;
    std::size_t contained = 0, skipped = 0, tables = 0, checks = 0, violations = 0;
    std::uint64_t seed = 1001;
    for (const auto& run : runs) {
        const Admg g = load(run.file);
        ScmSamplerConfig cfg;
        cfg.seed = seed++;
        const VerifyReport rep = verify_bounds(g, run.query, n, cfg);
        if (rep.order_violations != 0) {
            out.fail(run.file + ": lower exceeded upper " +
                     std::to_string(rep.order_violations) + " times");
        }
        if (rep.contained + rep.skipped != rep.samples) {
            out.fail(run.file + ": " + std::to_string(rep.samples - rep.contained - rep.skipped) +
                     " of " + std::to_string(rep.samples) + " truths escaped the bounds");
        }
        if (rep.min_slack < -1e-9) {
            out.fail(run.file + ": negative slack " + std::to_string(rep.min_slack));
        }
        contained += rep.contained;
        skipped += rep.skipped;

        if (!run.constraints) continue;
        const auto cs = generate_constraints(g, {"Z"}, {"A"}, {"Y"});
        const auto fams = family_constraints(g, {"Z"}, {"A"}, {"Y"});
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng(detail::stream_seed(cfg.seed, i));
            const ResponseFunctionScm scm = sample_scm(g, cfg, rng);
            const NumericDistribution table = observed_joint(scm);
            const auto rep2 = check_distribution<double>(g, cs.constraints, table, 1e-9);
            checks += rep2.checks.size();
            violations += rep2.violations.size();
            for (const auto& f : fams) {
                ++checks;
                const auto v = evaluate_against<double>(g, table, f.lhs);
                if (v.value && *v.value > double(f.rhs) + 1e-9) ++violations;
            }
            ++tables;
        }
    }
    if (violations != 0) {
        out.fail(std::to_string(violations) + " constraint violations on sampled laws");
    }
    out.note(std::to_string(contained) + " of " + std::to_string(4 * n) +
             " truths contained, " + std::to_string(skipped) + " skipped; " +
             std::to_string(checks) + " constraint checks on " + std::to_string(tables) +
             " sampled laws, 0 violations");
}

// ---------------------------------------------------------------------------
// 7. Exact model identities: the target partition sums to the target mass,
// contradictory event pairs carry zero joint mass, and summed behaviour
// probabilities respect their clique budget.

void exact_model_identities(Outcome& out) {
    struct PartRun {
        std::string file;
        BoundQuery query;
    };
    const std::vector<PartRun> part_runs = {
        {"iv.cg", {"Z", Intervention{{{"A", "1"}}}, {{"Y", "1"}}}},
        {"iv3.cg", {"Z", Intervention{{{"A", "1"}}}, {{"Y", "1"}}}},
        {"ivcov.cg", {"Z", Intervention{{{"A", "0"}}}, {{"Y", "0"}}}},
        {"frontdoor.cg", {"Z", Intervention{{{"A", "0"}}}, {{"Y", "0"}}}},
    };
    double worst_gap = 0.0;
    for (const auto& run : part_runs) {
        const Admg g = load(run.file);
        const Partition part = partition_events(g, run.query);
        ScmSamplerConfig cfg;
        cfg.seed = 2100 + static_cast<std::uint64_t>(&run - part_runs.data());
        for (std::size_t i = 0; i < 100; ++i) {
            Rng rng(detail::stream_seed(cfg.seed, i));
            const ResponseFunctionScm scm = sample_scm(g, cfg, rng);
            double sum = counterfactual_prob(scm, part.identified);
            for (const auto& cls : part.classes) sum += counterfactual_prob(scm, cls.second);
            const double target = counterfactual_prob(scm, part.target);
            worst_gap = std::max(worst_gap, std::abs(sum - target));
        }
    }
    if (worst_gap > 1e-9) out.fail("partition mass gap " + std::to_string(worst_gap));

    std::size_t contradictory = 0;
    double worst_mass = 0.0;
    for (const auto& file : {"iv.cg", "seq.cg", "ivcov.cg", "frontdoor.cg"}) {
        const Admg g = load(file);
        ScmSamplerConfig cfg;
        cfg.seed = 2200;
        Rng event_rng(515 + std::string(file).size());
        for (std::size_t i = 0; i < 100; ++i) {
            Rng rng(detail::stream_seed(cfg.seed, i));
            const ResponseFunctionScm scm = sample_scm(g, cfg, rng);
            for (int pair = 0; pair < 3; ++pair) {
                const CounterfactualEvent first = random_event(event_rng, g.vertices());
                const CounterfactualEvent second = random_event(event_rng, g.vertices());
                if (!contradicts(g, first, second)) continue;
                ++contradictory;
                CounterfactualEvent joint = first;
                for (const auto& c : second.conjuncts()) joint.merge(c);
                worst_mass = std::max(worst_mass, counterfactual_prob(scm, joint));
            }
        }
    }
    if (worst_mass > 1e-12) {
        out.fail("a contradictory pair carries mass " + std::to_string(worst_mass));
    }
    if (contradictory < 20) {
        out.fail("only " + std::to_string(contradictory) + " contradictory pairs sampled");
    }

    std::size_t budget_checks = 0;
    double worst_excess = 0.0;
    for (const auto& file : {"iv.cg", "iv3.cg", "frontdoor.cg"}) {
        const Admg g = load(file);
        std::vector<Variable> zv, av, yv;
        for (const auto& v : g.vertices()) {
            if (v.name == "Z") zv.push_back(v);
            if (v.name == "A") av.push_back(v);
            if (v.name == "Y") yv.push_back(v);
        }
        std::vector<Triple> ground;
        for (const auto& z : enumerate_outcomes(OutcomeSpace{zv})) {
            for (const auto& a : enumerate_outcomes(OutcomeSpace{av})) {
                for (const auto& y : enumerate_outcomes(OutcomeSpace{yv})) {
                    ground.push_back({z, a, y});
                }
            }
        }
        ScmSamplerConfig cfg;
        cfg.seed = 2300;
        Rng pick_rng(99 + ground.size());
        for (std::size_t i = 0; i < 100; ++i) {
            Rng rng(detail::stream_seed(cfg.seed, i));
            const ResponseFunctionScm scm = sample_scm(g, cfg, rng);
            TripleSet set;
            const std::size_t k =
                2 + static_cast<std::size_t>(pick_rng.uniform() * 4.0) % 4;
            std::set<std::size_t> chosen;
            while (chosen.size() < std::min(k, ground.size())) {
                chosen.insert(static_cast<std::size_t>(pick_rng.uniform() * double(ground.size())) %
                              ground.size());
            }
            for (const std::size_t c : chosen) set.triples.push_back(ground[c]);
            const Constraint con = make_constraint(g, set);
            double sum = 0.0;
            for (const auto& t : con.set.triples) {
                Assignment o = t.a;
                for (const auto& [var, val] : t.y) o.insert({var, val});
                sum += counterfactual_prob(scm, SingleWorldEvent{Intervention{t.z}, o});
            }
            ++budget_checks;
            worst_excess = std::max(worst_excess, sum - double(con.rhs));
        }
    }
    if (worst_excess > 1e-9) {
        out.fail("a behaviour sum exceeds its budget by " + std::to_string(worst_excess));
    }
    out.note("partition gap " + std::to_string(worst_gap) + ", " +
             std::to_string(contradictory) + " contradictory pairs at zero mass, " +
             std::to_string(budget_checks) + " budget sums respected");
}

// ---------------------------------------------------------------------------
// 8. Width study on the covariate model: tighter instruments give tighter
// intervals. The rank correlation is the gate; the location numbers are
// configuration-sensitive and reported for documentation only.

void width_study(Outcome& out) {
    const Admg cov = load("ivcov.cg");
    ScmSamplerConfig cfg;
    cfg.beta_alpha = 1.0;
    cfg.dirichlet_alpha = 0.1;
    cfg.cardinality = {{"A,Y", 16}};
    cfg.seed = 20240817;
    const StudyResult res = bound_width_study(cov, 1000, cfg, StudyRoles{"Z", "A", "Y"});
    if (res.rows.size() < 990) {
        out.fail("only " + std::to_string(res.rows.size()) + " of 1000 rows defined");
    }

    const std::string csv_path = std::string(CFB_OUT_DIR) + "/acceptance_study.csv";
    {
        std::ofstream csv(csv_path);
        csv << "corr,width,excludes_zero\n";
        for (const auto& r : res.rows) {
            char line[96];
            std::snprintf(line, sizeof(line), "%.17g,%.17g,%d\n", r.corr, r.width,
                          r.excludes_zero ? 1 : 0);
            csv << line;
        }
    }

    std::vector<double> strength, width;
    for (const auto& r : res.rows) {
        strength.push_back(std::abs(r.corr));
        width.push_back(r.width);
    }
    const double rho = pearson(average_ranks(strength), average_ranks(width));
    if (!(rho < -0.2)) {
        out.fail("rank correlation between instrument strength and width is " +
                 std::to_string(rho));
    }
    char info[192];
    std::snprintf(info, sizeof(info),
                  "rho %.3f; mean width %.3f (documented 0.77+-0.15), sd %.3f, excluding zero "
                  "%.1f%% (documented 1%%-10%%), not gated",
                  rho, res.mean_width, res.sd_width, 100.0 * res.fraction_excluding);
    out.note(info);
    out.note("rows written to " + csv_path);
}

// ---------------------------------------------------------------------------
// 9. Pruning only discards branches that never win: with and without
// pruning the lower bound evaluates identically on random tables.

void pruning_invariance(Outcome& out) {
    struct PruneRun {
        std::string file;
        BoundQuery query;
    };
    const std::vector<PruneRun> runs = {
        {"iv.cg", {"Z", Intervention{{{"A", "1"}}}, {{"Y", "1"}}}},
        {"iv3.cg", {"Z", Intervention{{{"A", "1"}}}, {{"Y", "1"}}}},
        {"ivcov.cg", {"Z", Intervention{{{"A", "0"}}}, {{"Y", "0"}}}},
        {"frontdoor.cg", {"Z", Intervention{{{"A", "0"}}}, {{"Y", "0"}}}},
    };
    double worst = 0.0;
    std::size_t pruned_away = 0, kept = 0;
    for (const auto& run : runs) {
        const Admg g = load(run.file);
        const LowerBound with = lower_bound(g, run.query, BoundOptions{true});
        const LowerBound without = lower_bound(g, run.query, BoundOptions{false});
        for (const auto& cls : with.classes) kept += cls.branches.size();
        for (std::size_t i = 0; i < without.classes.size(); ++i) {
            pruned_away += without.classes[i].branches.size();
        }
        std::size_t cells = 1;
        for (const auto& v : g.vertices()) cells *= v.domain.size();
        Rng rng(424200 + cells);
        for (int t = 0; t < 200; ++t) {
            const NumericDistribution table(g.vertices(), rng.dirichlet(1.0, cells));
            const auto a = evaluate_against<double>(g, table, with.expr);
            const auto b = evaluate_against<double>(g, table, without.expr);
            if (!a.value || !b.value) {
                out.fail(run.file + ": undefined evaluation on a random table");
                return;
            }
            worst = std::max(worst, std::abs(*a.value - *b.value));
        }
    }
    if (worst > 1e-12) out.fail("pruned and unpruned bounds differ by " + std::to_string(worst));
    pruned_away -= std::min(pruned_away, kept);
    out.note("800 tables, max difference " + std::to_string(worst) + ", " +
             std::to_string(pruned_away) + " extra branches without pruning");
}

}  // namespace

int main() {
    std::printf("acceptance: symbolic bounds engine\n");
    run_criterion(1, "classic binary model recovery", 1.0, classic_binary_recovery);
    run_criterion(2, "covariate model recovery and derivation trace", 5.0, covariate_model_recovery);
    run_criterion(3, "mediator model recovery", 5.0, mediator_model_recovery);
    run_criterion(4, "ternary instrument constraints", 0.0, ternary_instrument_constraints);
    run_criterion(5, "stored table interval recovery", 0.0, subset_interval_recovery);
    run_criterion(6, "oracle bound and constraint verification", 120.0, oracle_bound_verification);
    run_criterion(7, "exact model identities", 0.0, exact_model_identities);
    run_criterion(8, "instrument strength width study", 0.0, width_study);
    run_criterion(9, "pruning invariance", 0.0, pruning_invariance);
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
