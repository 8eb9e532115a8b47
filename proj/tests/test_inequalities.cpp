#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "cfbounds/dsl.hpp"
#include "cfbounds/inequalities.hpp"
#include "cfbounds/rng.hpp"

using namespace cfbounds;
using Catch::Matchers::ContainsSubstring;

namespace {

Admg load(const std::string& name) {
    return load_graph_file(std::string(CFB_DATA_DIR) + "/" + name).to_admg();
}

Triple t3(const std::string& z, const std::string& a, const std::string& y) {
    return {{{"Z", z}}, {{"A", a}}, {{"Y", y}}};
}

Triple tfd(const std::string& z, const std::string& a, const std::string& m, const std::string& y) {
    return {{{"Z", z}}, {{"A", a}}, {{"M", m}, {"Y", y}}};
}

std::string triple_key(const Triple& t) {
    std::string key;
    for (const auto* part : {&t.z, &t.a, &t.y}) {
        for (const auto& [var, val] : *part) key += var + "=" + val + ";";
        key += "|";
    }
    return key;
}

std::set<std::string> set_key(const std::vector<Triple>& ts) {
    std::set<std::string> keys;
    for (const auto& t : ts) keys.insert(triple_key(t));
    return keys;
}

const Constraint* find_constraint(const ConstraintSet& cs, const std::vector<Triple>& want) {
    const auto key = set_key(want);
    for (const auto& c : cs.constraints) {
        if (set_key(c.set.triples) == key) return &c;
    }
    return nullptr;
}

int brute_phi(const Admg& g, const std::vector<Triple>& ts) {
    std::vector<SingleWorldEvent> events;
    for (const auto& t : ts) {
        Assignment outcome = t.a;
        for (const auto& [var, val] : t.y) outcome.insert({var, val});
        events.push_back({Intervention{t.z}, outcome});
    }
    ContradictionCache cache;
    int best = 0;
    for (std::size_t m = 0; m < (std::size_t(1) << events.size()); ++m) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < events.size(); ++i) {
            if ((m >> i) & 1) members.push_back(i);
        }
        bool ok = true;
        for (std::size_t i = 0; i < members.size() && ok; ++i) {
            for (std::size_t j = i + 1; j < members.size() && ok; ++j) {
                ok = !contradicts(g, events[members[i]], events[members[j]], &cache);
            }
        }
        if (ok) best = std::max(best, static_cast<int>(members.size()));
    }
    return best;
}

std::vector<Triple> bonet_triples() {
    return {t3("1", "0", "1"), t3("2", "0", "0"), t3("0", "0", "1"), t3("1", "1", "1"), t3("0", "1", "0")};
}

const Admg& iv() {
    static const Admg g = load("iv.cg");
    return g;
}

const Admg& iv3() {
    static const Admg g = load("iv3.cg");
    return g;
}

const Admg& frontdoor() {
    static const Admg g = load("frontdoor.cg");
    return g;
}

}  // namespace

TEST_CASE("compatibility follows the event contradiction rules") {
    TripleSet all;
    for (const auto& z : {"0", "1", "2"}) {
        for (const auto& a : {"0", "1"}) {
            for (const auto& y : {"0", "1"}) all.triples.push_back(t3(z, a, y));
        }
    }
    const auto ctx = detail::triple_context(iv3(), all);
    REQUIRE(ctx.triples.size() == 12);
    const auto adj = detail::compatibility(iv3(), ctx.events, nullptr);
    for (std::size_t i = 0; i < ctx.triples.size(); ++i) {
        for (std::size_t j = i + 1; j < ctx.triples.size(); ++j) {
            const auto& s = ctx.triples[i];
            const auto& t = ctx.triples[j];
            const bool want = s.z == t.z ? false : (s.a != t.a || s.y == t.y);
            INFO(triple_key(s) << " vs " << triple_key(t));
            CHECK(adj[i][j] == want);
        }
    }

    // With a joint outcome the arm-by-arm value comparison is not enough:
    // these two share the mediator value, so the outcomes must agree.
    TripleSet witness{{tfd("0", "1", "1", "1"), tfd("1", "0", "1", "0")}};
    CHECK(phi(frontdoor(), witness) == 1);
}

TEST_CASE("phi counts the largest simultaneously realisable subset") {
    CHECK(phi(iv(), {{t3("0", "1", "1")}}) == 1);
    CHECK(phi(iv(), {{t3("0", "1", "1"), t3("0", "1", "1")}}) == 1);
    CHECK(phi(iv(), {{t3("0", "1", "1"), t3("1", "1", "1")}}) == 2);
    CHECK(phi(iv(), {{t3("0", "1", "1"), t3("1", "1", "0")}}) == 1);
    CHECK(phi(iv(), {{t3("0", "1", "1"), t3("0", "0", "1")}}) == 1);

    // One behaviour per outcome value at freely chosen arms: never more than
    // one can be realised.
    CHECK(phi(iv(), {{t3("0", "1", "0"), t3("1", "1", "1")}}) == 1);
    CHECK(phi(iv(), {{t3("1", "1", "0"), t3("1", "1", "1")}}) == 1);

    const TripleSet bonet{bonet_triples()};
    CHECK(phi(iv3(), bonet) == 2);

    // The five behaviours form a cycle of contradictions; dropping any one
    // still leaves two realisable at once.
    const std::set<std::pair<std::size_t, std::size_t>> conflicting = {
        {0, 1}, {0, 3}, {1, 2}, {2, 4}, {3, 4}};
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) {
            TripleSet pair{{bonet.triples[i], bonet.triples[j]}};
            CHECK(phi(iv3(), pair) == (conflicting.count({i, j}) ? 1 : 2));
        }
    }
    for (std::size_t skip = 0; skip < 5; ++skip) {
        TripleSet rest;
        for (std::size_t i = 0; i < 5; ++i) {
            if (i != skip) rest.triples.push_back(bonet.triples[i]);
        }
        CHECK(phi(iv3(), rest) == 2);
    }
}

TEST_CASE("phi matches exhaustive subset search") {
    Rng rng(20240517);
    const auto pick = [&](const std::vector<Triple>& ground, std::size_t count) {
        std::vector<std::size_t> idx(ground.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = idx.size(); i-- > 1;) {
            std::swap(idx[i], idx[rng.next_u64() % (i + 1)]);
        }
        std::vector<Triple> out;
        for (std::size_t i = 0; i < count; ++i) out.push_back(ground[idx[i]]);
        return out;
    };

    std::vector<Triple> ground3;
    for (const auto& z : {"0", "1", "2"}) {
        for (const auto& a : {"0", "1"}) {
            for (const auto& y : {"0", "1"}) ground3.push_back(t3(z, a, y));
        }
    }
    for (int round = 0; round < 150; ++round) {
        const auto subset = pick(ground3, 1 + rng.next_u64() % 10);
        const int exact = phi(iv3(), {subset});
        CHECK(exact == brute_phi(iv3(), subset));
        CHECK(exact <= static_cast<int>(subset.size()));
        if (subset.size() > 1) {
            auto smaller = subset;
            smaller.erase(smaller.begin() + static_cast<long>(rng.next_u64() % smaller.size()));
            CHECK(phi(iv3(), {smaller}) <= exact);
        }
    }

    std::vector<Triple> ground_fd;
    for (const auto& z : {"0", "1"}) {
        for (const auto& a : {"0", "1"}) {
            for (const auto& m : {"0", "1"}) {
                for (const auto& y : {"0", "1"}) ground_fd.push_back(tfd(z, a, m, y));
            }
        }
    }
    for (int round = 0; round < 80; ++round) {
        const auto subset = pick(ground_fd, 1 + rng.next_u64() % 9);
        CHECK(phi(frontdoor(), {subset}) == brute_phi(frontdoor(), subset));
    }
}

TEST_CASE("constraints pair identified sums with clique bounds") {
    const auto bonet = make_constraint(iv3(), {bonet_triples()});
    CHECK(bonet.rhs == 2);
    REQUIRE(bonet.set.triples.size() == 5);
    CHECK(to_text(iv3(), bonet.lhs) ==
          "P_{Z=1}(ā, y) + P_{Z=2}(ā, ȳ) + P_{Z=0}(ā, y) + P_{Z=1}(a, y) + "
          "P_{Z=0}(a, ȳ)");

    const auto member = make_constraint(iv(), {{t3("0", "1", "1"), t3("1", "1", "0")}});
    CHECK(member.rhs == 1);
    CHECK(to_text(iv(), member.lhs) == "P_{z̄}(a, y) + P_{z}(a, ȳ)");

    const auto vacuous = make_constraint(iv(), {{t3("0", "1", "1"), t3("1", "1", "1")}});
    CHECK(vacuous.rhs == 2);

    CHECK_THROWS_WITH(make_constraint(iv(), TripleSet{}), ContainsSubstring("at least one triple"));
    CHECK_THROWS_WITH(make_constraint(iv(), {{t3("0", "1", "1"), tfd("1", "1", "1", "1")}}),
                      ContainsSubstring("same variables"));
    const Triple twice{{{"Z", "0"}}, {{"A", "1"}}, {{"A", "1"}}};
    CHECK_THROWS_WITH(make_constraint(iv(), {{twice}}), ContainsSubstring("more than one"));
    const Triple out_of_domain{{{"Z", "0"}}, {{"A", "2"}}, {{"Y", "1"}}};
    CHECK_THROWS_WITH(make_constraint(iv(), {{out_of_domain}}), ContainsSubstring("'2'"));
    const Triple unknown{{{"W", "0"}}, {{"A", "1"}}, {{"Y", "1"}}};
    CHECK_THROWS_WITH(make_constraint(iv(), {{unknown}}), ContainsSubstring("'W'"));

    const auto direct =
        parse_graph("node Z;\nnode A;\nnode Y;\nZ -> A;\nZ -> Y;\nA -> Y;\nA <-> Y;").to_admg();
    CHECK_THROWS_WITH(make_constraint(direct, {{t3("0", "1", "1")}}),
                      ContainsSubstring("affects the outcome"));

    const auto confounded =
        parse_graph("node Z;\nnode A;\nnode Y;\nZ -> A;\nA -> Y;\nZ <-> A;\nA <-> Y;").to_admg();
    CHECK(phi(confounded, {{t3("0", "1", "1"), t3("1", "1", "0")}}) == 1);
    CHECK_THROWS_WITH(make_constraint(confounded, {{t3("0", "1", "1"), t3("1", "1", "0")}}),
                      ContainsSubstring("Cannot identify"));
}

TEST_CASE("generated constraint lists are irredundant and deterministic") {
    const auto cs = generate_constraints(iv(), {"Z"}, {"A"}, {"Y"});
    CHECK(cs.warning.empty());
    REQUIRE(!cs.constraints.empty());

    ContradictionCache cache;
    for (const auto& c : cs.constraints) {
        REQUIRE(c.set.triples.size() >= 2);
        CHECK(c.rhs >= 1);
        CHECK(c.rhs < static_cast<int>(c.set.triples.size()));
        CHECK(phi(iv(), c.set, &cache) == c.rhs);
        for (std::size_t skip = 0; skip < c.set.triples.size(); ++skip) {
            TripleSet rest;
            for (std::size_t i = 0; i < c.set.triples.size(); ++i) {
                if (i != skip) rest.triples.push_back(c.set.triples[i]);
            }
            CHECK(phi(iv(), rest, &cache) == c.rhs);
        }
    }

    for (const auto& a : {"0", "1"}) {
        for (const auto& first : {"0", "1"}) {
            const std::string second = first == std::string("0") ? "1" : "0";
            const auto* c = find_constraint(cs, {t3("0", a, first), t3("1", a, second)});
            REQUIRE(c != nullptr);
            CHECK(c->rhs == 1);
        }
    }
    const auto* same_arm = find_constraint(cs, {t3("0", "0", "0"), t3("0", "0", "1")});
    REQUIRE(same_arm != nullptr);
    CHECK(same_arm->rhs == 1);
    CHECK(find_constraint(cs, {t3("0", "1", "1"), t3("1", "1", "1")}) == nullptr);

    const auto again = generate_constraints(iv(), {"Z"}, {"A"}, {"Y"});
    REQUIRE(again.constraints.size() == cs.constraints.size());
    for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
        CHECK(to_text(iv(), again.constraints[i].lhs) == to_text(iv(), cs.constraints[i].lhs));
    }
}

TEST_CASE("ternary instruments surface the cycle constraint") {
    const auto cs = generate_constraints(iv3(), {"Z"}, {"A"}, {"Y"});
    CHECK(cs.warning.empty());
    const auto* cycle = find_constraint(cs, bonet_triples());
    REQUIRE(cycle != nullptr);
    CHECK(cycle->rhs == 2);

    const auto* member = find_constraint(cs, {t3("0", "1", "1"), t3("1", "1", "0")});
    REQUIRE(member != nullptr);
    CHECK(member->rhs == 1);
}

TEST_CASE("joint mediator outcomes include the two displayed sums") {
    const auto cs = generate_constraints(frontdoor(), {"Z"}, {"A"}, {"M", "Y"}, 5);
    CHECK(cs.warning.empty());

    const auto* first = find_constraint(
        cs, {tfd("0", "0", "0", "1"), tfd("0", "1", "1", "1"), tfd("1", "0", "1", "0"), tfd("1", "1", "0", "0")});
    REQUIRE(first != nullptr);
    CHECK(first->rhs == 1);
    CHECK(to_text(frontdoor(), first->lhs) ==
          "P_{z̄}(ā, m̄, y) + P_{z̄}(a, m, y) + P_{z}(ā, m, ȳ) + "
          "P_{z}(a, m̄, ȳ)");

    const auto* second =
        find_constraint(cs, {tfd("0", "0", "0", "0"), tfd("0", "1", "0", "0"), tfd("0", "1", "1", "0"),
                             tfd("0", "1", "1", "1"), tfd("1", "1", "0", "1")});
    REQUIRE(second != nullptr);
    CHECK(second->rhs == 1);
    CHECK(to_text(frontdoor(), second->lhs) ==
          "P_{z̄}(ā, m̄, ȳ) + P_{z̄}(a, m̄, ȳ) + "
          "P_{z̄}(a, m, ȳ) + P_{z̄}(a, m, y) + P_{z}(a, m̄, y)");
}

TEST_CASE("family grouping reproduces the per-treatment inequalities") {
    const auto families = family_constraints(iv(), {"Z"}, {"A"}, {"Y"});
    REQUIRE(families.size() == 2);
    CHECK(families[0].a == Assignment{{"A", "0"}});
    CHECK(families[1].a == Assignment{{"A", "1"}});
    CHECK(families[0].rhs == 1);
    CHECK(to_text(iv(), families[0].lhs) ==
          "max{P_{z̄}(ā, ȳ); P_{z}(ā, ȳ)} + "
          "max{P_{z̄}(ā, y); P_{z}(ā, y)}");
    CHECK(to_text(iv(), families[1].lhs) ==
          "max{P_{z̄}(a, ȳ); P_{z}(a, ȳ)} + max{P_{z̄}(a, y); P_{z}(a, y)}");

    const auto joint = family_constraints(frontdoor(), {"Z"}, {"A"}, {"M", "Y"});
    REQUIRE(joint.size() == 2);
    CHECK(to_text(frontdoor(), joint[1].lhs) ==
          "max{P_{z̄}(a, m̄, ȳ); P_{z}(a, m̄, ȳ)} + "
          "max{P_{z̄}(a, m̄, y); P_{z}(a, m̄, y)} + "
          "max{P_{z̄}(a, m, ȳ); P_{z}(a, m, ȳ)} + "
          "max{P_{z̄}(a, m, y); P_{z}(a, m, y)}");

    const auto direct =
        parse_graph("node Z;\nnode A;\nnode Y;\nZ -> A;\nZ -> Y;\nA -> Y;\nA <-> Y;").to_admg();
    CHECK_THROWS_WITH(family_constraints(direct, {"Z"}, {"A"}, {"Y"}),
                      ContainsSubstring("affects the outcome"));
}

TEST_CASE("distribution checks report violations by severity") {
    const auto cs = generate_constraints(iv(), {"Z"}, {"A"}, {"Y"});
    const auto space = iv().vertices();

    std::vector<double> cells(8, 0.0);
    cells[3] = 0.5;  // z at its first value, treated, outcome present
    cells[6] = 0.5;  // z at its second value, treated, outcome absent
    const NumericDistribution table(space, cells);
    const auto report = check_distribution<double>(iv(), cs.constraints, table, 1e-9);
    REQUIRE(report.checks.size() == cs.constraints.size());
    REQUIRE(report.violations.size() == 1);
    const auto& worst = report.checks[report.violations[0]];
    CHECK(set_key(worst.constraint.set.triples) == set_key({t3("0", "1", "1"), t3("1", "1", "0")}));
    CHECK(*worst.value == Catch::Approx(2.0));
    CHECK(*worst.slack == Catch::Approx(-1.0));
    CHECK(worst.violated);

    std::vector<Rational> exact_cells(8, Rational(0));
    exact_cells[3] = Rational(1, 2);
    exact_cells[6] = Rational(1, 2);
    const ExactDistribution exact(space, exact_cells);
    const auto exact_report = check_distribution<Rational>(iv(), cs.constraints, exact);
    REQUIRE(exact_report.violations.size() == 1);
    CHECK(*exact_report.checks[exact_report.violations[0]].slack == Rational(-1));

    std::vector<double> degenerate(8, 0.0);
    degenerate[3] = 1.0;  // the second arm is never seen
    const NumericDistribution partial(space, degenerate);
    const auto partial_report = check_distribution<double>(iv(), cs.constraints, partial, 1e-9);
    CHECK(partial_report.violations.empty());
    bool saw_undefined = false;
    for (const auto& check : partial_report.checks) {
        if (!check.undefined.empty()) {
            saw_undefined = true;
            CHECK(!check.violated);
            CHECK(!check.value);
        }
    }
    CHECK(saw_undefined);

    const auto empty_report = check_distribution<double>(iv(), {}, table, 1e-9);
    CHECK(empty_report.checks.empty());
    CHECK(empty_report.violations.empty());
}
