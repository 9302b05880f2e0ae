#include <doctest.h>

#include <algorithm>
#include <set>

#include "ppond/model.hpp"
#include "ppond/parser.hpp"
#include "fixtures.hpp"

using namespace ppond;

TEST_CASE("state complement invariant holds for every parsed initial state") {
    Problem p = fixtures::minefield();
    BeliefState b0 = p.initial_belief();
    for (const auto& [state, prob] : b0.support()) {
        for (const Fact& f : p.facts) {
            CHECK(state.test(f.id) != state.test(f.complement));
            CHECK(p.facts[f.complement].complement == f.id);
            CHECK(f.complement != f.id);
        }
    }
}

TEST_CASE("state ordering puts the set bit first at the first difference") {
    Bitset a(4), b(4);
    a.set(1);
    b.set(2);
    CHECK(a < b);  // bit 1 differs first; a has it set
    Bitset c(4), d(4);
    c.set(0);
    c.set(3);
    d.set(0);
    d.set(2);
    CHECK(d < c);
}

TEST_CASE("most_likely_state picks the max, ties to the smallest state") {
    Problem p = fixtures::minefield();
    BeliefState b0 = p.initial_belief();
    REQUIRE(b0.size() == 2);

    SUBCASE("unique argmax") {
        std::vector<std::pair<State, double>> entries{{b0.support()[0].first, 0.7},
                                                      {b0.support()[1].first, 0.3}};
        BeliefState b = BeliefState::from_weighted(entries);
        CHECK(most_likely_state(b) == b0.support()[0].first);
        std::swap(entries[0].second, entries[1].second);
        CHECK(most_likely_state(BeliefState::from_weighted(entries)) == b0.support()[1].first);
    }
    SUBCASE("tie goes to the lexicographically smallest") {
        CHECK(most_likely_state(b0) == b0.support()[0].first);
    }
    SUBCASE("singleton") {
        BeliefState b = BeliefState::from_weighted({{b0.support()[1].first, 1.0}});
        CHECK(most_likely_state(b) == b0.support()[1].first);
    }
}

TEST_CASE("minefield most likely state is the safe world") {
    Problem p = fixtures::minefield();
    BeliefState b0 = p.initial_belief();
    FactId safe = -1;
    for (const Fact& f : p.facts)
        if (f.name == "safe") safe = f.id;
    REQUIRE(safe >= 0);
    CHECK(most_likely_state(b0).test(safe));
}

TEST_CASE("belief keys: determinism, 1e-9 rounding, discretization levels") {
    Problem p = fixtures::minefield();
    BeliefState b0 = p.initial_belief();
    const State& s1 = b0.support()[0].first;
    const State& s2 = b0.support()[1].first;

    CHECK(belief_key(b0) == belief_key(p.initial_belief()));
    CHECK(belief_key(b0).hash() == belief_key(p.initial_belief()).hash());

    BeliefState jitter =
        BeliefState::from_weighted({{s1, 0.5 + 1e-12}, {s2, 0.5 - 1e-12}});
    CHECK(belief_key(jitter) == belief_key(b0));

    BeliefState skew = BeliefState::from_weighted({{s1, 0.41}, {s2, 0.59}});
    BeliefKey k = belief_key(skew, 10);
    CHECK(k.entries[0].second == 5);  // ceil(10 * 0.41)
    CHECK(k.entries[1].second == 6);
    CHECK_FALSE(belief_key(skew, 10) == belief_key(b0, 10));
}

TEST_CASE("belief state validation") {
    Problem p = fixtures::minefield();
    BeliefState b0 = p.initial_belief();
    const State& s = b0.support()[0].first;
    CHECK_THROWS_AS(BeliefState::from_weighted({{s, 0.4}}), ModelError);
    CHECK_THROWS_AS(BeliefState::from_weighted({}), ModelError);
    // duplicates merge
    BeliefState merged = BeliefState::from_weighted({{s, 0.5}, {s, 0.5}});
    CHECK(merged.size() == 1);
}

TEST_CASE("ground_split_conditionals") {
    SUBCASE("one unconditional effect stays a single variant") {
        Problem p = fixtures::minimal();
        REQUIRE(p.actions.size() == 1);
        CHECK(p.split_variants.size() == 1);
        CHECK(p.split_variants[0].parent == p.actions[0].id);
        CHECK(p.split_variants[0].condition.empty());
    }

    SUBCASE("k conditional effects give k variants sharing the parent id") {
        Problem p = parse_problem(
            "(define (domain d) (:types t) (:predicates (a) (b) (c) (g))"
            " (:action act :parameters ()"
            "  :effect (and (when (a) (g)) (when (b) (g)) (when (c) (g)))))",
            "(define (problem q) (:domain d) (:objects x - t) (:init (a)) "
            "(:init-belief (oneof-weighted 0.5 ((b)) 0.5 ((c)))) (:goal (g)))");
        // (a) is statically true, so that condition is simplified away.
        REQUIRE(p.actions.size() == 1);
        CHECK(p.split_variants.size() == 3);
        for (const SplitVariant& v : p.split_variants) CHECK(v.parent == p.actions[0].id);
    }

    SUBCASE("splitting preserves the (condition, outcomes) multiset") {
        Problem p = fixtures::minefield();
        auto base = effect_multiset(p, false);
        auto split = effect_multiset(p, true);
        REQUIRE(base.size() == split.size());
        auto canon = [](const auto& v) {
            std::multiset<std::string> out;
            for (const auto& [cond, outcomes] : v) {
                std::string s;
                for (FactId f : cond) s += std::to_string(f) + ",";
                s += "|";
                for (const auto& o : *outcomes) {
                    s += std::to_string(o.probability) + ":";
                    for (FactId f : o.added_facts) s += std::to_string(f) + ",";
                    s += ";";
                }
                out.insert(std::move(s));
            }
            return out;
        };
        CHECK(canon(base) == canon(split));
    }

    SUBCASE("outcome adding a fact and its complement is rejected") {
        CHECK_THROWS_AS(parse_problem("(define (domain d) (:types t) (:predicates (g))"
                                      " (:action bad :parameters ()"
                                      "  :effect (and (g) (not (g)))))",
                                      "(define (problem q) (:domain d) (:objects x - t)"
                                      " (:goal (g)))"),
                        ParseError);
    }
}

TEST_CASE("initial belief expands formulas into full states summing to one") {
    Problem p = fixtures::minefield();
    BeliefState b0 = p.initial_belief();
    double total = 0.0;
    for (const auto& [state, prob] : b0.support()) total += prob;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // support is sorted and distinct
    for (std::size_t i = 1; i < b0.support().size(); ++i)
        CHECK(b0.support()[i - 1].first < b0.support()[i].first);
}
