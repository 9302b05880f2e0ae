#include <doctest.h>

#include <algorithm>

#include "ppond/engine.hpp"
#include "ppond/relaxation.hpp"
#include "fixtures.hpp"

using namespace ppond;

namespace {

ActionId action_id(const Problem& p, const std::string& name) {
    for (const Action& a : p.actions)
        if (a.name == name) return a.id;
    REQUIRE(false);
    return -1;
}

FactId fact_id(const Problem& p, const std::string& name) {
    for (const Fact& f : p.facts)
        if (f.name == name) return f.id;
    REQUIRE(false);
    return -1;
}

std::vector<std::string> plan_names(const Problem& p, const std::vector<ActionId>& plan) {
    std::vector<std::string> out;
    for (ActionId a : plan) out.push_back(p.actions[a].name);
    return out;
}

// Safe world first (it is lexicographically smaller).
std::pair<State, State> minefield_worlds(const Problem& p) {
    BeliefState b0 = p.initial_belief();
    REQUIRE(b0.size() == 2);
    State safe = b0.support()[0].first, unsafe = b0.support()[1].first;
    REQUIRE(safe.test(fact_id(p, "safe")));
    REQUIRE_FALSE(unsafe.test(fact_id(p, "safe")));
    return {safe, unsafe};
}

}  // namespace

TEST_CASE("effect level offsets") {
    CHECK(effect_level_offset(1.0) == 1);
    CHECK(effect_level_offset(0.5) == 2);
    CHECK(effect_level_offset(0.3) == 4);
    CHECK(effect_level_offset(0.1) == 10);
    CHECK(effect_level_offset(0.01) == 100);
    CHECK_THROWS_AS(effect_level_offset(0.0), ModelError);
}

TEST_CASE("minefield state graphs") {
    Problem p = fixtures::minefield();
    RelaxationHeuristics relax(p);
    auto [safe, unsafe] = minefield_worlds(p);

    SUBCASE("a goal state stops at layer zero") {
        State goal = safe;
        goal.set_pair(fact_id(p, "at pb"), p.complement(fact_id(p, "at pb")), true);
        RelaxedStateGraph g = relax.build_state_graph(goal);
        CHECK(g.goal_layer == 0);
        CHECK(g.layers.size() == 1);
        CHECK(relax.extract_relaxed_plan(g).empty());
    }

    SUBCASE("safe world reaches the goal in one layer via move-fast") {
        RelaxedStateGraph g = relax.build_state_graph(safe);
        CHECK(g.goal_layer == 1);
        CHECK(plan_names(p, relax.extract_relaxed_plan(g)) ==
              std::vector<std::string>{"move-fast"});
    }

    SUBCASE("unsafe world needs the four-step careful chain") {
        RelaxedStateGraph g = relax.build_state_graph(unsafe);
        CHECK(g.goal_layer == 4);
        CHECK(g.first_level[fact_id(p, "at pb")] == 4);
        CHECK(plan_names(p, relax.extract_relaxed_plan(g)) ==
              std::vector<std::string>{"move-careful1", "move-careful2", "move-careful3",
                                       "move-careful4"});
        // layers are monotone
        for (std::size_t i = 1; i < g.layers.size(); ++i)
            CHECK(g.layers[i - 1].is_subset_of(g.layers[i]));
    }

    SUBCASE("state heuristic values") {
        CHECK(relax.state_value(safe, RelaxKind::Max) == 1);
        CHECK(relax.state_value(unsafe, RelaxKind::Max) == 4);
        CHECK(relax.state_value(unsafe, RelaxKind::Ff) == 4);
        CHECK(relax.state_value(safe, RelaxKind::Max) <= relax.state_value(safe, RelaxKind::Add));
        CHECK(relax.state_value(safe, RelaxKind::Max) <= relax.state_value(safe, RelaxKind::Ff));
    }

    SUBCASE("weighted state heuristic over b0") {
        BeliefState b0 = p.initial_belief();
        CHECK(relax.weighted_value(b0, RelaxKind::Max) == doctest::Approx(2.5));
        CHECK(relax.weighted_value(b0, RelaxKind::Max) == doctest::Approx(2.5));  // cache hit
        BeliefState singleton = BeliefState::from_weighted({{safe, 1.0}});
        CHECK(relax.weighted_value(singleton, RelaxKind::Max) ==
              relax.state_value(safe, RelaxKind::Max));
    }
}

TEST_CASE("stochastic facts are scheduled at the offset layer") {
    // f only achievable through a 0.5 effect: first level is fire layer + 2.
    Problem p = parse_problem(
        "(define (domain d) (:types t) (:predicates (f) (pad) (g))"
        " (:action try :parameters () :effect (probabilistic 0.5 (f) 0.5 (and)))"
        " (:action finish :parameters () :precondition (f) :effect (g)))",
        "(define (problem q) (:domain d) (:objects x - t)"
        " (:init-belief (oneof-weighted 0.5 ((pad)) 0.5 ((not (pad)))))"
        " (:goal (g)))");
    RelaxationHeuristics relax(p);
    State s = p.initial_belief().support()[0].first;
    RelaxedStateGraph g = relax.build_state_graph(s);
    CHECK(g.first_level[fact_id(p, "f")] == 2);  // fired at 0, due at 0+2
    CHECK(g.goal_layer == 3);
    // The relaxed plan counts the expected two executions of try.
    auto plan = plan_names(p, relax.extract_relaxed_plan(g));
    CHECK(plan == std::vector<std::string>{"try", "try", "finish"});
}

TEST_CASE("an earlier deterministic achiever supersedes a pending stochastic one") {
    // g reachable stochastically from layer 0 (due 4) and deterministically in
    // a 3-step chain (due 3): the chain wins the level, 3 < 4.
    Problem p = parse_problem(
        "(define (domain d) (:types t) (:predicates (a) (b) (g) (pad))"
        " (:action lucky :parameters () :effect (probabilistic 0.3 (g) 0.7 (and)))"
        " (:action s1 :parameters () :effect (a))"
        " (:action s2 :parameters () :precondition (a) :effect (b))"
        " (:action s3 :parameters () :precondition (b) :effect (g)))",
        "(define (problem q) (:domain d) (:objects x - t)"
        " (:init-belief (oneof-weighted 0.5 ((pad)) 0.5 ((not (pad)))))"
        " (:goal (g)))");
    RelaxationHeuristics relax(p);
    State s = p.initial_belief().support()[0].first;
    RelaxedStateGraph g = relax.build_state_graph(s);
    FactId goal = fact_id(p, "g");
    CHECK(g.first_level[goal] == 3);
    CHECK(p.actions[g.achiever[goal].parent].name == "s3");
}

TEST_CASE("a due-layer tie resolves to the higher-probability achiever") {
    // Both achievers complete g at layer 3: det fires at 2 (due 3), stochastic
    // at 1 with p=0.5 (due 3). The deterministic one is recorded.
    Problem p = parse_problem(
        "(define (domain d) (:types t) (:predicates (a) (b) (g) (pad))"
        " (:action s1 :parameters () :effect (a))"
        " (:action gamble :parameters () :precondition (a)"
        "  :effect (probabilistic 0.5 (g) 0.5 (and)))"
        " (:action s2 :parameters () :precondition (a) :effect (b))"
        " (:action s3 :parameters () :precondition (b) :effect (g)))",
        "(define (problem q) (:domain d) (:objects x - t)"
        " (:init-belief (oneof-weighted 0.5 ((pad)) 0.5 ((not (pad)))))"
        " (:goal (g)))");
    RelaxationHeuristics relax(p);
    State s = p.initial_belief().support()[0].first;
    RelaxedStateGraph g = relax.build_state_graph(s);
    FactId goal = fact_id(p, "g");
    CHECK(g.first_level[goal] == 3);
    CHECK(p.actions[g.achiever[goal].parent].name == "s3");
    CHECK(g.achiever[goal].executions == 1);
}

TEST_CASE("unreachable goals yield infinite heuristics") {
    Problem p = fixtures::minefield();
    RelaxationHeuristics relax(p);
    auto [safe, unsafe] = minefield_worlds(p);
    (void)safe;
    // Strip the careful chain: a model variant without move-careful actions
    // would be needed; instead check a state where nothing applies. Use the
    // unbounded-chain model's goal-free sibling: a state with no achievers.
    Problem q = parse_problem(
        "(define (domain d) (:types t) (:predicates (f) (g) (pad))"
        " (:action need-f :parameters () :precondition (f) :effect (g)))",
        "(define (problem z) (:domain d) (:objects x - t)"
        " (:init-belief (oneof-weighted 0.5 ((pad)) 0.5 ((not (pad)))))"
        " (:goal (g)))");
    RelaxationHeuristics relax_q(q);
    State s = q.initial_belief().support()[0].first;
    RelaxedStateGraph g = relax_q.build_state_graph(s);
    CHECK_FALSE(g.goal_reached());
    CHECK(relax_q.state_value(s, RelaxKind::Max) == kInfinity);
    CHECK(relax_q.state_value(s, RelaxKind::Add) == kInfinity);
    CHECK(relax_q.state_value(s, RelaxKind::Ff) == kInfinity);
    CHECK(relax_q.weighted_value(q.initial_belief(), RelaxKind::Max) == kInfinity);
}

TEST_CASE("minefield belief graph follows the sensing elimination") {
    Problem p = fixtures::minefield();
    RelaxationHeuristics relax(p);
    BeliefState b0 = p.initial_belief();
    RelaxedBeliefGraph g = relax.build_belief_graph(b0);

    // Most likely state is the safe world (tie broken lexicographically).
    CHECK(g.states[g.s_ml].test(fact_id(p, "safe")));

    // Layer 0 valid: both worlds; from layer 1 on only the safe world.
    REQUIRE(g.valid_at.size() >= 2);
    CHECK(g.valid_at[0].size() == 2);
    CHECK(g.valid_at[1] == std::vector<int>{g.s_ml});

    // safe enters the intersection at layer 1 through the elimination.
    FactId safe = fact_id(p, "safe");
    CHECK(g.inter_first_level[safe] == 1);
    CHECK(g.achiever[safe].kind == AttributionKind::Sensing);
    CHECK(g.achiever[safe].actor == action_id(p, "sense-safe"));

    CHECK(g.goal_layer == 2);
    CHECK(plan_names(p, relax.extract_relaxed_plan(g)) ==
          std::vector<std::string>{"sense-safe", "move-fast"});

    // Valid sets are monotone nonincreasing; per-state layers monotone.
    for (std::size_t i = 1; i < g.valid_at.size(); ++i)
        CHECK(g.valid_at[i].size() <= g.valid_at[i - 1].size());
    for (const auto& layers : g.state_layers)
        for (std::size_t i = 1; i < layers.size(); ++i)
            CHECK(layers[i - 1].is_subset_of(layers[i]));
}

TEST_CASE("belief heuristic values on minefield") {
    Problem p = fixtures::minefield();
    RelaxationHeuristics relax(p);
    BeliefState b0 = p.initial_belief();
    auto [safe, unsafe] = minefield_worlds(p);

    CHECK(relax.belief_value(b0, RelaxKind::Max) == 2);
    CHECK(relax.belief_value(b0, RelaxKind::Ff) == 2);
    // goal fact first holds across valid states at layer 2
    CHECK(relax.belief_value(b0, RelaxKind::Add) == 2);
    CHECK(relax.belief_value(b0, RelaxKind::Max) >= relax.state_value(safe, RelaxKind::Max));

    // Goal belief evaluates to zero.
    State goal_safe = safe, goal_unsafe = unsafe;
    goal_safe.set_pair(fact_id(p, "at pb"), p.complement(fact_id(p, "at pb")), true);
    goal_safe.set_pair(fact_id(p, "at p0"), p.complement(fact_id(p, "at p0")), false);
    goal_unsafe.set_pair(fact_id(p, "at pb"), p.complement(fact_id(p, "at pb")), true);
    goal_unsafe.set_pair(fact_id(p, "at p0"), p.complement(fact_id(p, "at p0")), false);
    BeliefState goal_belief =
        BeliefState::from_weighted({{goal_safe, 0.5}, {goal_unsafe, 0.5}});
    CHECK(relax.belief_value(goal_belief, RelaxKind::Max) == 0);
    CHECK(relax.belief_value(goal_belief, RelaxKind::Ff) == 0);
}

TEST_CASE("singleton belief graph degenerates to the state graph") {
    Problem p = fixtures::minefield();
    RelaxationHeuristics relax(p);
    auto [safe, unsafe] = minefield_worlds(p);
    for (const State& s : {safe, unsafe}) {
        BeliefState b = BeliefState::from_weighted({{s, 1.0}});
        RelaxedStateGraph sg = relax.build_state_graph(s);
        RelaxedBeliefGraph bg = relax.build_belief_graph(b);
        CHECK(bg.goal_layer == sg.goal_layer);
        REQUIRE(bg.state_layers.size() == 1);
        REQUIRE(bg.state_layers[0].size() == sg.layers.size());
        for (std::size_t i = 0; i < sg.layers.size(); ++i)
            CHECK(bg.state_layers[0][i] == sg.layers[i]);
        for (int f = 0; f < p.fact_count(); ++f)
            CHECK(bg.inter_first_level[f] == sg.first_level[f]);
        CHECK(relax.extract_relaxed_plan(bg) == relax.extract_relaxed_plan(sg));
    }
}

TEST_CASE("belief graph reaches a fixpoint when no sensor separates the worlds") {
    // Two worlds disagree on the precondition of the only goal action and
    // nothing observes it: the intersection never contains it.
    Problem p = parse_problem(
        "(define (domain d) (:types t) (:predicates (k) (g))"
        " (:action use :parameters () :precondition (k) :effect (g)))",
        "(define (problem q) (:domain d) (:objects x - t)"
        " (:init-belief (oneof-weighted 0.5 ((k)) 0.5 ((not (k)))))"
        " (:goal (g)))");
    RelaxationHeuristics relax(p);
    BeliefState b0 = p.initial_belief();
    RelaxedBeliefGraph g = relax.build_belief_graph(b0);
    CHECK_FALSE(g.goal_reached());
    CHECK(relax.belief_value(b0, RelaxKind::Max) == kInfinity);
    CHECK(relax.belief_value(b0, RelaxKind::Ff) == kInfinity);
    // The state-level view disagrees: the k-world alone reaches the goal.
    CHECK(relax.state_value(b0.support()[0].first, RelaxKind::Max) == 1);
}

TEST_CASE("belief cache ignores probabilities but keys on the most likely state") {
    Problem p = fixtures::minefield();
    RelaxationHeuristics relax(p);
    auto [safe, unsafe] = minefield_worlds(p);

    BeliefState even = BeliefState::from_weighted({{safe, 0.5}, {unsafe, 0.5}});
    BeliefState tilted = BeliefState::from_weighted({{safe, 0.9}, {unsafe, 0.1}});
    double v1 = relax.belief_value(even, RelaxKind::Ff);
    long size_after_first = relax.belief_cache_size();
    double v2 = relax.belief_value(tilted, RelaxKind::Ff);
    CHECK(v1 == v2);  // same s_ml, same support
    CHECK(relax.belief_cache_size() == size_after_first);

    // Different most likely state: a separate entry may differ.
    BeliefState flipped = BeliefState::from_weighted({{safe, 0.1}, {unsafe, 0.9}});
    double v3 = relax.belief_value(flipped, RelaxKind::Max);
    CHECK(relax.belief_cache_size() == size_after_first + 1);
    CHECK(v3 == 4);  // unsafe world assumed true: careful chain, no elimination gain
}
