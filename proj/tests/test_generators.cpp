#include <doctest.h>

#include <unordered_set>

#include "ppond/generators.hpp"
#include "ppond/oracle.hpp"
#include "ppond/parser.hpp"
#include "ppond/rng.hpp"
#include "fixtures.hpp"

using namespace ppond;

namespace {

Problem parse_gen(const GeneratedProblem& g) {
    return parse_problem(g.domain_text, g.problem_text, g.name + ".ppond", g.name + ".ppondp");
}

long reachable_states(const BeliefEngine& engine, long cap = 100000) {
    std::unordered_set<State, StateHash> seen;
    std::vector<State> frontier;
    BeliefState b0 = engine.problem().initial_belief();
    for (const auto& [state, prob] : b0.support())
        if (seen.insert(state).second) frontier.push_back(state);
    while (!frontier.empty()) {
        State s = frontier.back();
        frontier.pop_back();
        if (engine.state_is_goal(s)) continue;
        for (const Action& a : engine.problem().actions) {
            if (!engine.action_applicable_in_state(s, a.id)) continue;
            for (const TransitionEntry& t : *engine.transitions(s, a.id))
                if (seen.insert(t.successor).second) {
                    REQUIRE(static_cast<long>(seen.size()) <= cap);
                    frontier.push_back(t.successor);
                }
        }
    }
    return static_cast<long>(seen.size());
}

}  // namespace

TEST_CASE("localize sizes and validity") {
    GeneratedProblem g = generate_localize(5, false);
    Problem p = parse_gen(g);
    CHECK(p.actions.size() == 9);
    BeliefEngine engine(p);
    long states = reachable_states(engine);
    CHECK(states >= 60);
    CHECK(states <= 80);
    CHECK(p.initial_belief().size() == 64);  // uniform over the 8x8 grid

    SUBCASE("n too small") { CHECK_THROWS(generate_localize(2, false)); }
    SUBCASE("stochastic variant still grounds to nine actions") {
        Problem sp = parse_gen(generate_localize(5, true));
        CHECK(sp.actions.size() == 9);
    }
}

TEST_CASE("wumpus sizes and priors") {
    GeneratedProblem g = generate_wumpus(4, true);
    Problem p = parse_gen(g);
    CHECK(p.actions.size() >= 70);
    CHECK(p.actions.size() <= 95);
    CHECK(p.initial_belief().size() == 16);  // 2 wumpus pairs x 2 pit pairs

    SUBCASE("nonuniform priors skew b0") {
        Problem q = parse_gen(generate_wumpus(3, false));
        BeliefState qb0 = q.initial_belief();
        bool has_point_seven = false;
        for (const auto& [state, prob] : qb0.support())
            if (std::abs(prob - 0.49) < 1e-12) has_point_seven = true;  // 0.7 * 0.7
        CHECK(has_point_seven);
        double total = 0;
        for (const auto& [state, prob] : qb0.support()) total += prob;
        CHECK(total == doctest::Approx(1.0));
    }
    SUBCASE("n too small") { CHECK_THROWS(generate_wumpus(2, true)); }
}

TEST_CASE("wumpus-3 admits a goal-reaching policy from every initial state") {
    Problem p = parse_gen(generate_wumpus(3, true));
    BeliefEngine engine(p);
    BeliefSpaceIndex index = enumerate_beliefs(engine, 100000);
    std::vector<double> values = exact_values(index);
    CHECK(values[0] < kInfinity);
    // Rollouts from every start world reach the goal.
    RngStream rng(9);
    for (std::size_t w = 0; w < index.beliefs[0].support().size(); ++w) {
        State s = index.beliefs[0].support()[w].first;
        int bi = 0, steps = 0;
        while (!index.goal[bi]) {
            REQUIRE(steps++ < 500);
            ActionId a = oracle_policy_action(index, values, bi);
            REQUIRE(a >= 0);
            auto [succ, obs] = engine.sample_transition(s, a, rng);
            bool moved = false;
            for (const auto& e : index.edges[bi]) {
                if (e.action != a) continue;
                for (const auto& sc : e.successors)
                    if (sc.signature == obs) {
                        bi = sc.successor;
                        moved = true;
                        break;
                    }
                break;
            }
            REQUIRE(moved);
            s = std::move(succ);
        }
    }
}

TEST_CASE("maze parameters and the value of sensing") {
    SUBCASE("bad parameters") {
        CHECK_THROWS(generate_maze(4, 1));
        CHECK_THROWS(generate_maze(7, 0));
        CHECK_THROWS(generate_maze(5, 12));  // bottlenecks too dense for the corridor
        CHECK_THROWS(generate_maze(7, 2, 9));  // detour out of range
    }

    SUBCASE("hidden assignment is uniform over the combinations") {
        Problem p = parse_gen(generate_maze(7, 2));
        BeliefState b0 = p.initial_belief();
        CHECK(b0.size() == 4);
        for (const auto& [state, prob] : b0.support())
            CHECK(prob == doctest::Approx(0.25));
    }

    SUBCASE("sensing-first beats the sense-free policy on maze-5-1") {
        Problem p = parse_gen(generate_maze(5, 1));
        BeliefEngine engine(p);
        BeliefSpaceIndex index = enumerate_beliefs(engine, 100000);
        std::vector<double> with_sensing = exact_values(index);
        REQUIRE(with_sensing[0] < kInfinity);

        // Strip the dedicated sensing actions (pure sensors, no effects);
        // the success observation of risky crossings stays.
        Problem stripped = p;
        stripped.actions.clear();
        for (const Action& a : p.actions)
            if (!(a.is_sensing() && a.effects.empty())) {
                Action copy = a;
                copy.id = static_cast<ActionId>(stripped.actions.size());
                stripped.actions.push_back(copy);
            }
        stripped = ground_split_conditionals(std::move(stripped));
        BeliefEngine blind(stripped);
        BeliefSpaceIndex blind_index = enumerate_beliefs(blind, 100000);
        std::vector<double> sense_free = exact_values(blind_index);
        CHECK(with_sensing[0] < sense_free[0] - 1e-9);
    }
}

TEST_CASE("generator output is deterministic and oracle-enumerable at small n") {
    for (int n : {3, 4}) {
        GeneratedProblem a = generate_wumpus(n, true);
        GeneratedProblem b = generate_wumpus(n, true);
        CHECK(a.domain_text == b.domain_text);
        CHECK(a.problem_text == b.problem_text);
    }
    GeneratedProblem m1 = generate_maze(6, 1);
    GeneratedProblem m2 = generate_maze(6, 1);
    CHECK(m1.problem_text == m2.problem_text);

    // Finite reachable belief spaces at small sizes.
    for (const GeneratedProblem& g :
         {generate_localize(3, false), generate_maze(5, 1), generate_wumpus(3, true)}) {
        Problem p = parse_gen(g);
        BeliefEngine engine(p);
        CHECK_NOTHROW(enumerate_beliefs(engine, 200000));
    }
}
