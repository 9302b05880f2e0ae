#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ppond/oracle.hpp"
#include "ppond/solver.hpp"
#include "fixtures.hpp"

using namespace ppond;

namespace {

ActionId action_id(const Problem& p, const std::string& name) {
    for (const Action& a : p.actions)
        if (a.name == name) return a.id;
    REQUIRE(false);
    return -1;
}

SolveConfig quick_config(uint64_t seed = 1) {
    SolveConfig c;
    c.seed = seed;
    c.time_limit_s = 60.0;
    c.eval_interval = 10;
    c.final_eval_iterations = 1000;
    return c;
}

}  // namespace

TEST_CASE("greedy action on minefield prefers sensing under hff-b initialization") {
    Problem p = fixtures::minefield();
    BeliefEngine engine(p);
    auto h = make_heuristic(HeuristicKind::HffB, engine);
    RtdpBelSolver solver(engine, *h, quick_config());
    auto [action, value] = solver.greedy_action(p.initial_belief());
    CHECK(p.actions[action].name == "sense-safe");
    CHECK(value == doctest::Approx(3.5));  // 1 + 0.5*1 + 0.5*4 beats careful 1 + 3
}

TEST_CASE("greedy basics") {
    Problem p = fixtures::minimal();
    BeliefEngine engine(p);
    auto h = make_heuristic(HeuristicKind::Flat, engine);
    RtdpBelSolver solver(engine, *h, quick_config());
    auto [action, value] = solver.greedy_action(p.initial_belief());
    CHECK(action == 0);                      // the only applicable action
    CHECK(value == doctest::Approx(1.0));    // goal successors are worth zero

    Problem dead = parse_problem(
        "(define (domain d) (:types t) (:predicates (k) (g))"
        " (:action use :parameters () :precondition (k) :effect (g)))",
        "(define (problem z) (:domain d) (:objects x - t) (:goal (g)))");
    BeliefEngine dead_engine(dead);
    auto dh = make_heuristic(HeuristicKind::Flat, dead_engine);
    RtdpBelSolver dead_solver(dead_engine, *dh, quick_config());
    CHECK_THROWS_AS(dead_solver.greedy_action(dead.initial_belief()), DeadEndError);
}

TEST_CASE("trials walk to the goal and back up values") {
    Problem p = fixtures::minefield();
    BeliefEngine engine(p);
    auto h = make_heuristic(HeuristicKind::HffB, engine);
    RtdpBelSolver solver(engine, *h, quick_config());

    // Seeds alternate worlds; both trace the hand trajectories.
    bool saw_fast = false, saw_careful = false;
    for (int i = 0; i < 8; ++i) {
        TrialRecord r = solver.run_trial();
        CHECK(r.reached_goal);
        if (r.steps == 2) saw_fast = true;      // sense, move-fast
        if (r.steps == 5) saw_careful = true;   // sense, four careful moves
        CHECK((r.steps == 2 || r.steps == 5));
    }
    CHECK(saw_fast);
    CHECK(saw_careful);

    // Bellman consistency along the trajectory at trial end.
    TrialRecord r = solver.run_trial();
    CHECK(solver.table().value(p.initial_belief()) == doctest::Approx(3.5));
}

TEST_CASE("backward pass leaves trajectory values Bellman-consistent") {
    Problem p = fixtures::minefield();
    BeliefEngine engine(p);
    auto h = make_heuristic(HeuristicKind::HffB, engine);
    RtdpBelSolver solver(engine, *h, quick_config(2));
    solver.run_trial();

    // Every minefield trajectory starts at b0 and passes through one
    // post-sense belief; both must equal their one-step lookahead now.
    BeliefState b0 = p.initial_belief();
    ActionId sense = action_id(p, "sense-safe");
    for (const BeliefState& b :
         {b0, engine.update_belief(b0, sense, 1), engine.update_belief(b0, sense, 0)}) {
        double stored = solver.table().value(b);
        auto [action, lookahead] = solver.greedy_action(b);
        (void)action;
        CHECK(stored == doctest::Approx(lookahead).epsilon(1e-12));
    }
}

TEST_CASE("a goal-start belief succeeds immediately") {
    Problem p = parse_problem(
        "(define (domain d) (:types t) (:predicates (g))"
        " (:action a :parameters () :effect (g)))",
        "(define (problem q) (:domain d) (:objects x - t) (:init (g)) (:goal (g)))");
    BeliefEngine engine(p);
    auto h = make_heuristic(HeuristicKind::Flat, engine);
    RtdpBelSolver solver(engine, *h, quick_config());
    TrialRecord r = solver.run_trial();
    CHECK(r.reached_goal);
    CHECK(r.steps == 0);
    CHECK(r.trajectory.empty());
    PolicyEvalReport eval = solver.evaluate_policy(EvalMode::Final);
    CHECK(eval.mean_cost == 0.0);
    CHECK(eval.failures == 0);
}

TEST_CASE("solve on minefield converges to the oracle value") {
    Problem p = fixtures::minefield();
    BeliefEngine engine(p);

    for (HeuristicKind kind : {HeuristicKind::HffB, HeuristicKind::Flat}) {
        CAPTURE(heuristic_name(kind));
        auto h = make_heuristic(kind, engine);
        SolveConfig config = quick_config(17);
        config.record_init_values = true;
        RtdpBelSolver solver(engine, *h, config);
        SolveStats stats = solver.solve();
        CHECK(stats.converged);
        CHECK(stats.final_eval.failures == 0);
        CHECK(stats.final_eval.mean_cost == doctest::Approx(3.5).epsilon(0.02));
        CHECK(solver.table().value(p.initial_belief()) ==
              doctest::Approx(3.5).epsilon(1e-9));

        // Admissible initialization: final values never drop below it.
        for (const auto& [key, init] : solver.table().init_values()) {
            auto fin = solver.table().peek(key);
            REQUIRE(fin.has_value());
            CHECK(*fin >= init - 1e-9);
        }
    }
}

TEST_CASE("zero time limit reports non-convergence without trials") {
    Problem p = fixtures::minefield();
    BeliefEngine engine(p);
    auto h = make_heuristic(HeuristicKind::Flat, engine);
    SolveConfig config = quick_config();
    config.time_limit_s = 0.0;
    RtdpBelSolver solver(engine, *h, config);
    SolveStats stats = solver.solve();
    CHECK_FALSE(stats.converged);
    CHECK(stats.trials == 0);
}

TEST_CASE("policy evaluation is isolated and falls back to the heuristic") {
    Problem p = fixtures::minefield();
    BeliefEngine engine(p);
    auto h = make_heuristic(HeuristicKind::HffB, engine);
    RtdpBelSolver solver(engine, *h, quick_config());
    for (int i = 0; i < 3; ++i) solver.run_trial();

    std::ostringstream before, after;
    solver.table().save(before, 0, 0);
    PolicyEvalReport eval = solver.evaluate_policy(EvalMode::Final);
    solver.table().save(after, 0, 0);
    CHECK(before.str() == after.str());
    CHECK(eval.iterations == 1000);
    CHECK(eval.failures == 0);
    CHECK(eval.mean_cost == doctest::Approx(3.5));  // both worlds already learned
}

TEST_CASE("an empty table with a weak heuristic can fail evaluations") {
    // lockbox with flat values: the greedy policy dithers and hits the cap.
    Problem p = fixtures::lockbox();
    BeliefEngine engine(p);
    auto h = make_heuristic(HeuristicKind::Flat, engine);
    SolveConfig config = quick_config();
    config.eval_step_cap = 40;
    RtdpBelSolver solver(engine, *h, config);
    PolicyEvalReport eval = solver.evaluate_policy(EvalMode::Convergence);
    CHECK(eval.failures > 0);
}

TEST_CASE("seeded determinism of solve") {
    Problem p = fixtures::minefield();
    auto run = [&](uint64_t seed) {
        BeliefEngine engine(p);
        auto h = make_heuristic(HeuristicKind::HmaxB, engine);
        RtdpBelSolver solver(engine, *h, quick_config(seed));
        SolveStats stats = solver.solve();
        std::ostringstream table;
        solver.table().save(table, problem_hash(p), seed);
        return std::make_pair(stats.trials, table.str());
    };
    auto [trials1, table1] = run(5);
    auto [trials2, table2] = run(5);
    CHECK(trials1 == trials2);
    CHECK(table1 == table2);
    auto [trials3, table3] = run(6);
    (void)trials3;
    // different seed may differ; only the fixed-seed pair must match
}

TEST_CASE("value tables round-trip through the text format") {
    Problem p = fixtures::minefield();
    BeliefEngine engine(p);
    auto h = make_heuristic(HeuristicKind::Flat, engine);
    RtdpBelSolver solver(engine, *h, quick_config());
    for (int i = 0; i < 5; ++i) solver.run_trial();
    std::ostringstream out;
    solver.table().save(out, problem_hash(p), 1);

    auto h2 = make_heuristic(HeuristicKind::Flat, engine);
    BeliefValueTable loaded(*h2, 0);
    std::istringstream in(out.str());
    loaded.load(in, p);
    CHECK(loaded.size() == solver.table().size());
    std::ostringstream out2;
    loaded.save(out2, problem_hash(p), 1);
    CHECK(out.str() == out2.str());
}

TEST_CASE("discretized keys reduce distinct entries") {
    Problem p = fixtures::minefield();
    BeliefState b0 = p.initial_belief();
    const State& s1 = b0.support()[0].first;
    const State& s2 = b0.support()[1].first;
    BeliefState a = BeliefState::from_weighted({{s1, 0.52}, {s2, 0.48}});
    BeliefState b = BeliefState::from_weighted({{s1, 0.55}, {s2, 0.45}});
    CHECK_FALSE(belief_key(a) == belief_key(b));
    CHECK(belief_key(a, 5) == belief_key(b, 5));  // levels ceil(5p): 3 and 3
}
