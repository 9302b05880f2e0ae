#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ppond/generators.hpp"
#include "ppond/heuristic.hpp"
#include "ppond/oracle.hpp"
#include "ppond/parser.hpp"
#include "ppond/solver.hpp"

namespace py = pybind11;
using namespace ppond;

namespace {

py::dict solve_problem(const Problem& problem, const std::string& heuristic, uint64_t seed,
                       double time_limit, int eval_interval, long max_trials, int discretize) {
    BeliefEngine engine(problem);
    HeuristicOptions hopts;
    hopts.seed = seed;
    auto h = make_heuristic(parse_heuristic(heuristic), engine, hopts);
    SolveConfig config;
    config.seed = seed;
    config.time_limit_s = time_limit;
    config.eval_interval = eval_interval;
    config.max_trials = max_trials;
    config.discretize = discretize;
    RtdpBelSolver solver(engine, *h, config);
    SolveStats stats = solver.solve();
    py::dict out;
    out["trials"] = stats.trials;
    out["wall_seconds"] = stats.wall_seconds;
    out["eval_seconds"] = stats.eval_seconds;
    out["mdp_init_seconds"] = stats.mdp_init_seconds;
    out["converged"] = stats.converged;
    out["mean_cost"] = stats.final_eval.mean_cost;
    out["failures"] = stats.final_eval.failures;
    out["table_size"] = stats.table_size;
    out["value_at_b0"] = solver.table().value(problem.initial_belief());
    return out;
}

py::dict oracle_solve(const Problem& problem, long cap) {
    BeliefEngine engine(problem);
    BeliefSpaceIndex index = enumerate_beliefs(engine, cap);
    std::vector<double> values = exact_values(index);
    py::dict out;
    out["beliefs"] = index.size();
    out["v_star"] = values[0];
    return out;
}

double heuristic_at_b0(const Problem& problem, const std::string& heuristic, uint64_t seed) {
    BeliefEngine engine(problem);
    HeuristicOptions hopts;
    hopts.seed = seed;
    auto h = make_heuristic(parse_heuristic(heuristic), engine, hopts);
    return h->value(problem.initial_belief());
}

py::tuple generated_tuple(const GeneratedProblem& g) {
    return py::make_tuple(g.domain_text, g.problem_text, g.name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Goal-based contingent-problem solver: parsing, heuristics, belief-space RTDP, exact oracle";

    py::class_<Problem>(m, "Problem")
        .def_property_readonly("fact_count", &Problem::fact_count)
        .def_property_readonly("action_count",
                               [](const Problem& p) { return p.actions.size(); })
        .def_property_readonly("name", [](const Problem& p) { return p.problem_name; })
        .def_property_readonly("initial_state_count",
                               [](const Problem& p) { return p.initial_belief().size(); })
        .def("__repr__", [](const Problem& p) {
            return "<Problem " + p.problem_name + " |P|=" + std::to_string(p.fact_count()) +
                   " |A|=" + std::to_string(p.actions.size()) + ">";
        });

    m.def("parse", &parse_problem, py::arg("domain_text"), py::arg("problem_text"),
          py::arg("domain_file") = "domain", py::arg("problem_file") = "problem");
    m.def("serialize", &serialize_problem, py::arg("problem"));
    m.def("structurally_equal", [](const Problem& a, const Problem& b) {
        return problems_structurally_equal(a, b);
    });

    m.def("generate_localize",
          [](int n, bool stochastic) { return generated_tuple(generate_localize(n, stochastic)); },
          py::arg("n"), py::arg("stochastic") = false);
    m.def("generate_wumpus",
          [](int n, bool uniform) { return generated_tuple(generate_wumpus(n, uniform)); },
          py::arg("n"), py::arg("uniform") = true);
    m.def("generate_maze",
          [](int n, int bottlenecks, int detour) {
              return generated_tuple(generate_maze(n, bottlenecks, detour));
          },
          py::arg("n"), py::arg("bottlenecks") = 1, py::arg("detour") = 0);

    m.def("solve", &solve_problem, py::arg("problem"), py::arg("heuristic") = "hff-b",
          py::arg("seed") = 1, py::arg("time_limit") = 300.0, py::arg("eval_interval") = 50,
          py::arg("max_trials") = 1000000000L, py::arg("discretize") = 0);
    m.def("oracle", &oracle_solve, py::arg("problem"), py::arg("cap") = 200000L);
    m.def("heuristic_value", &heuristic_at_b0, py::arg("problem"), py::arg("heuristic"),
          py::arg("seed") = 1);

    m.attr("__version__") = "0.1.0";
}
