#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "ppond/generators.hpp"
#include "ppond/heuristic.hpp"
#include "ppond/oracle.hpp"
#include "ppond/parser.hpp"
#include "ppond/relaxation.hpp"
#include "ppond/solver.hpp"

namespace {

constexpr const char* kCsvVersion = "# ppond-csv v1";
constexpr const char* kCsvHeader =
    "problem,heuristic,seed_count,mean_time_s,mean_trials,converged_fraction,mean_cost,"
    "failures,mean_mdp_init_s";

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ppond::Problem load_problem(const std::string& domain_path, const std::string& problem_path) {
    return ppond::parse_problem(read_file(domain_path), read_file(problem_path), domain_path,
                                problem_path);
}

// Reachable world states from the initial support, closed under transitions.
long count_states(const ppond::BeliefEngine& engine, long cap) {
    std::unordered_set<ppond::State, ppond::StateHash> seen;
    std::deque<ppond::State> frontier;
    ppond::BeliefState b0 = engine.problem().initial_belief();
    for (const auto& [state, prob] : b0.support())
        if (seen.insert(state).second) frontier.push_back(state);
    while (!frontier.empty()) {
        ppond::State s = frontier.front();
        frontier.pop_front();
        if (engine.state_is_goal(s)) continue;
        for (const ppond::Action& a : engine.problem().actions) {
            if (!engine.action_applicable_in_state(s, a.id)) continue;
            for (const ppond::TransitionEntry& t : *engine.transitions(s, a.id)) {
                if (seen.insert(t.successor).second) {
                    if (static_cast<long>(seen.size()) > cap) return -1;
                    frontier.push_back(t.successor);
                }
            }
        }
    }
    return static_cast<long>(seen.size());
}

struct RunResult {
    ppond::SolveStats stats;
    std::string table_text;
};

RunResult run_solve(const ppond::Problem& problem, ppond::HeuristicKind kind,
                    const ppond::SolveConfig& config, const std::string& resume_path,
                    bool trace_relaxation) {
    ppond::BeliefEngine engine(problem);
    ppond::HeuristicOptions hopts;
    hopts.seed = config.seed;
    auto heuristic = ppond::make_heuristic(kind, engine, hopts);
    ppond::RtdpBelSolver solver(engine, *heuristic, config);
    if (!resume_path.empty()) {
        std::ifstream in(resume_path);
        if (!in) throw std::runtime_error("cannot open '" + resume_path + "'");
        solver.table().load(in, problem);
    }
    if (trace_relaxation) {
        ppond::RelaxationHeuristics relax(problem);
        ppond::BeliefState b0 = problem.initial_belief();
        relax.dump_belief_graph(relax.build_belief_graph(b0), std::cerr);
        for (const auto& [state, prob] : b0.support())
            relax.dump_state_graph(relax.build_state_graph(state), std::cerr);
    }
    RunResult out;
    out.stats = solver.solve();
    std::ostringstream table;
    solver.table().save(table, ppond::problem_hash(problem), config.seed);
    out.table_text = table.str();
    return out;
}

std::string csv_row(const std::string& problem, const std::string& heuristic, int seed_count,
                    double mean_time, double mean_trials, double converged_fraction,
                    double mean_cost, double failures, double mean_mdp_init) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.3f,%.9g,%.9g,%.9g,%.9g,%.3f", problem.c_str(),
                  heuristic.c_str(), seed_count, mean_time, mean_trials, converged_fraction,
                  mean_cost, failures, mean_mdp_init);
    return buf;
}

int default_jobs() {
    if (const char* env = std::getenv("PPOND_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ppond: a solver for goal-based contingent problems with sensing"};
    app.require_subcommand(1);

    // validate
    std::string v_domain, v_problem;
    long v_state_cap = 1000000;
    auto* validate = app.add_subcommand("validate", "parse and ground a model, print sizes");
    validate->add_option("domain", v_domain)->required();
    validate->add_option("problem", v_problem)->required();
    validate->add_option("--state-cap", v_state_cap, "stop state enumeration beyond this");

    // solve
    std::string s_domain, s_problem, s_heuristic = "hff-b", s_out, s_resume;
    ppond::SolveConfig s_config;
    bool s_strict = false, s_trace = false;
    auto* solve = app.add_subcommand("solve", "run belief-space RTDP and report one CSV row");
    solve->add_option("domain", s_domain)->required();
    solve->add_option("problem", s_problem)->required();
    solve->add_option("--heuristic", s_heuristic,
                      "flat|ml|qmdp|hmax-s|hadd-s|hff-s|hmax-b|hadd-b|hff-b");
    solve->add_option("--seed", s_config.seed);
    solve->add_option("--time-limit", s_config.time_limit_s, "trial seconds, evaluation excluded");
    solve->add_option("--eval-interval", s_config.eval_interval);
    solve->add_option("--max-trials", s_config.max_trials);
    solve->add_option("--discretize", s_config.discretize, "belief key level count (0 = exact)");
    solve->add_option("--out", s_out, "write the value table here");
    solve->add_option("--resume", s_resume, "preload a value table");
    solve->add_flag("--strict", s_strict, "exit 3 when not converged");
    solve->add_flag("--trace-relaxation", s_trace, "dump relaxed graphs for b0 to stderr");

    // benchmark
    std::string b_manifest, b_out;
    int b_runs = 10, b_jobs = 0;
    uint64_t b_seed = 1;
    double b_time_limit = 300.0;
    auto* benchmark = app.add_subcommand("benchmark", "run seeded (problem, heuristic) pairs");
    benchmark->add_option("manifest", b_manifest)->required();
    benchmark->add_option("--runs", b_runs, "seeded runs per pair");
    benchmark->add_option("--out", b_out, "CSV path (stdout when omitted)");
    benchmark->add_option("--seed", b_seed, "base seed");
    benchmark->add_option("--jobs", b_jobs, "worker threads (default $PPOND_THREADS)");
    benchmark->add_option("--time-limit", b_time_limit);

    // generate
    std::string g_family, g_out = ".";
    int g_n = 5, g_bottlenecks = 1, g_detour = 0;
    bool g_stochastic = false, g_nonuniform = false;
    auto* generate = app.add_subcommand("generate", "emit a benchmark domain/problem pair");
    generate->add_option("family", g_family, "localize|wumpus|maze")->required();
    generate->add_option("--n", g_n, "grid size")->required();
    generate->add_flag("--stochastic", g_stochastic, "localize: lossy north/east moves");
    generate->add_flag("--nonuniform", g_nonuniform, "wumpus: 0.7/0.3 hazard priors");
    generate->add_option("--bottlenecks", g_bottlenecks, "maze: bottleneck count");
    generate->add_option("--detour", g_detour, "maze: observation-cell row offset (0 = middle row)");
    generate->add_option("--out", g_out, "output directory");

    // oracle
    std::string o_domain, o_problem, o_out;
    long o_cap = 200000;
    auto* oracle = app.add_subcommand("oracle", "enumerate beliefs and solve exactly");
    oracle->add_option("domain", o_domain)->required();
    oracle->add_option("problem", o_problem)->required();
    oracle->add_option("--cap", o_cap, "belief enumeration cap");
    oracle->add_option("--out", o_out, "write exact values here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            ppond::Problem problem = load_problem(v_domain, v_problem);
            ppond::BeliefEngine engine(problem);
            std::cout << "|P| " << problem.fact_count() << "\n";
            std::cout << "|A| " << problem.actions.size() << "\n";
            long states = count_states(engine, v_state_cap);
            if (states >= 0)
                std::cout << "|S| " << states << "\n";
            else
                std::cout << "|S| unknown (cap exceeded)\n";
            std::cout << "|S0| " << problem.initial_belief().size() << "\n";
            return 0;
        }

        if (*solve) {
            ppond::Problem problem = load_problem(s_domain, s_problem);
            ppond::HeuristicKind kind = ppond::parse_heuristic(s_heuristic);
            RunResult result = run_solve(problem, kind, s_config, s_resume, s_trace);
            if (!s_out.empty()) {
                std::ofstream out(s_out);
                if (!out) throw std::runtime_error("cannot write '" + s_out + "'");
                out << result.table_text;
            }
            std::cout << kCsvVersion << "\n" << kCsvHeader << "\n";
            std::cout << csv_row(problem.problem_name, s_heuristic, 1,
                                 result.stats.wall_seconds,
                                 static_cast<double>(result.stats.trials),
                                 result.stats.converged ? 1.0 : 0.0,
                                 result.stats.final_eval.mean_cost,
                                 static_cast<double>(result.stats.final_eval.failures),
                                 result.stats.mdp_init_seconds)
                      << "\n";
            if (s_strict && !result.stats.converged) return 3;
            return 0;
        }

        if (*benchmark) {
            struct Pair {
                std::string domain, problem, heuristic;
            };
            std::vector<Pair> pairs;
            std::ifstream in(b_manifest);
            if (!in) throw std::runtime_error("cannot open '" + b_manifest + "'");
            std::string line;
            while (std::getline(in, line)) {
                std::istringstream ls(line);
                Pair pr;
                if (!(ls >> pr.domain)) continue;
                if (pr.domain[0] == '#') continue;
                if (!(ls >> pr.problem >> pr.heuristic))
                    throw std::runtime_error("manifest line needs: domain problem heuristic");
                pairs.push_back(std::move(pr));
            }

            std::vector<std::string> rows(pairs.size());
            std::atomic<std::size_t> next{0};
            int jobs = b_jobs > 0 ? b_jobs : default_jobs();
            auto worker = [&]() {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= pairs.size()) return;
                    const Pair& pr = pairs[i];
                    ppond::Problem problem = load_problem(pr.domain, pr.problem);
                    ppond::HeuristicKind kind = ppond::parse_heuristic(pr.heuristic);
                    double time_sum = 0, trial_sum = 0, conv_sum = 0, cost_sum = 0,
                           fail_sum = 0, mdp_sum = 0;
                    for (int r = 0; r < b_runs; ++r) {
                        ppond::SolveConfig config;
                        config.seed = b_seed + static_cast<uint64_t>(r);
                        config.time_limit_s = b_time_limit;
                        RunResult res = run_solve(problem, kind, config, "", false);
                        time_sum += res.stats.wall_seconds;
                        trial_sum += static_cast<double>(res.stats.trials);
                        conv_sum += res.stats.converged ? 1.0 : 0.0;
                        cost_sum += res.stats.final_eval.mean_cost;
                        fail_sum += res.stats.final_eval.failures;
                        mdp_sum += res.stats.mdp_init_seconds;
                    }
                    double n = std::max(1, b_runs);
                    rows[i] = csv_row(problem.problem_name, pr.heuristic, b_runs, time_sum / n,
                                      trial_sum / n, conv_sum / n, cost_sum / n, fail_sum / n,
                                      mdp_sum / n);
                }
            };
            std::vector<std::thread> threads;
            for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
            for (std::thread& t : threads) t.join();

            std::ostringstream csv;
            csv << kCsvVersion << "\n" << kCsvHeader << "\n";
            for (const std::string& row : rows) csv << row << "\n";
            if (b_out.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream out(b_out);
                if (!out) throw std::runtime_error("cannot write '" + b_out + "'");
                out << csv.str();
            }
            return 0;
        }

        if (*generate) {
            ppond::GeneratedProblem gen;
            if (g_family == "localize")
                gen = ppond::generate_localize(g_n, g_stochastic);
            else if (g_family == "wumpus")
                gen = ppond::generate_wumpus(g_n, !g_nonuniform);
            else if (g_family == "maze")
                gen = ppond::generate_maze(g_n, g_bottlenecks, g_detour);
            else
                throw std::runtime_error("unknown family '" + g_family + "'");
            std::string dpath = g_out + "/" + gen.name + ".ppond";
            std::string ppath = g_out + "/" + gen.name + ".ppondp";
            std::ofstream df(dpath), pf(ppath);
            if (!df || !pf) throw std::runtime_error("cannot write into '" + g_out + "'");
            df << gen.domain_text;
            pf << gen.problem_text;
            std::cout << dpath << "\n" << ppath << "\n";
            return 0;
        }

        if (*oracle) {
            ppond::Problem problem = load_problem(o_domain, o_problem);
            ppond::BeliefEngine engine(problem);
            ppond::BeliefSpaceIndex index = ppond::enumerate_beliefs(engine, o_cap);
            std::vector<double> values = ppond::exact_values(index);
            std::cout << "|B| " << index.size() << "\n";
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.12g", values[0]);
            std::cout << "V* " << buf << "\n";
            if (!o_out.empty()) {
                std::ofstream out(o_out);
                if (!out) throw std::runtime_error("cannot write '" + o_out + "'");
                ppond::write_oracle_values(out, index, values, ppond::problem_hash(problem));
            }
            return 0;
        }
    } catch (const ppond::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const ppond::CapExceededError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
