#pragma once
#include <iosfwd>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ppond/heuristic.hpp"

namespace ppond {

struct SolveConfig {
    uint64_t seed = 1;
    double time_limit_s = 300.0;      // trial wall time, evaluation excluded
    long max_trials = 1000000000;
    int eval_interval = 50;           // trials between convergence evaluations
    int trial_step_cap = 10000;
    int eval_step_cap = 500;          // beyond this an evaluation run counts failed
    int final_eval_iterations = 1000;
    double convergence_threshold = 0.01;
    int convergence_streak = 5;
    int discretize = 0;               // 0 = exact belief keys
    bool record_init_values = false;  // keep per-key heuristic init values (tests)
};

// Belief-key -> cost-to-go map with heuristic initialization on miss.
class BeliefValueTable {
public:
    BeliefValueTable(BeliefHeuristic& heuristic, int discretize, bool record_init = false)
        : heuristic_(&heuristic), discretize_(discretize), record_init_(record_init) {}

    BeliefKey key_of(const BeliefState& b) const { return belief_key(b, discretize_); }

    // Heuristic-initialized lookup.
    double value(const BeliefState& b);
    // Lookup without initialization; policy evaluation uses this and falls
    // back to the heuristic without mutating the table.
    std::optional<double> peek(const BeliefKey& k) const;
    void set(const BeliefKey& k, double v) { entries_[k] = v; }

    long size() const { return static_cast<long>(entries_.size()); }
    long init_count() const { return init_count_; }
    long hit_count() const { return hit_count_; }
    const std::unordered_map<BeliefKey, double, BeliefKeyHash>& entries() const {
        return entries_;
    }
    const std::unordered_map<BeliefKey, double, BeliefKeyHash>& init_values() const {
        return init_values_;
    }
    BeliefHeuristic& heuristic() { return *heuristic_; }
    int discretize() const { return discretize_; }

    // Line-delimited text format, keys sorted; header carries the problem
    // hash, heuristic kind and seed so runs can be resumed and inspected.
    void save(std::ostream& os, uint64_t problem_hash, uint64_t seed) const;
    void load(std::istream& is, const Problem& p);

private:
    BeliefHeuristic* heuristic_;
    int discretize_;
    bool record_init_;
    std::unordered_map<BeliefKey, double, BeliefKeyHash> entries_;
    std::unordered_map<BeliefKey, double, BeliefKeyHash> init_values_;
    long init_count_ = 0;
    long hit_count_ = 0;
};

struct TrialRecord {
    std::vector<BeliefKey> trajectory;
    int steps = 0;
    bool reached_goal = false;
    uint64_t seed = 0;
};

struct PolicyEvalReport {
    double mean_cost = 0.0;
    int failures = 0;
    int iterations = 0;
    std::vector<double> costs;
};

struct SolveStats {
    long trials = 0;
    double wall_seconds = 0.0;      // trial time, evaluation excluded
    double eval_seconds = 0.0;
    double mdp_init_seconds = 0.0;  // heuristic setup (initial MDP RTDP phase)
    bool converged = false;
    PolicyEvalReport final_eval;
    long table_size = 0;
    long init_count = 0;
    long hit_count = 0;
};

enum class EvalMode { Convergence, Final };

// Belief-space RTDP: forward trajectories from b0 guided by greedy one-step lookahead
// over heuristic-initialized values, with a backward re-backup pass per trial
// and periodic policy evaluation for convergence detection.
class RtdpBelSolver {
public:
    RtdpBelSolver(const BeliefEngine& engine, BeliefHeuristic& heuristic,
                  const SolveConfig& config);

    // argmin_a C(b,a) + sum_o pr(o|a,b) V(b_a^o); ties to the lowest action
    // id. Initializes missing successor values from the heuristic.
    std::pair<ActionId, double> greedy_action(const BeliefState& b);

    TrialRecord run_trial();

    PolicyEvalReport evaluate_policy(EvalMode mode);

    SolveStats solve();

    BeliefValueTable& table() { return table_; }
    const SolveConfig& config() const { return config_; }

private:
    // Per-evaluation memo: the table is frozen while evaluating, so the
    // greedy decision and its observation branches are a pure function of
    // the belief key.
    struct EvalDecision {
        ActionId action = -1;
        std::vector<ObservationBranch> branches;
    };
    using EvalMemo = std::unordered_map<BeliefKey, EvalDecision, BeliefKeyHash>;

    double successor_value_eval(const BeliefState& b);
    const EvalDecision& greedy_action_eval(const BeliefState& b, EvalMemo& memo);
    std::vector<State> enumerate_starts() const;

    const BeliefEngine* engine_;
    BeliefHeuristic* heuristic_;
    SolveConfig config_;
    BeliefValueTable table_;
    BeliefState b0_;
    RngStream trial_rng_;
    RngStream eval_rng_;
    uint64_t trial_counter_ = 0;
};

}  // namespace ppond
