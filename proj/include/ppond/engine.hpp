#pragma once
#include <memory>
#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ppond/model.hpp"
#include "ppond/rng.hpp"

namespace ppond {

// Deterministic-observation signature: bit k holds the truth value of the
// k-th observed fact (in fact-id order) in the successor state.
using ObsSignature = uint64_t;

struct TransitionEntry {
    State successor;
    double probability;
    ObsSignature signature;
};

struct ObservationBranch {
    ObsSignature signature;
    double probability;   // pr(o | a, b)
    BeliefState belief;   // b_a^o
};

// The belief-MDP over a grounded problem: applicability, transition
// expansion, exact belief update and sampling. Queries are safe from multiple
// threads; the transition cache synchronizes insertion internally. Sampling
// takes a caller-owned RNG stream so parallel runs stay independent.
class BeliefEngine {
public:
    explicit BeliefEngine(const Problem& problem, bool use_cache = true);

    const Problem& problem() const { return *problem_; }

    bool state_is_goal(const State& s) const { return problem_->is_goal_state(s); }
    bool belief_is_goal(const BeliefState& b) const;

    bool action_applicable_in_state(const State& s, ActionId a) const;

    // Actions whose preconditions hold in every support state, ascending id.
    std::vector<ActionId> applicable_actions(const BeliefState& b) const;

    // tr(s,a,.) expanded over the cross product of active conditional
    // effects, duplicate successors merged; sorted by successor state.
    std::shared_ptr<const std::vector<TransitionEntry>> transitions(const State& s,
                                                                    ActionId a) const;

    ObsSignature observation_signature(const State& s, ActionId a) const;

    double observation_probability(const BeliefState& b, ActionId a, ObsSignature o) const;

    // b_a^o; throws ModelError when pr(o|a,b) = 0.
    BeliefState update_belief(const BeliefState& b, ActionId a, ObsSignature o) const;

    // All positive-probability observation branches of (b, a) in one pass,
    // sorted by signature.
    std::vector<ObservationBranch> expand(const BeliefState& b, ActionId a) const;

    // Samples a successor and its deterministic observation. Preconditions of
    // `a` must hold in `s`.
    std::pair<State, ObsSignature> sample_transition(const State& s, ActionId a,
                                                     RngStream& rng) const;

    // C(b,a) = sum_s b(s) C(s,a); goal states contribute zero cost.
    double belief_cost(const BeliefState& b, ActionId a) const;

    double state_cost(const State& s, ActionId a) const {
        return state_is_goal(s) ? 0.0 : problem_->actions[a].cost;
    }

private:
    struct TransitionKey {
        State state;
        ActionId action;
        bool operator==(const TransitionKey& o) const {
            return action == o.action && state == o.state;
        }
    };
    struct TransitionKeyHash {
        std::size_t operator()(const TransitionKey& k) const {
            return static_cast<std::size_t>(fnv1a64(&k.action, sizeof(k.action), k.state.hash()));
        }
    };

    std::vector<TransitionEntry> compute_transitions(const State& s, ActionId a) const;

    const Problem* problem_;
    bool use_cache_;
    mutable std::unordered_map<TransitionKey, std::shared_ptr<const std::vector<TransitionEntry>>,
                               TransitionKeyHash>
        cache_;
    mutable std::mutex cache_mutex_;
};

}  // namespace ppond
