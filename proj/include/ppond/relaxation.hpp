#pragma once
#include <iosfwd>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "ppond/model.hpp"

namespace ppond {

enum class RelaxKind { Max, Add, Ff };

// Expected number of executions before a probability-p effect delivers its
// fact: ceil(1/p). Deterministic effects land one layer later as usual.
int effect_level_offset(double probability);

struct StateAchiever {
    ActionId parent = -1;  // -1 = initially true
    int fire_layer = -1;
    int executions = 1;
    const SplitVariant* variant = nullptr;
};

// Layered monotone fact sets for one state, with first-achiever bookkeeping.
struct RelaxedStateGraph {
    std::vector<Bitset> layers;       // F_0..F_k
    std::vector<int> first_level;     // per fact, -1 if never reached
    std::vector<StateAchiever> achiever;
    int goal_layer = -1;              // -1 = goal unreached

    bool goal_reached() const { return goal_layer >= 0; }
};

enum class AttributionKind { InitiallyTrue, Unconditional, LastConditional, Sensing };

struct BeliefAchiever {
    ActionId actor = -1;
    int fire_layer = -1;
    int executions = 1;
    AttributionKind kind = AttributionKind::InitiallyTrue;
    const SplitVariant* variant = nullptr;  // null for sensing attributions
};

// Per-state layered fact sets over the belief support. Actions gate on the
// intersection over still-valid states; sensing actions eliminate states that
// disagree with the most likely state on an observed fact.
struct RelaxedBeliefGraph {
    std::vector<State> states;                     // support, sorted
    int s_ml = 0;                                  // index into states
    std::vector<std::vector<Bitset>> state_layers; // [state][layer]
    std::vector<std::vector<int>> valid_at;        // [layer] -> valid state indices
    std::vector<int> inter_first_level;            // per fact, over then-valid states
    std::vector<BeliefAchiever> achiever;
    int goal_layer = -1;

    bool goal_reached() const { return goal_layer >= 0; }
};

// Delete-relaxation heuristics with per-state and (s_ml, support)-keyed
// caches. Graph construction is per-call and isolated; caches are
// internally synchronized.
class RelaxationHeuristics {
public:
    explicit RelaxationHeuristics(const Problem& problem);

    const Problem& problem() const { return *problem_; }

    RelaxedStateGraph build_state_graph(const State& s) const;
    RelaxedBeliefGraph build_belief_graph(const BeliefState& b) const;

    // Backward chaining through first achievers; stochastic achievers are
    // counted once per expected execution, so plan length never drops below
    // the goal layer. Requires a goal-reaching graph.
    std::vector<ActionId> extract_relaxed_plan(const RelaxedStateGraph& g) const;
    std::vector<ActionId> extract_relaxed_plan(const RelaxedBeliefGraph& g) const;

    double state_value(const State& s, RelaxKind kind);
    double weighted_value(const BeliefState& b, RelaxKind kind);
    double belief_value(const BeliefState& b, RelaxKind kind);

    void dump_state_graph(const RelaxedStateGraph& g, std::ostream& os) const;
    void dump_belief_graph(const RelaxedBeliefGraph& g, std::ostream& os) const;

    long state_cache_size() const;
    long belief_cache_size() const;

private:
    struct Triple {
        double hmax = kInfinity, hadd = kInfinity, hff = kInfinity;
    };

    Triple compute_state_triple(const State& s) const;
    Triple compute_belief_triple(const BeliefState& b) const;
    Triple state_triple(const State& s);

    struct BeliefCacheKey {
        State s_ml;
        std::vector<State> support;
        bool operator==(const BeliefCacheKey& o) const {
            return s_ml == o.s_ml && support == o.support;
        }
    };
    struct BeliefCacheKeyHash {
        std::size_t operator()(const BeliefCacheKey& k) const {
            uint64_t h = k.s_ml.hash();
            for (const State& s : k.support) {
                uint64_t sh = s.hash();
                h = fnv1a64(&sh, sizeof(sh), h);
            }
            return static_cast<std::size_t>(h);
        }
    };

    const Problem* problem_;
    Bitset goal_mask_;
    // Per-variant marginal add probability of each fact, with its offset.
    std::vector<std::vector<std::pair<FactId, int>>> variant_offsets_;
    std::vector<std::vector<std::pair<FactId, double>>> variant_marginals_;

    mutable std::mutex mutex_;
    std::unordered_map<State, Triple, StateHash> state_cache_;
    std::unordered_map<BeliefCacheKey, Triple, BeliefCacheKeyHash> belief_cache_;
};

}  // namespace ppond
