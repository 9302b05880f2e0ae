#pragma once
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "ppond/engine.hpp"

namespace ppond {

// Enumerated reachable belief space with transition structure, the ground
// truth for admissibility and convergence tests. Goal beliefs are terminal
// and not expanded.
struct BeliefSpaceIndex {
    struct Successor {
        ObsSignature signature;
        double probability;
        int successor;
    };
    struct Edge {
        ActionId action;
        double cost;  // C(b, a)
        std::vector<Successor> successors;
    };

    std::vector<BeliefState> beliefs;  // BFS discovery order; index 0 = b0
    std::unordered_map<BeliefKey, int, BeliefKeyHash> key_to_index;
    std::vector<std::vector<Edge>> edges;
    std::vector<char> goal;

    int size() const { return static_cast<int>(beliefs.size()); }
};

// BFS closure of b0 under applicable actions and positive-probability
// observations; throws CapExceededError beyond `cap` beliefs.
BeliefSpaceIndex enumerate_beliefs(const BeliefEngine& engine, long cap = 200000);

// Jacobi value iteration to residual < 1e-10; goal beliefs 0, dead ends inf.
std::vector<double> exact_values(const BeliefSpaceIndex& index);

// Greedy action per Bellman lookahead over oracle values; -1 for goal or
// dead-end beliefs. Tie-breaking matches the solver's (lowest action id).
ActionId oracle_policy_action(const BeliefSpaceIndex& index, const std::vector<double>& values,
                              int belief);

// Emits the belief index and values in the solver's table text format.
void write_oracle_values(std::ostream& os, const BeliefSpaceIndex& index,
                         const std::vector<double>& values, uint64_t problem_hash);

}  // namespace ppond
