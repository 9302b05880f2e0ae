#pragma once
#include <mutex>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "ppond/engine.hpp"

namespace ppond {

// Value function over the underlying (fully observable) MDP. Unvisited states
// default to 0, which keeps Q_MDP a lower bound before any top-up. Goal
// states are pinned at 0 and never backed up.
class MdpValueTable {
public:
    double value(const State& s) const;
    bool visited(const State& s) const;
    void set(const State& s, double v);
    void mark_visited(const State& s);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::unordered_map<State, double, StateHash> values_;
    std::unordered_set<State, StateHash> visited_;
};

// One Bellman backup at a non-goal state: min over applicable actions of
// C(s,a) + sum tr(s,a,s') V(s'). Returns (value, argmin action); dead ends
// yield (inf, -1). Ties resolve to the lowest action id.
std::pair<double, ActionId> mdp_bellman_backup(const State& s, MdpValueTable& table,
                                               const BeliefEngine& engine);

// Sampled RTDP trajectories from `start`, Bellman-backing-up along the way.
// Trajectories are capped at 10 * |P| steps.
void run_mdp_rtdp(const State& start, int iterations, MdpValueTable& table,
                  const BeliefEngine& engine, RngStream& rng);

// Stored value for visited states; otherwise tops the state up with 100
// fresh RTDP iterations first.
double mdp_value_on_demand(const State& s, MdpValueTable& table, const BeliefEngine& engine,
                           RngStream& rng, int topup_iterations = 100);

double qmdp_value(const BeliefState& b, MdpValueTable& table, const BeliefEngine& engine,
                  RngStream& rng, int topup_iterations = 100);
double most_likely_state_value(const BeliefState& b, MdpValueTable& table,
                               const BeliefEngine& engine, RngStream& rng,
                               int topup_iterations = 100);

}  // namespace ppond
