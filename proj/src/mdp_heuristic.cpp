#include "ppond/mdp_heuristic.hpp"

namespace ppond {

double MdpValueTable::value(const State& s) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = values_.find(s);
    return it == values_.end() ? 0.0 : it->second;
}

bool MdpValueTable::visited(const State& s) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return visited_.count(s) > 0;
}

void MdpValueTable::set(const State& s, double v) {
    std::lock_guard<std::mutex> lock(mutex_);
    values_[s] = v;
}

void MdpValueTable::mark_visited(const State& s) {
    std::lock_guard<std::mutex> lock(mutex_);
    visited_.insert(s);
}

std::size_t MdpValueTable::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return values_.size();
}

std::pair<double, ActionId> mdp_bellman_backup(const State& s, MdpValueTable& table,
                                               const BeliefEngine& engine) {
    const Problem& p = engine.problem();
    double best = kInfinity;
    ActionId best_action = -1;
    for (const Action& a : p.actions) {
        if (!engine.action_applicable_in_state(s, a.id)) continue;
        double q = a.cost;
        for (const TransitionEntry& t : *engine.transitions(s, a.id))
            if (!engine.state_is_goal(t.successor)) q += t.probability * table.value(t.successor);
        if (q < best) {
            best = q;
            best_action = a.id;
        }
    }
    table.set(s, best);
    return {best, best_action};
}

void run_mdp_rtdp(const State& start, int iterations, MdpValueTable& table,
                  const BeliefEngine& engine, RngStream& rng) {
    const int step_cap = 10 * engine.problem().fact_count();
    for (int it = 0; it < iterations; ++it) {
        State s = start;
        for (int step = 0; step < step_cap; ++step) {
            if (engine.state_is_goal(s)) break;
            table.mark_visited(s);
            auto [value, action] = mdp_bellman_backup(s, table, engine);
            if (action < 0) break;  // dead end, value pinned at infinity
            s = engine.sample_transition(s, action, rng).first;
        }
    }
}

double mdp_value_on_demand(const State& s, MdpValueTable& table, const BeliefEngine& engine,
                           RngStream& rng, int topup_iterations) {
    if (engine.state_is_goal(s)) return 0.0;
    if (!table.visited(s)) run_mdp_rtdp(s, topup_iterations, table, engine, rng);
    return table.value(s);
}

double qmdp_value(const BeliefState& b, MdpValueTable& table, const BeliefEngine& engine,
                  RngStream& rng, int topup_iterations) {
    double sum = 0.0;
    for (const auto& [state, prob] : b.support()) {
        double v = mdp_value_on_demand(state, table, engine, rng, topup_iterations);
        if (v == kInfinity) return kInfinity;
        sum += prob * v;
    }
    return sum;
}

double most_likely_state_value(const BeliefState& b, MdpValueTable& table,
                               const BeliefEngine& engine, RngStream& rng,
                               int topup_iterations) {
    return mdp_value_on_demand(most_likely_state(b), table, engine, rng, topup_iterations);
}

}  // namespace ppond
