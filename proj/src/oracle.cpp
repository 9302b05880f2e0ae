#include "ppond/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>

namespace ppond {

BeliefSpaceIndex enumerate_beliefs(const BeliefEngine& engine, long cap) {
    BeliefSpaceIndex index;
    BeliefState b0 = engine.problem().initial_belief();
    index.beliefs.push_back(b0);
    index.key_to_index.emplace(belief_key(b0), 0);
    index.goal.push_back(engine.belief_is_goal(b0) ? 1 : 0);

    std::deque<int> frontier{0};
    while (!frontier.empty()) {
        int bi = frontier.front();
        frontier.pop_front();
        if (static_cast<int>(index.edges.size()) <= bi) index.edges.resize(bi + 1);
        if (index.goal[bi]) continue;  // terminal
        BeliefState b = index.beliefs[bi];
        for (ActionId a : engine.applicable_actions(b)) {
            BeliefSpaceIndex::Edge edge;
            edge.action = a;
            edge.cost = engine.belief_cost(b, a);
            for (const ObservationBranch& br : engine.expand(b, a)) {
                BeliefKey key = belief_key(br.belief);
                auto [it, fresh] =
                    index.key_to_index.emplace(std::move(key), index.size());
                if (fresh) {
                    if (index.size() >= static_cast<int>(cap))
                        throw CapExceededError("belief enumeration exceeded cap of " +
                                               std::to_string(cap));
                    index.beliefs.push_back(br.belief);
                    index.goal.push_back(engine.belief_is_goal(br.belief) ? 1 : 0);
                    frontier.push_back(it->second);
                }
                edge.successors.push_back({br.signature, br.probability, it->second});
            }
            index.edges[bi].push_back(std::move(edge));
        }
    }
    index.edges.resize(index.size());
    return index;
}

std::vector<double> exact_values(const BeliefSpaceIndex& index) {
    const int n = index.size();

    // V*(b) is finite exactly when some policy reaches the goal with
    // probability one. That is almost-sure reachability: the usual double
    // fixpoint, where an action counts only if every branch stays inside the
    // candidate set and some branch makes progress toward the goal.
    std::vector<char> candidate(n, 1), solvable(n, 0);
    for (;;) {
        std::fill(solvable.begin(), solvable.end(), 0);
        for (int bi = 0; bi < n; ++bi) solvable[bi] = index.goal[bi];
        bool grew = true;
        while (grew) {
            grew = false;
            for (int bi = 0; bi < n; ++bi) {
                if (solvable[bi] || !candidate[bi]) continue;
                for (const BeliefSpaceIndex::Edge& e : index.edges[bi]) {
                    bool inside = !e.successors.empty(), progress = false;
                    for (const BeliefSpaceIndex::Successor& s : e.successors) {
                        if (!candidate[s.successor]) {
                            inside = false;
                            break;
                        }
                        if (solvable[s.successor]) progress = true;
                    }
                    if (inside && progress) {
                        solvable[bi] = 1;
                        grew = true;
                        break;
                    }
                }
            }
        }
        if (solvable == candidate) break;
        candidate = solvable;
    }

    std::vector<double> values(n, 0.0), next(n, 0.0);
    for (int bi = 0; bi < n; ++bi)
        if (!solvable[bi]) values[bi] = kInfinity;
    constexpr double kResidual = 1e-10;
    constexpr long kMaxSweeps = 2000000;
    for (long sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double residual = 0.0;
        for (int bi = 0; bi < n; ++bi) {
            if (index.goal[bi]) {
                next[bi] = 0.0;
                continue;
            }
            if (!solvable[bi]) {
                next[bi] = kInfinity;
                continue;
            }
            double best = kInfinity;
            for (const BeliefSpaceIndex::Edge& e : index.edges[bi]) {
                double q = e.cost;
                for (const BeliefSpaceIndex::Successor& s : e.successors) {
                    if (values[s.successor] == kInfinity) {
                        q = kInfinity;
                        break;
                    }
                    q += s.probability * values[s.successor];
                }
                best = std::min(best, q);
            }
            next[bi] = best;
            double diff = (best == kInfinity && values[bi] == kInfinity)
                              ? 0.0
                              : std::abs(best - values[bi]);
            residual = std::max(residual, diff);
        }
        values.swap(next);
        if (residual < kResidual) return values;
    }
    throw ModelError("exact_values: value iteration did not converge");
}

ActionId oracle_policy_action(const BeliefSpaceIndex& index, const std::vector<double>& values,
                              int belief) {
    if (index.goal[belief]) return -1;
    ActionId best_action = -1;
    double best = kInfinity;
    for (const BeliefSpaceIndex::Edge& e : index.edges[belief]) {
        double q = e.cost;
        for (const BeliefSpaceIndex::Successor& s : e.successors) {
            if (values[s.successor] == kInfinity) {
                q = kInfinity;
                break;
            }
            q += s.probability * values[s.successor];
        }
        if (q < best) {
            best = q;
            best_action = e.action;
        }
    }
    return best_action;
}

void write_oracle_values(std::ostream& os, const BeliefSpaceIndex& index,
                         const std::vector<double>& values, uint64_t problem_hash) {
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(problem_hash));
    os << "# ppond-table v1\n";
    os << "# problem " << hex << "\n";
    os << "# heuristic exact\n";
    os << "# seed 0\n";
    os << "# discretize 0\n";
    std::vector<std::pair<std::string, double>> lines;
    lines.reserve(index.beliefs.size());
    for (int i = 0; i < index.size(); ++i)
        lines.emplace_back(belief_key(index.beliefs[i]).to_string(), values[i]);
    std::sort(lines.begin(), lines.end());
    for (const auto& [key, value] : lines) {
        char buf[64];
        if (value == kInfinity)
            os << key << " inf\n";
        else {
            std::snprintf(buf, sizeof(buf), "%.17g", value);
            os << key << ' ' << buf << "\n";
        }
    }
}

}  // namespace ppond
