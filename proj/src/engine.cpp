#include "ppond/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ppond {

BeliefEngine::BeliefEngine(const Problem& problem, bool use_cache)
    : problem_(&problem), use_cache_(use_cache) {
    for (const Action& a : problem.actions)
        if (a.observed_facts.size() > 64)
            throw ModelError("action '" + a.name + "' observes more than 64 facts");
}

bool BeliefEngine::belief_is_goal(const BeliefState& b) const {
    for (const auto& [state, prob] : b.support())
        if (!problem_->is_goal_state(state)) return false;
    return true;
}

bool BeliefEngine::action_applicable_in_state(const State& s, ActionId a) const {
    for (FactId f : problem_->actions[a].preconditions)
        if (!s.test(f)) return false;
    return true;
}

std::vector<ActionId> BeliefEngine::applicable_actions(const BeliefState& b) const {
    std::vector<ActionId> out;
    for (const Action& a : problem_->actions) {
        bool ok = true;
        for (const auto& [state, prob] : b.support()) {
            if (!action_applicable_in_state(state, a.id)) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(a.id);
    }
    return out;
}

ObsSignature BeliefEngine::observation_signature(const State& s, ActionId a) const {
    const Action& action = problem_->actions[a];
    ObsSignature sig = 0;
    for (std::size_t i = 0; i < action.observed_facts.size(); ++i)
        if (s.test(action.observed_facts[i])) sig |= (ObsSignature{1} << i);
    return sig;
}

std::vector<TransitionEntry> BeliefEngine::compute_transitions(const State& s, ActionId a) const {
    const Action& action = problem_->actions[a];

    // Active conditional effects: conditions evaluated in s, effects applied
    // simultaneously (independent composition across effects).
    std::vector<const ConditionalEffect*> active;
    for (const ConditionalEffect& e : action.effects) {
        bool holds = true;
        for (FactId f : e.condition)
            if (!s.test(f)) {
                holds = false;
                break;
            }
        if (holds) active.push_back(&e);
    }

    struct Partial {
        std::vector<FactId> adds;
        double probability;
    };
    std::vector<Partial> partials{{{}, 1.0}};
    for (const ConditionalEffect* e : active) {
        std::vector<Partial> next;
        next.reserve(partials.size() * e->outcomes.size());
        for (const Partial& p : partials) {
            for (const ProbabilisticOutcome& o : e->outcomes) {
                Partial q;
                q.probability = p.probability * o.probability;
                q.adds = p.adds;
                q.adds.insert(q.adds.end(), o.added_facts.begin(), o.added_facts.end());
                next.push_back(std::move(q));
            }
        }
        partials = std::move(next);
    }

    std::map<State, double> merged;
    for (Partial& p : partials) {
        std::sort(p.adds.begin(), p.adds.end());
        for (FactId f : p.adds)
            if (std::binary_search(p.adds.begin(), p.adds.end(), problem_->complement(f)))
                throw ModelError("action '" + action.name +
                                 "' adds a fact and its complement simultaneously");
        State succ = s;
        for (FactId f : p.adds) succ.set_pair(f, problem_->complement(f), true);
        merged[std::move(succ)] += p.probability;
    }

    std::vector<TransitionEntry> out;
    out.reserve(merged.size());
    for (auto& [succ, prob] : merged)
        out.push_back({succ, prob, observation_signature(succ, a)});
    return out;
}

std::shared_ptr<const std::vector<TransitionEntry>> BeliefEngine::transitions(const State& s,
                                                                              ActionId a) const {
    if (!use_cache_)
        return std::make_shared<const std::vector<TransitionEntry>>(compute_transitions(s, a));
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find({s, a});
        if (it != cache_.end()) return it->second;
    }
    auto entry = std::make_shared<const std::vector<TransitionEntry>>(compute_transitions(s, a));
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.emplace(TransitionKey{s, a}, std::move(entry)).first->second;
}

double BeliefEngine::observation_probability(const BeliefState& b, ActionId a,
                                             ObsSignature o) const {
    double total = 0.0;
    for (const auto& [state, prob] : b.support()) {
        auto trs = transitions(state, a);
        for (const TransitionEntry& t : *trs)
            if (t.signature == o) total += prob * t.probability;
    }
    return total;
}

BeliefState BeliefEngine::update_belief(const BeliefState& b, ActionId a, ObsSignature o) const {
    std::map<State, double> accum;
    double total = 0.0;
    for (const auto& [state, prob] : b.support()) {
        auto trs = transitions(state, a);
        for (const TransitionEntry& t : *trs) {
            if (t.signature != o) continue;
            accum[t.successor] += prob * t.probability;
            total += prob * t.probability;
        }
    }
    if (total <= 0.0)
        throw ModelError("impossible observation for action '" + problem_->actions[a].name + "'");
    std::vector<std::pair<State, double>> entries;
    entries.reserve(accum.size());
    for (auto& [state, prob] : accum) entries.emplace_back(state, prob / total);
    return BeliefState::from_weighted(std::move(entries));
}

std::vector<ObservationBranch> BeliefEngine::expand(const BeliefState& b, ActionId a) const {
    std::map<ObsSignature, std::map<State, double>> branches;
    for (const auto& [state, prob] : b.support()) {
        auto trs = transitions(state, a);
        for (const TransitionEntry& t : *trs)
            branches[t.signature][t.successor] += prob * t.probability;
    }
    std::vector<ObservationBranch> out;
    out.reserve(branches.size());
    for (auto& [sig, states] : branches) {
        double mass = 0.0;
        for (const auto& [state, prob] : states) mass += prob;
        std::vector<std::pair<State, double>> entries;
        entries.reserve(states.size());
        for (auto& [state, prob] : states) entries.emplace_back(state, prob / mass);
        out.push_back({sig, mass, BeliefState::from_weighted(std::move(entries))});
    }
    return out;
}

std::pair<State, ObsSignature> BeliefEngine::sample_transition(const State& s, ActionId a,
                                                               RngStream& rng) const {
    if (!action_applicable_in_state(s, a))
        throw ModelError("sample_transition: preconditions of '" + problem_->actions[a].name +
                         "' do not hold");
    const Action& action = problem_->actions[a];
    State succ = s;
    std::vector<FactId> adds;
    for (const ConditionalEffect& e : action.effects) {
        bool holds = true;
        for (FactId f : e.condition)
            if (!s.test(f)) {
                holds = false;
                break;
            }
        if (!holds) continue;
        const ProbabilisticOutcome* chosen = &e.outcomes[0];
        if (e.outcomes.size() > 1) {
            double u = rng.next_double();
            double acc = 0.0;
            for (const ProbabilisticOutcome& o : e.outcomes) {
                acc += o.probability;
                chosen = &o;
                if (u < acc) break;
            }
        }
        adds.insert(adds.end(), chosen->added_facts.begin(), chosen->added_facts.end());
    }
    std::sort(adds.begin(), adds.end());
    for (FactId f : adds)
        if (std::binary_search(adds.begin(), adds.end(), problem_->complement(f)))
            throw ModelError("action '" + action.name +
                             "' adds a fact and its complement simultaneously");
    for (FactId f : adds) succ.set_pair(f, problem_->complement(f), true);
    return {succ, observation_signature(succ, a)};
}

double BeliefEngine::belief_cost(const BeliefState& b, ActionId a) const {
    double nongoal = 0.0;
    for (const auto& [state, prob] : b.support())
        if (!problem_->is_goal_state(state)) nongoal += prob;
    return problem_->actions[a].cost * nongoal;
}

}  // namespace ppond
