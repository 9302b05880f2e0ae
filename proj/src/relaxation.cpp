#include "ppond/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace ppond {

namespace {
// Layer cap against malformed models; regular construction terminates at the
// fact-count * max-offset bound long before this.
constexpr int kMaxLayers = 100000;
}  // namespace

int effect_level_offset(double probability) {
    if (!(probability > 0.0)) throw ModelError("effect_level_offset: probability must be positive");
    return static_cast<int>(std::ceil(1.0 / probability - 1e-9));
}

RelaxationHeuristics::RelaxationHeuristics(const Problem& problem) : problem_(&problem) {
    goal_mask_ = Bitset(problem.fact_count());
    for (FactId g : problem.goal) goal_mask_.set(g);
    variant_offsets_.reserve(problem.split_variants.size());
    variant_marginals_.reserve(problem.split_variants.size());
    for (const SplitVariant& v : problem.split_variants) {
        std::map<FactId, double> marginal;
        for (const ProbabilisticOutcome& o : v.outcomes)
            for (FactId f : o.added_facts) marginal[f] += o.probability;
        std::vector<std::pair<FactId, int>> offsets;
        std::vector<std::pair<FactId, double>> probs;
        for (auto& [fact, pr] : marginal) {
            double p = std::min(pr, 1.0);
            offsets.emplace_back(fact, effect_level_offset(p));
            probs.emplace_back(fact, p);
        }
        variant_offsets_.push_back(std::move(offsets));
        variant_marginals_.push_back(std::move(probs));
    }
}

namespace {

struct Pending {
    FactId fact;
    double probability;   // per-execution marginal, for due-layer ties
    ActionId parent;
    int fire_layer;
    int executions;
    const SplitVariant* variant;
};

// Among entries due at the same layer for the same fact, the one achieving
// with higher per-execution probability wins; final tie to lower action id.
bool better_pending(const Pending& a, const Pending& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.parent < b.parent;
}

}  // namespace

RelaxedStateGraph RelaxationHeuristics::build_state_graph(const State& s) const {
    const Problem& p = *problem_;
    const int nfacts = p.fact_count();

    RelaxedStateGraph g;
    g.first_level.assign(nfacts, -1);
    g.achiever.assign(nfacts, StateAchiever{});

    Bitset facts = s.bits();
    for (int f = 0; f < nfacts; ++f)
        if (facts.test(f)) g.first_level[f] = 0;
    g.layers.push_back(facts);
    if (goal_mask_.is_subset_of(facts)) {
        g.goal_layer = 0;
        return g;
    }

    std::vector<char> fired(p.split_variants.size(), 0);
    std::map<int, std::vector<Pending>> pending;

    auto applicable = [&](const SplitVariant& v) {
        for (FactId f : v.preconditions)
            if (!facts.test(f)) return false;
        for (FactId f : v.condition)
            if (!facts.test(f)) return false;
        return true;
    };

    for (int i = 0; i < kMaxLayers; ++i) {
        for (std::size_t vi = 0; vi < p.split_variants.size(); ++vi) {
            const SplitVariant& v = p.split_variants[vi];
            if (fired[vi] || !applicable(v)) continue;
            fired[vi] = 1;
            for (std::size_t k = 0; k < variant_offsets_[vi].size(); ++k) {
                const auto& [fact, offset] = variant_offsets_[vi][k];
                pending[i + offset].push_back(
                    {fact, variant_marginals_[vi][k].second, v.parent, i, offset, &v});
            }
        }

        bool changed = false;
        auto due = pending.find(i + 1);
        if (due != pending.end()) {
            std::map<FactId, Pending> best;
            for (const Pending& e : due->second) {
                if (facts.test(e.fact)) continue;  // an earlier achiever superseded it
                auto [it, fresh] = best.emplace(e.fact, e);
                if (!fresh && better_pending(e, it->second)) it->second = e;
            }
            for (auto& [fact, e] : best) {
                facts.set(fact);
                g.first_level[fact] = i + 1;
                g.achiever[fact] = {e.parent, e.fire_layer, e.executions, e.variant};
                changed = true;
            }
            pending.erase(due);
        }

        g.layers.push_back(facts);
        if (goal_mask_.is_subset_of(facts)) {
            g.goal_layer = i + 1;
            return g;
        }
        if (!changed && pending.empty()) return g;  // fixpoint, goal unreached
    }
    return g;
}

namespace {

struct PlanEntry {
    int fire_layer;
    ActionId actor;
    int executions;
};

std::vector<ActionId> finish_plan(std::map<std::pair<int, ActionId>, int>& selected) {
    std::vector<PlanEntry> entries;
    entries.reserve(selected.size());
    for (const auto& [key, exec] : selected) entries.push_back({key.first, key.second, exec});
    std::sort(entries.begin(), entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
        if (a.fire_layer != b.fire_layer) return a.fire_layer < b.fire_layer;
        return a.actor < b.actor;
    });
    std::vector<ActionId> plan;
    for (const PlanEntry& e : entries)
        for (int k = 0; k < e.executions; ++k) plan.push_back(e.actor);
    return plan;
}

}  // namespace

std::vector<ActionId> RelaxationHeuristics::extract_relaxed_plan(
    const RelaxedStateGraph& g) const {
    if (!g.goal_reached()) throw ModelError("extract_relaxed_plan: goal not in final layer");
    const int nfacts = problem_->fact_count();
    std::vector<char> queued(nfacts, 0);
    std::vector<std::vector<FactId>> open(g.goal_layer + 1);
    for (FactId f : problem_->goal)
        if (g.first_level[f] > 0 && !queued[f]) {
            queued[f] = 1;
            open[g.first_level[f]].push_back(f);
        }
    std::map<std::pair<int, ActionId>, int> selected;
    for (int level = g.goal_layer; level >= 1; --level) {
        std::sort(open[level].begin(), open[level].end());
        for (FactId f : open[level]) {
            const StateAchiever& ach = g.achiever[f];
            auto key = std::make_pair(ach.fire_layer, ach.parent);
            auto [it, fresh] = selected.emplace(key, ach.executions);
            if (!fresh) it->second = std::max(it->second, ach.executions);
            auto require = [&](FactId r) {
                if (g.first_level[r] > 0 && !queued[r]) {
                    queued[r] = 1;
                    open[g.first_level[r]].push_back(r);
                }
            };
            for (FactId r : ach.variant->preconditions) require(r);
            for (FactId r : ach.variant->condition) require(r);
        }
    }
    return finish_plan(selected);
}

RelaxedBeliefGraph RelaxationHeuristics::build_belief_graph(const BeliefState& b) const {
    const Problem& p = *problem_;
    const int nfacts = p.fact_count();
    const int nstates = static_cast<int>(b.size());
    const int nvariants = static_cast<int>(p.split_variants.size());

    RelaxedBeliefGraph g;
    for (const auto& [state, prob] : b.support()) g.states.push_back(state);
    const State& sml = most_likely_state(b);
    for (int si = 0; si < nstates; ++si)
        if (g.states[si] == sml) g.s_ml = si;

    g.inter_first_level.assign(nfacts, -1);
    g.achiever.assign(nfacts, BeliefAchiever{});

    std::vector<Bitset> facts;
    facts.reserve(nstates);
    for (int si = 0; si < nstates; ++si) facts.push_back(g.states[si].bits());

    // Per-state first levels and achievers; intersection attribution reads
    // them when a fact completes across all valid states.
    std::vector<std::vector<int>> state_first(nstates, std::vector<int>(nfacts, -1));
    std::vector<std::vector<StateAchiever>> state_ach(nstates,
                                                      std::vector<StateAchiever>(nfacts));
    for (int si = 0; si < nstates; ++si)
        for (int f = 0; f < nfacts; ++f)
            if (facts[si].test(f)) state_first[si][f] = 0;

    std::vector<char> valid(nstates, 1);
    std::vector<int> valid_list(nstates);
    for (int si = 0; si < nstates; ++si) valid_list[si] = si;

    auto intersection = [&](const std::vector<int>& members) {
        Bitset inter = facts[members[0]];
        for (std::size_t k = 1; k < members.size(); ++k) inter.intersect_with(facts[members[k]]);
        return inter;
    };

    Bitset inter = intersection(valid_list);
    for (int f = 0; f < nfacts; ++f)
        if (inter.test(f)) g.inter_first_level[f] = 0;

    g.state_layers.assign(nstates, {});
    for (int si = 0; si < nstates; ++si) g.state_layers[si].push_back(facts[si]);
    g.valid_at.push_back(valid_list);

    if (goal_mask_.is_subset_of(inter)) {
        g.goal_layer = 0;
        return g;
    }

    std::vector<std::vector<char>> fired(nvariants, std::vector<char>(nstates, 0));
    std::vector<std::map<int, std::vector<Pending>>> pending(nstates);

    auto parent_applicable = [&](ActionId a) {
        for (FactId f : p.actions[a].preconditions)
            if (!inter.test(f)) return false;
        return true;
    };

    for (int i = 0; i < kMaxLayers; ++i) {
        // Fire variants whose parent gate passes; conditions per state.
        bool any_pending = false;
        for (int vi = 0; vi < nvariants; ++vi) {
            const SplitVariant& v = p.split_variants[vi];
            if (!parent_applicable(v.parent)) continue;
            for (int si : valid_list) {
                if (fired[vi][si]) continue;
                bool cond = true;
                for (FactId f : v.condition)
                    if (!facts[si].test(f)) {
                        cond = false;
                        break;
                    }
                if (!cond) continue;
                fired[vi][si] = 1;
                for (std::size_t k = 0; k < variant_offsets_[vi].size(); ++k) {
                    const auto& [fact, offset] = variant_offsets_[vi][k];
                    pending[si][i + offset].push_back({fact, variant_marginals_[vi][k].second,
                                                       v.parent, i, offset, &v});
                }
            }
        }

        // Sensing eliminations, tested on the layer-i sets, effective at i+1.
        std::vector<std::pair<int, ActionId>> removals;  // (state, sensing action)
        std::vector<char> removed(nstates, 0);
        for (const Action& a : p.actions) {
            if (!a.is_sensing() || !parent_applicable(a.id)) continue;
            for (int si : valid_list) {
                if (si == g.s_ml || removed[si]) continue;
                for (FactId obs : a.observed_facts) {
                    if (facts[si].test(obs) != facts[g.s_ml].test(obs)) {
                        removed[si] = 1;
                        removals.emplace_back(si, a.id);
                        break;
                    }
                }
            }
        }

        std::vector<int> new_valid;
        for (int si : valid_list)
            if (!removed[si]) new_valid.push_back(si);

        // Resolve layer i+1 for surviving states.
        bool changed = false;
        for (int si : new_valid) {
            auto due = pending[si].find(i + 1);
            if (due == pending[si].end()) continue;
            std::map<FactId, Pending> best;
            for (const Pending& e : due->second) {
                if (facts[si].test(e.fact)) continue;
                auto [it, fresh] = best.emplace(e.fact, e);
                if (!fresh && better_pending(e, it->second)) it->second = e;
            }
            for (auto& [fact, e] : best) {
                facts[si].set(fact);
                state_first[si][fact] = i + 1;
                state_ach[si][fact] = {e.parent, e.fire_layer, e.executions, e.variant};
                changed = true;
            }
            pending[si].erase(due);
        }

        for (int si = 0; si < nstates; ++si) g.state_layers[si].push_back(facts[si]);
        g.valid_at.push_back(new_valid);

        // New intersection facts and their attribution.
        Bitset new_inter = intersection(new_valid);
        for (int f = 0; f < nfacts; ++f) {
            if (!new_inter.test(f) || g.inter_first_level[f] >= 0) continue;
            g.inter_first_level[f] = i + 1;
            const StateAchiever* adder = nullptr;
            for (int si : new_valid) {
                if (state_first[si][f] != i + 1) continue;
                if (adder == nullptr || state_ach[si][f].parent < adder->parent)
                    adder = &state_ach[si][f];
            }
            if (adder != nullptr) {
                AttributionKind kind = adder->variant->condition.empty()
                                           ? AttributionKind::Unconditional
                                           : AttributionKind::LastConditional;
                g.achiever[f] = {adder->parent, adder->fire_layer, adder->executions, kind,
                                 adder->variant};
            } else {
                // Completed by elimination: a removed state lacked the fact.
                ActionId sensor = -1;
                for (const auto& [si, act] : removals)
                    if (!facts[si].test(f) && (sensor < 0 || act < sensor)) sensor = act;
                if (sensor < 0)
                    throw ModelError("internal: intersection fact without achiever");
                g.achiever[f] = {sensor, i, 1, AttributionKind::Sensing, nullptr};
            }
        }

        inter = std::move(new_inter);
        valid_list = std::move(new_valid);

        if (goal_mask_.is_subset_of(inter)) {
            g.goal_layer = i + 1;
            return g;
        }
        bool pending_left = false;
        for (int si : valid_list)
            if (!pending[si].empty()) {
                pending_left = true;
                break;
            }
        if (!changed && !pending_left && removals.empty()) return g;  // fixpoint
    }
    return g;
}

std::vector<ActionId> RelaxationHeuristics::extract_relaxed_plan(
    const RelaxedBeliefGraph& g) const {
    if (!g.goal_reached()) throw ModelError("extract_relaxed_plan: goal not in final layer");
    const Problem& p = *problem_;
    const int nfacts = p.fact_count();
    std::vector<char> queued(nfacts, 0);
    std::vector<std::vector<FactId>> open(g.goal_layer + 1);
    auto require = [&](FactId r) {
        if (g.inter_first_level[r] > 0 && !queued[r]) {
            queued[r] = 1;
            open[g.inter_first_level[r]].push_back(r);
        }
    };
    for (FactId f : p.goal) require(f);
    std::map<std::pair<int, ActionId>, int> selected;
    for (int level = g.goal_layer; level >= 1; --level) {
        std::sort(open[level].begin(), open[level].end());
        for (FactId f : open[level]) {
            const BeliefAchiever& ach = g.achiever[f];
            auto key = std::make_pair(ach.fire_layer, ach.actor);
            auto [it, fresh] = selected.emplace(key, ach.executions);
            if (!fresh) it->second = std::max(it->second, ach.executions);
            switch (ach.kind) {
                case AttributionKind::Sensing:
                    for (FactId r : p.actions[ach.actor].preconditions) require(r);
                    break;
                case AttributionKind::Unconditional:
                    for (FactId r : ach.variant->preconditions) require(r);
                    break;
                case AttributionKind::LastConditional:
                    for (FactId r : ach.variant->preconditions) require(r);
                    // Condition facts that the intersection had by the fire
                    // layer are genuine requirements; per-state-only ones are
                    // covered by the optimistic attribution.
                    for (FactId r : ach.variant->condition)
                        if (g.inter_first_level[r] >= 0 &&
                            g.inter_first_level[r] <= ach.fire_layer)
                            require(r);
                    break;
                case AttributionKind::InitiallyTrue:
                    throw ModelError("internal: open fact with no achiever");
            }
        }
    }
    return finish_plan(selected);
}

RelaxationHeuristics::Triple RelaxationHeuristics::compute_state_triple(const State& s) const {
    RelaxedStateGraph g = build_state_graph(s);
    Triple t;
    if (!g.goal_reached()) return t;
    t.hmax = g.goal_layer;
    t.hadd = 0;
    for (FactId f : problem_->goal) t.hadd += g.first_level[f];
    t.hff = static_cast<double>(extract_relaxed_plan(g).size());
    return t;
}

RelaxationHeuristics::Triple RelaxationHeuristics::compute_belief_triple(
    const BeliefState& b) const {
    RelaxedBeliefGraph g = build_belief_graph(b);
    Triple t;
    if (!g.goal_reached()) return t;
    t.hmax = g.goal_layer;
    t.hadd = 0;
    for (FactId f : problem_->goal) t.hadd += g.inter_first_level[f];
    // The extracted plan is a parallel plan spanning every layer, but a
    // sensing attribution swallows the eliminated worlds' achiever chains,
    // so its action count can fall below the span. The span stays a valid
    // lower bound on plan length.
    t.hff = std::max(static_cast<double>(extract_relaxed_plan(g).size()), t.hmax);
    return t;
}

RelaxationHeuristics::Triple RelaxationHeuristics::state_triple(const State& s) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = state_cache_.find(s);
        if (it != state_cache_.end()) return it->second;
    }
    Triple t = compute_state_triple(s);
    std::lock_guard<std::mutex> lock(mutex_);
    return state_cache_.emplace(s, t).first->second;
}

double RelaxationHeuristics::state_value(const State& s, RelaxKind kind) {
    Triple t = state_triple(s);
    switch (kind) {
        case RelaxKind::Max: return t.hmax;
        case RelaxKind::Add: return t.hadd;
        case RelaxKind::Ff: return t.hff;
    }
    return kInfinity;
}

double RelaxationHeuristics::weighted_value(const BeliefState& b, RelaxKind kind) {
    double sum = 0.0;
    for (const auto& [state, prob] : b.support()) {
        double h = state_value(state, kind);
        if (h == kInfinity) return kInfinity;
        sum += prob * h;
    }
    return sum;
}

double RelaxationHeuristics::belief_value(const BeliefState& b, RelaxKind kind) {
    BeliefCacheKey key;
    key.s_ml = most_likely_state(b);
    key.support.reserve(b.size());
    for (const auto& [state, prob] : b.support()) key.support.push_back(state);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = belief_cache_.find(key);
        if (it != belief_cache_.end()) {
            const Triple& t = it->second;
            return kind == RelaxKind::Max ? t.hmax : kind == RelaxKind::Add ? t.hadd : t.hff;
        }
    }
    Triple t = compute_belief_triple(b);
    std::lock_guard<std::mutex> lock(mutex_);
    const Triple& stored = belief_cache_.emplace(std::move(key), t).first->second;
    return kind == RelaxKind::Max ? stored.hmax
                                  : kind == RelaxKind::Add ? stored.hadd : stored.hff;
}

long RelaxationHeuristics::state_cache_size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<long>(state_cache_.size());
}

long RelaxationHeuristics::belief_cache_size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<long>(belief_cache_.size());
}

void RelaxationHeuristics::dump_state_graph(const RelaxedStateGraph& g, std::ostream& os) const {
    const Problem& p = *problem_;
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        os << "layer " << i << ":";
        for (int f = 0; f < p.fact_count(); ++f)
            if (g.layers[i].test(f) && static_cast<int>(i) == g.first_level[f])
                os << " " << p.fact_name(f);
        os << "\n";
    }
    os << "goal-layer: " << (g.goal_reached() ? std::to_string(g.goal_layer) : "unreached")
       << "\n";
    if (g.goal_reached()) {
        os << "plan:";
        for (ActionId a : extract_relaxed_plan(g)) os << " " << p.actions[a].name;
        os << "\n";
    }
}

void RelaxationHeuristics::dump_belief_graph(const RelaxedBeliefGraph& g,
                                             std::ostream& os) const {
    const Problem& p = *problem_;
    os << "support " << g.states.size() << ", most-likely index " << g.s_ml << "\n";
    for (std::size_t i = 0; i < g.valid_at.size(); ++i) {
        os << "layer " << i << " valid{";
        for (std::size_t k = 0; k < g.valid_at[i].size(); ++k)
            os << (k ? "," : "") << g.valid_at[i][k];
        os << "} new-in-intersection:";
        for (int f = 0; f < p.fact_count(); ++f)
            if (g.inter_first_level[f] == static_cast<int>(i)) os << " " << p.fact_name(f);
        os << "\n";
    }
    os << "goal-layer: " << (g.goal_reached() ? std::to_string(g.goal_layer) : "unreached")
       << "\n";
    if (g.goal_reached()) {
        os << "plan:";
        for (ActionId a : extract_relaxed_plan(g)) os << " " << p.actions[a].name;
        os << "\n";
    }
}

}  // namespace ppond
