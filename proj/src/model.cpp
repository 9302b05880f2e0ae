#include "ppond/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ppond {

namespace {
constexpr double kProbTolerance = 1e-9;
}

State Problem::default_state() const {
    State s(fact_count());
    for (const Fact& f : facts) {
        // Pairs are stored (positive, complement); initialize each pair once.
        if (f.id < f.complement) s.set_pair(f.id, f.complement, false);
    }
    return s;
}

State Problem::base_initial_state() const {
    State s = default_state();
    for (FactId l : init_literals) apply_literal(s, l);
    return s;
}

BeliefState Problem::initial_belief() const {
    std::vector<std::pair<State, double>> entries;
    entries.emplace_back(base_initial_state(), 1.0);
    for (const InitFormula& formula : initial_formulas) {
        std::vector<std::pair<State, double>> next;
        next.reserve(entries.size() * formula.fragments.size());
        for (const auto& [state, prob] : entries) {
            for (const InitFragment& frag : formula.fragments) {
                State expanded = state;
                for (FactId l : frag.literals) apply_literal(expanded, l);
                next.emplace_back(std::move(expanded), prob * frag.probability);
            }
        }
        entries = std::move(next);
    }
    return BeliefState::from_weighted(std::move(entries));
}

BeliefState BeliefState::from_weighted(std::vector<std::pair<State, double>> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    BeliefState b;
    double total = 0.0;
    for (auto& [state, prob] : entries) {
        if (prob <= 0.0) continue;
        total += prob;
        if (!b.support_.empty() && b.support_.back().first == state)
            b.support_.back().second += prob;
        else
            b.support_.emplace_back(std::move(state), prob);
    }
    if (b.support_.empty()) throw ModelError("belief state has empty support");
    if (std::abs(total - 1.0) > 1e-6)
        throw ModelError("belief probabilities sum to " + std::to_string(total));
    if (std::abs(total - 1.0) > kProbTolerance)
        for (auto& e : b.support_) e.second /= total;
    return b;
}

bool BeliefState::operator==(const BeliefState& o) const {
    if (support_.size() != o.support_.size()) return false;
    for (std::size_t i = 0; i < support_.size(); ++i) {
        if (support_[i].first != o.support_[i].first) return false;
        if (std::abs(support_[i].second - o.support_[i].second) > kProbTolerance) return false;
    }
    return true;
}

const State& most_likely_state(const BeliefState& b) {
    if (b.empty()) throw ModelError("most_likely_state on empty belief");
    const std::pair<State, double>* best = &b.support()[0];
    for (const auto& entry : b.support())
        if (entry.second > best->second + kProbTolerance) best = &entry;
    // Support is sorted, so the first max-probability entry is the
    // lexicographically smallest.
    for (const auto& entry : b.support()) {
        if (entry.second > best->second - kProbTolerance) {
            best = &entry;
            break;
        }
    }
    return best->first;
}

BeliefKey belief_key(const BeliefState& b, int discretize) {
    BeliefKey key;
    key.discretize = discretize;
    key.entries.reserve(b.size());
    for (const auto& [state, prob] : b.support()) {
        int64_t q;
        if (discretize > 0)
            q = static_cast<int64_t>(std::ceil(discretize * prob - 1e-9));
        else
            q = std::llround(prob * 1e9);
        key.entries.emplace_back(state, q);
    }
    return key;
}

uint64_t BeliefKey::hash() const {
    uint64_t h = fnv1a64(&discretize, sizeof(discretize));
    for (const auto& [state, q] : entries) {
        uint64_t sh = state.hash();
        h = fnv1a64(&sh, sizeof(sh), h);
        h = fnv1a64(&q, sizeof(q), h);
    }
    return h;
}

std::string BeliefKey::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) out += ',';
        out += entries[i].first.to_hex();
        out += '@';
        out += std::to_string(entries[i].second);
    }
    return out;
}

namespace {

void check_outcome_consistency(const Problem& p, const Action& a,
                               const std::vector<ProbabilisticOutcome>& outcomes) {
    for (const ProbabilisticOutcome& o : outcomes) {
        for (FactId f : o.added_facts) {
            FactId c = p.complement(f);
            if (std::binary_search(o.added_facts.begin(), o.added_facts.end(), c))
                throw ModelError("action '" + a.name + "' adds both '" + p.fact_name(f) +
                                 "' and its complement in one outcome");
        }
    }
}

}  // namespace

Problem ground_split_conditionals(Problem problem) {
    problem.split_variants.clear();
    for (const Action& a : problem.actions) {
        for (const ConditionalEffect& eff : a.effects) {
            check_outcome_consistency(problem, a, eff.outcomes);
            SplitVariant v;
            v.parent = a.id;
            v.preconditions = a.preconditions;
            v.condition = eff.condition;
            v.outcomes = eff.outcomes;
            problem.split_variants.push_back(std::move(v));
        }
    }
    return problem;
}

std::vector<std::pair<std::vector<FactId>, const std::vector<ProbabilisticOutcome>*>>
effect_multiset(const Problem& p, bool from_variants) {
    std::vector<std::pair<std::vector<FactId>, const std::vector<ProbabilisticOutcome>*>> out;
    if (from_variants) {
        for (const SplitVariant& v : p.split_variants) out.emplace_back(v.condition, &v.outcomes);
    } else {
        for (const Action& a : p.actions)
            for (const ConditionalEffect& e : a.effects) out.emplace_back(e.condition, &e.outcomes);
    }
    return out;
}

}  // namespace ppond
