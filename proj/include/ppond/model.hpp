#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppond/util.hpp"

namespace ppond {

using FactId = int;
using ActionId = int;

// A grounded fact. Every fact is paired with its complement so that the
// internal representation only ever deals in positive membership tests even
// when the source model used negative literals.
struct Fact {
    FactId id = -1;
    std::string name;       // grounded atom, e.g. "at p0" or "not at p0"
    FactId complement = -1;
};

// A state is a total, consistent truth assignment: exactly one of every
// fact/complement pair is set. Fixed (statically true) atoms are factored out
// at grounding time and do not occupy bits here.
class State {
public:
    State() = default;
    explicit State(int nfacts) : bits_(nfacts) {}
    explicit State(Bitset bits) : bits_(std::move(bits)) {}

    bool test(FactId f) const { return bits_.test(f); }
    void set_pair(FactId f, FactId complement, bool value) {
        bits_.assign(f, value);
        bits_.assign(complement, !value);
    }

    int fact_count() const { return bits_.size(); }
    const Bitset& bits() const { return bits_; }

    bool operator==(const State& o) const { return bits_ == o.bits_; }
    bool operator!=(const State& o) const { return bits_ != o.bits_; }
    bool operator<(const State& o) const { return bits_ < o.bits_; }
    uint64_t hash() const { return bits_.hash(); }
    std::string to_hex() const { return bits_.to_hex(); }

private:
    Bitset bits_;
};

struct StateHash {
    std::size_t operator()(const State& s) const { return static_cast<std::size_t>(s.hash()); }
};

// One probabilistic alternative of a conditional effect. `added_facts` are set
// true (and their complements false) simultaneously when the outcome fires.
struct ProbabilisticOutcome {
    double probability = 1.0;
    std::vector<FactId> added_facts;  // sorted, no duplicates
};

struct ConditionalEffect {
    std::vector<FactId> condition;  // sorted; empty = unconditional
    std::vector<ProbabilisticOutcome> outcomes;  // probabilities sum to 1
};

struct Action {
    ActionId id = -1;
    std::string name;
    std::vector<FactId> preconditions;   // sorted
    std::vector<ConditionalEffect> effects;
    std::vector<FactId> observed_facts;  // sorted; deterministic observation
    double cost = 1.0;

    bool is_sensing() const { return !observed_facts.empty(); }
};

// Single-condition action variant used by the relaxation heuristics. Variants
// share the parent's id for plan-length accounting; the executable action set
// is unchanged.
struct SplitVariant {
    ActionId parent = -1;
    std::vector<FactId> preconditions;  // the parent's preconditions
    std::vector<FactId> condition;      // exactly one condition (possibly empty)
    std::vector<ProbabilisticOutcome> outcomes;
};

// One weighted alternative of an initial-belief formula: the listed literals
// are applied on top of the closed-world default state.
struct InitFragment {
    double probability = 1.0;
    std::vector<FactId> literals;
};

struct InitFormula {
    std::vector<InitFragment> fragments;  // mutually exclusive, weights sum to 1
};

// Declarations retained from parsing so a grounded problem can be serialized
// back into the textual language.
struct PredicateSchema {
    std::string name;
    std::vector<std::string> param_types;
};

struct Vocabulary {
    std::vector<std::string> types;
    std::vector<std::pair<std::string, std::string>> objects;  // (name, type)
    std::vector<PredicateSchema> predicates;
};

class BeliefState;

struct Problem {
    std::string domain_name;
    std::string problem_name;
    std::vector<Fact> facts;    // dynamic facts only, complement pairs adjacent
    std::vector<Action> actions;
    std::vector<SplitVariant> split_variants;
    std::vector<FactId> goal;   // sorted, nonempty
    std::vector<InitFormula> initial_formulas;
    std::vector<FactId> init_literals;      // certain initial values (dynamic facts)
    std::vector<std::string> static_true;   // statically-true atoms, e.g. adjacency
    Vocabulary vocab;

    int fact_count() const { return static_cast<int>(facts.size()); }
    FactId complement(FactId f) const { return facts[f].complement; }
    const std::string& fact_name(FactId f) const { return facts[f].name; }

    // Closed-world default: every positive fact false, every complement true,
    // then the certain :init literals applied.
    State default_state() const;
    State base_initial_state() const;
    BeliefState initial_belief() const;

    bool is_goal_state(const State& s) const {
        for (FactId g : goal)
            if (!s.test(g)) return false;
        return true;
    }

    void apply_literal(State& s, FactId literal) const {
        s.set_pair(literal, complement(literal), true);
    }
};

// Sparse distribution over states; the solver's search node. Support is
// sorted by state order, probabilities are positive and sum to 1.
class BeliefState {
public:
    BeliefState() = default;

    // Sorts, merges duplicates and validates the distribution.
    static BeliefState from_weighted(std::vector<std::pair<State, double>> entries);

    const std::vector<std::pair<State, double>>& support() const { return support_; }
    std::size_t size() const { return support_.size(); }
    bool empty() const { return support_.empty(); }

    bool operator==(const BeliefState& o) const;

private:
    std::vector<std::pair<State, double>> support_;
};

// argmax_s b(s); ties broken by the lexicographically smallest state.
const State& most_likely_state(const BeliefState& b);

// Opaque hashable identity of a belief. Without discretization probabilities
// are rounded to 1e-9; with discretization level D each state maps to the
// level ceil(D * b(s)).
struct BeliefKey {
    std::vector<std::pair<State, int64_t>> entries;
    int discretize = 0;

    bool operator==(const BeliefKey& o) const {
        return discretize == o.discretize && entries == o.entries;
    }
    uint64_t hash() const;
    std::string to_string() const;
};

struct BeliefKeyHash {
    std::size_t operator()(const BeliefKey& k) const { return static_cast<std::size_t>(k.hash()); }
};

BeliefKey belief_key(const BeliefState& b, int discretize = 0);

// Produces the single-condition variants every relaxation heuristic consumes.
// Rejects actions whose outcome adds a fact together with its complement.
Problem ground_split_conditionals(Problem problem);

// Multiset of (condition, outcomes) pairs is preserved exactly by splitting;
// exposed for tests.
std::vector<std::pair<std::vector<FactId>, const std::vector<ProbabilisticOutcome>*>>
effect_multiset(const Problem& p, bool from_variants);

}  // namespace ppond
