#pragma once
#include <memory>
#include <string>

#include "ppond/engine.hpp"
#include "ppond/mdp_heuristic.hpp"
#include "ppond/relaxation.hpp"

namespace ppond {

// Cost-to-go initializer for belief values. Implementations may cache
// internally; value() must be deterministic for a fixed construction seed.
class BeliefHeuristic {
public:
    virtual ~BeliefHeuristic() = default;
    virtual double value(const BeliefState& b) = 0;
    virtual std::string name() const = 0;
    // Wall seconds spent in construction-time precomputation (the initial
    // MDP RTDP phase); reported separately from solve time.
    virtual double setup_seconds() const { return 0.0; }
};

enum class HeuristicKind { Flat, Ml, QMdp, HmaxS, HaddS, HffS, HmaxB, HaddB, HffB };

const char* heuristic_name(HeuristicKind kind);
// Accepts the CLI spellings: flat|ml|qmdp|hmax-s|hadd-s|hff-s|hmax-b|hadd-b|hff-b.
HeuristicKind parse_heuristic(const std::string& name);
bool heuristic_is_admissible(HeuristicKind kind);

struct HeuristicOptions {
    uint64_t seed = 1;
    int mdp_initial_trajectories = 1000;  // spread over the initial states
    int mdp_topup_iterations = 100;
};

std::unique_ptr<BeliefHeuristic> make_heuristic(HeuristicKind kind, const BeliefEngine& engine,
                                                const HeuristicOptions& options = {});

}  // namespace ppond
