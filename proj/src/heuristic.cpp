#include "ppond/heuristic.hpp"

#include <chrono>
#include <stdexcept>

namespace ppond {

namespace {

class FlatHeuristic final : public BeliefHeuristic {
public:
    explicit FlatHeuristic(const BeliefEngine& engine) : engine_(&engine) {}
    double value(const BeliefState& b) override { return engine_->belief_is_goal(b) ? 0.0 : 1.0; }
    std::string name() const override { return "flat"; }

private:
    const BeliefEngine* engine_;
};

class WeightedStateHeuristic final : public BeliefHeuristic {
public:
    WeightedStateHeuristic(const BeliefEngine& engine, RelaxKind kind)
        : relax_(engine.problem()), kind_(kind) {}
    double value(const BeliefState& b) override { return relax_.weighted_value(b, kind_); }
    std::string name() const override {
        return kind_ == RelaxKind::Max ? "hmax-s" : kind_ == RelaxKind::Add ? "hadd-s" : "hff-s";
    }

private:
    RelaxationHeuristics relax_;
    RelaxKind kind_;
};

class BeliefGraphHeuristic final : public BeliefHeuristic {
public:
    BeliefGraphHeuristic(const BeliefEngine& engine, RelaxKind kind)
        : relax_(engine.problem()), kind_(kind) {}
    double value(const BeliefState& b) override { return relax_.belief_value(b, kind_); }
    std::string name() const override {
        return kind_ == RelaxKind::Max ? "hmax-b" : kind_ == RelaxKind::Add ? "hadd-b" : "hff-b";
    }

private:
    RelaxationHeuristics relax_;
    RelaxKind kind_;
};

class MdpHeuristic final : public BeliefHeuristic {
public:
    MdpHeuristic(const BeliefEngine& engine, bool most_likely, const HeuristicOptions& options)
        : engine_(&engine),
          most_likely_(most_likely),
          rng_(options.seed ^ 0x6d64705f72746470ull),
          topup_(options.mdp_topup_iterations) {
        auto t0 = std::chrono::steady_clock::now();
        BeliefState b0 = engine.problem().initial_belief();
        int n = static_cast<int>(b0.size());
        int total = options.mdp_initial_trajectories;
        for (int i = 0; i < n; ++i) {
            int share = total / n + (i < total % n ? 1 : 0);
            run_mdp_rtdp(b0.support()[i].first, share, table_, *engine_, rng_);
        }
        setup_seconds_ =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    double value(const BeliefState& b) override {
        return most_likely_ ? most_likely_state_value(b, table_, *engine_, rng_, topup_)
                            : qmdp_value(b, table_, *engine_, rng_, topup_);
    }
    std::string name() const override { return most_likely_ ? "ml" : "qmdp"; }
    double setup_seconds() const override { return setup_seconds_; }

private:
    const BeliefEngine* engine_;
    bool most_likely_;
    MdpValueTable table_;
    RngStream rng_;
    int topup_;
    double setup_seconds_ = 0.0;
};

}  // namespace

const char* heuristic_name(HeuristicKind kind) {
    switch (kind) {
        case HeuristicKind::Flat: return "flat";
        case HeuristicKind::Ml: return "ml";
        case HeuristicKind::QMdp: return "qmdp";
        case HeuristicKind::HmaxS: return "hmax-s";
        case HeuristicKind::HaddS: return "hadd-s";
        case HeuristicKind::HffS: return "hff-s";
        case HeuristicKind::HmaxB: return "hmax-b";
        case HeuristicKind::HaddB: return "hadd-b";
        case HeuristicKind::HffB: return "hff-b";
    }
    return "?";
}

HeuristicKind parse_heuristic(const std::string& name) {
    for (HeuristicKind k :
         {HeuristicKind::Flat, HeuristicKind::Ml, HeuristicKind::QMdp, HeuristicKind::HmaxS,
          HeuristicKind::HaddS, HeuristicKind::HffS, HeuristicKind::HmaxB, HeuristicKind::HaddB,
          HeuristicKind::HffB})
        if (name == heuristic_name(k)) return k;
    throw std::invalid_argument("unknown heuristic '" + name + "'");
}

bool heuristic_is_admissible(HeuristicKind kind) {
    switch (kind) {
        case HeuristicKind::Flat:
        case HeuristicKind::QMdp:
        case HeuristicKind::HmaxS:
        case HeuristicKind::HmaxB:
            return true;
        default:
            return false;
    }
}

std::unique_ptr<BeliefHeuristic> make_heuristic(HeuristicKind kind, const BeliefEngine& engine,
                                                const HeuristicOptions& options) {
    switch (kind) {
        case HeuristicKind::Flat: return std::make_unique<FlatHeuristic>(engine);
        case HeuristicKind::Ml: return std::make_unique<MdpHeuristic>(engine, true, options);
        case HeuristicKind::QMdp: return std::make_unique<MdpHeuristic>(engine, false, options);
        case HeuristicKind::HmaxS:
            return std::make_unique<WeightedStateHeuristic>(engine, RelaxKind::Max);
        case HeuristicKind::HaddS:
            return std::make_unique<WeightedStateHeuristic>(engine, RelaxKind::Add);
        case HeuristicKind::HffS:
            return std::make_unique<WeightedStateHeuristic>(engine, RelaxKind::Ff);
        case HeuristicKind::HmaxB:
            return std::make_unique<BeliefGraphHeuristic>(engine, RelaxKind::Max);
        case HeuristicKind::HaddB:
            return std::make_unique<BeliefGraphHeuristic>(engine, RelaxKind::Add);
        case HeuristicKind::HffB:
            return std::make_unique<BeliefGraphHeuristic>(engine, RelaxKind::Ff);
    }
    throw std::invalid_argument("unknown heuristic kind");
}

}  // namespace ppond
