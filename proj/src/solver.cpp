#include "ppond/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace ppond {

double BeliefValueTable::value(const BeliefState& b) {
    BeliefKey k = key_of(b);
    auto it = entries_.find(k);
    if (it != entries_.end()) {
        ++hit_count_;
        return it->second;
    }
    double h = heuristic_->value(b);
    ++init_count_;
    if (record_init_) init_values_.emplace(k, h);
    return entries_.emplace(std::move(k), h).first->second;
}

std::optional<double> BeliefValueTable::peek(const BeliefKey& k) const {
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

namespace {
std::string fmt_value(double v) {
    if (v == kInfinity) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void BeliefValueTable::save(std::ostream& os, uint64_t problem_hash, uint64_t seed) const {
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(problem_hash));
    os << "# ppond-table v1\n";
    os << "# problem " << hex << "\n";
    os << "# heuristic " << heuristic_->name() << "\n";
    os << "# seed " << seed << "\n";
    os << "# discretize " << discretize_ << "\n";
    std::vector<std::pair<std::string, double>> lines;
    lines.reserve(entries_.size());
    for (const auto& [key, value] : entries_) lines.emplace_back(key.to_string(), value);
    std::sort(lines.begin(), lines.end());
    for (const auto& [key, value] : lines) os << key << ' ' << fmt_value(value) << "\n";
}

void BeliefValueTable::load(std::istream& is, const Problem& p) {
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key_text, value_text;
        if (!(ls >> key_text >> value_text)) throw std::runtime_error("bad table line: " + line);
        BeliefKey key;
        key.discretize = discretize_;
        std::istringstream ks(key_text);
        std::string entry;
        while (std::getline(ks, entry, ',')) {
            auto at = entry.find('@');
            if (at == std::string::npos) throw std::runtime_error("bad table key: " + key_text);
            State s(Bitset::from_hex(p.fact_count(), entry.substr(0, at)));
            key.entries.emplace_back(std::move(s), std::stoll(entry.substr(at + 1)));
        }
        entries_[std::move(key)] = value_text == "inf" ? kInfinity : std::stod(value_text);
    }
}

RtdpBelSolver::RtdpBelSolver(const BeliefEngine& engine, BeliefHeuristic& heuristic,
                             const SolveConfig& config)
    : engine_(&engine),
      heuristic_(&heuristic),
      config_(config),
      table_(heuristic, config.discretize, config.record_init_values),
      b0_(engine.problem().initial_belief()),
      trial_rng_(config.seed ^ 0x747269616c730000ull),
      eval_rng_(config.seed ^ 0x6576616c00000000ull) {}

std::pair<ActionId, double> RtdpBelSolver::greedy_action(const BeliefState& b) {
    std::vector<ActionId> actions = engine_->applicable_actions(b);
    if (actions.empty())
        throw DeadEndError("dead-end belief " + table_.key_of(b).to_string());
    ActionId best_action = -1;
    double best = kInfinity;
    for (ActionId a : actions) {
        double q = engine_->belief_cost(b, a);
        for (const ObservationBranch& br : engine_->expand(b, a)) {
            double v = table_.value(br.belief);
            if (v == kInfinity) {
                q = kInfinity;
                break;
            }
            q += br.probability * v;
        }
        if (q < best) {
            best = q;
            best_action = a;
        }
    }
    if (best_action < 0) best_action = actions.front();  // all-infinite successors
    return {best_action, best};
}

TrialRecord RtdpBelSolver::run_trial() {
    TrialRecord record;
    record.seed = trial_counter_++;
    BeliefState b = b0_;
    // Sample the hidden start state from b0.
    double u = trial_rng_.next_double(), acc = 0.0;
    State s = b0_.support().back().first;
    for (const auto& [state, prob] : b0_.support()) {
        acc += prob;
        if (u < acc) {
            s = state;
            break;
        }
    }

    std::vector<BeliefState> beliefs;
    while (!engine_->state_is_goal(s)) {
        if (record.steps >= config_.trial_step_cap) {
            record.reached_goal = false;
            return record;  // capped: no backward pass
        }
        beliefs.push_back(b);
        record.trajectory.push_back(table_.key_of(b));
        auto [action, value] = greedy_action(b);
        table_.set(record.trajectory.back(), value);
        auto [succ, obs] = engine_->sample_transition(s, action, trial_rng_);
        b = engine_->update_belief(b, action, obs);
        s = std::move(succ);
        ++record.steps;
    }
    record.reached_goal = true;
    // Backward pass: one minimizing backup per trajectory belief.
    for (auto it = beliefs.rbegin(); it != beliefs.rend(); ++it) {
        auto [action, value] = greedy_action(*it);
        table_.set(table_.key_of(*it), value);
    }
    return record;
}

double RtdpBelSolver::successor_value_eval(const BeliefState& b) {
    if (auto v = table_.peek(table_.key_of(b))) return *v;
    return heuristic_->value(b);
}

const RtdpBelSolver::EvalDecision& RtdpBelSolver::greedy_action_eval(const BeliefState& b,
                                                                     EvalMemo& memo) {
    BeliefKey key = table_.key_of(b);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;

    EvalDecision decision;
    std::vector<ActionId> actions = engine_->applicable_actions(b);
    if (!actions.empty()) {
        ActionId best_action = -1;
        double best = kInfinity;
        std::vector<ObservationBranch> best_branches;
        for (ActionId a : actions) {
            std::vector<ObservationBranch> branches = engine_->expand(b, a);
            double q = engine_->belief_cost(b, a);
            for (const ObservationBranch& br : branches) {
                double v = successor_value_eval(br.belief);
                if (v == kInfinity) {
                    q = kInfinity;
                    break;
                }
                q += br.probability * v;
            }
            if (q < best) {
                best = q;
                best_action = a;
                best_branches = std::move(branches);
            }
        }
        if (best_action < 0) {
            best_action = actions.front();
            best_branches = engine_->expand(b, actions.front());
        }
        decision.action = best_action;
        decision.branches = std::move(best_branches);
    }
    return memo.emplace(std::move(key), std::move(decision)).first->second;
}

std::vector<State> RtdpBelSolver::enumerate_starts() const {
    std::vector<State> starts;
    starts.reserve(b0_.size());
    for (const auto& [state, prob] : b0_.support()) starts.push_back(state);
    return starts;
}

PolicyEvalReport RtdpBelSolver::evaluate_policy(EvalMode mode) {
    PolicyEvalReport report;
    const auto& support = b0_.support();
    const int nstarts = static_cast<int>(support.size());

    int iterations;
    bool one_per_start = false;
    if (mode == EvalMode::Convergence) {
        if (nstarts >= 100) {
            iterations = nstarts;
            one_per_start = true;
        } else {
            iterations = 100;
        }
    } else {
        iterations = config_.final_eval_iterations;
    }
    report.iterations = iterations;

    EvalMemo memo;
    for (int i = 0; i < iterations; ++i) {
        // Start states follow b0: exact enumeration when one per start,
        // otherwise a systematic walk over the cumulative distribution.
        const State* start;
        if (one_per_start) {
            start = &support[i].first;
        } else {
            double u = (i + 0.5) / iterations;
            double acc = 0.0;
            start = &support.back().first;
            for (const auto& [state, prob] : support) {
                acc += prob;
                if (u < acc) {
                    start = &state;
                    break;
                }
            }
        }
        State s = *start;
        BeliefState b = b0_;
        double cost = 0.0;
        int steps = 0;
        bool failed = false;
        while (!engine_->belief_is_goal(b)) {
            if (steps >= config_.eval_step_cap) {
                failed = true;  // assumed loop
                break;
            }
            const EvalDecision& decision = greedy_action_eval(b, memo);
            if (decision.action < 0) {
                failed = true;
                break;
            }
            cost += engine_->state_cost(s, decision.action);
            auto [succ, obs] = engine_->sample_transition(s, decision.action, eval_rng_);
            const BeliefState* next = nullptr;
            for (const ObservationBranch& br : decision.branches)
                if (br.signature == obs) {
                    next = &br.belief;
                    break;
                }
            if (next == nullptr) {
                failed = true;  // sampled an observation the model rules out
                break;
            }
            BeliefState moved = *next;
            b = std::move(moved);
            s = std::move(succ);
            ++steps;
        }
        if (failed) ++report.failures;
        report.costs.push_back(cost);
        report.mean_cost += cost;
    }
    if (iterations > 0) report.mean_cost /= iterations;
    return report;
}

SolveStats RtdpBelSolver::solve() {
    using Clock = std::chrono::steady_clock;
    SolveStats stats;
    stats.mdp_init_seconds = heuristic_->setup_seconds();

    std::deque<PolicyEvalReport> window;
    auto converged = [&]() {
        if (static_cast<int>(window.size()) < config_.convergence_streak) return false;
        double prev = -1.0;
        for (const PolicyEvalReport& r : window) {
            if (r.failures > 0) return false;
            if (prev >= 0.0) {
                double denom = std::max(std::abs(prev), 1e-12);
                if (std::abs(r.mean_cost - prev) / denom > config_.convergence_threshold)
                    return false;
            }
            prev = r.mean_cost;
        }
        return true;
    };

    double trial_seconds = 0.0;
    while (!stats.converged && stats.trials < config_.max_trials) {
        if (trial_seconds >= config_.time_limit_s) break;
        auto t0 = Clock::now();
        run_trial();
        trial_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
        ++stats.trials;
        if (stats.trials % config_.eval_interval == 0) {
            auto e0 = Clock::now();
            window.push_back(evaluate_policy(EvalMode::Convergence));
            stats.eval_seconds += std::chrono::duration<double>(Clock::now() - e0).count();
            while (static_cast<int>(window.size()) > config_.convergence_streak)
                window.pop_front();
            stats.converged = converged();
        }
    }
    stats.wall_seconds = trial_seconds;

    if (stats.trials > 0) {
        auto e0 = Clock::now();
        stats.final_eval = evaluate_policy(EvalMode::Final);
        stats.eval_seconds += std::chrono::duration<double>(Clock::now() - e0).count();
    } else {
        stats.final_eval.mean_cost = std::numeric_limits<double>::quiet_NaN();
    }
    stats.table_size = table_.size();
    stats.init_count = table_.init_count();
    stats.hit_count = table_.hit_count();
    return stats;
}

}  // namespace ppond
