#include "evplan/planner.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace evplan {
namespace {

using Clock = std::chrono::steady_clock;

struct Budget {
    const PlannerLimits& limits;
    Clock::time_point start = Clock::now();
    size_t nodes = 0;

    bool exhausted() const {
        if (nodes > limits.max_nodes) return true;
        return limits.deadline && Clock::now() - start > *limits.deadline;
    }
};

std::vector<size_t> successors_of(const Task& task, const State& s, const ExtraPreconditions* extra,
                                  std::vector<State>& states_out) {
    std::vector<size_t> ops;
    const auto& all = task.ground_operators();
    for (size_t i = 0; i < all.size(); ++i) {
        if (!applicable(task, s, all[i], extra)) continue;
        State n;
        try {
            n = apply_atomic(task, s, all[i]);
        } catch (const FunctionalConflict&) {
            continue;
        }
        ops.push_back(i);
        states_out.push_back(std::move(n));
    }
    return ops;
}

bool reversed_less(const std::vector<size_t>& a, const std::vector<size_t>& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
}

std::vector<GroundAction> to_actions(const Task& task, const std::vector<size_t>& ids) {
    std::vector<GroundAction> out;
    for (size_t i : ids) out.push_back(task.ground_operators()[i]);
    return out;
}

}  // namespace

bool relaxed_reachable(const Task& task, const State& start, const Conjunction& goal) {
    State reach = start;
    bool changed = true;
    auto satisfied = [&](const GroundAction& a) {
        for (const auto& l : preconditions(a)) {
            if (l.positive && !reach.contains(l.atom)) return false;
        }
        return true;
    };
    while (changed) {
        changed = false;
        for (const auto& op : task.ground_operators()) {
            if (!satisfied(op)) continue;
            for (auto phase : {EffectPhase::Initial, EffectPhase::Final}) {
                for (auto& a : expand_effects(task, reach, op, phase).adds) {
                    if (!reach.contains(a)) {
                        reach.insert(a);
                        changed = true;
                    }
                }
            }
        }
    }
    for (const auto& g : goal) {
        if (g.positive && !reach.contains(g.atom)) return false;
    }
    return true;
}

std::vector<GroundAction> replan(const Task& task, const State& start, const Conjunction& goal,
                                 const PlannerLimits& limits, const ExtraPreconditions* extra) {
    if (start.failed()) throw NoPlanFound("start state has failed");
    if (holds(task, start, goal)) return {};
    Budget budget{limits};
    std::map<State, size_t> index{{start, 0}};
    std::vector<size_t> depth{0};
    // Edges into each node from the previous layer: (predecessor, operator).
    std::vector<std::vector<std::pair<size_t, size_t>>> preds(1);
    std::vector<State> states{start};
    std::vector<size_t> layer{0};
    for (size_t d = 1; d <= limits.max_length; ++d) {
        std::vector<size_t> next_layer;
        for (size_t id : layer) {
            std::vector<State> succ;
            State here = states[id];
            auto ops = successors_of(task, here, extra, succ);
            for (size_t k = 0; k < ops.size(); ++k) {
                auto [it, inserted] = index.emplace(succ[k], states.size());
                if (inserted) {
                    states.push_back(std::move(succ[k]));
                    depth.push_back(d);
                    preds.emplace_back();
                    next_layer.push_back(it->second);
                    ++budget.nodes;
                    if (budget.exhausted()) throw NoPlanFound("planner limits exhausted");
                }
                if (depth[it->second] == d) preds[it->second].emplace_back(id, ops[k]);
            }
        }
        if (next_layer.empty()) throw NoPlanFound("goal unreachable from the given state");
        std::vector<size_t> current;
        for (size_t id : next_layer) {
            if (holds(task, states[id], goal)) current.push_back(id);
        }
        if (current.empty()) {
            layer = std::move(next_layer);
            continue;
        }
        std::vector<size_t> ops_rev;
        for (size_t k = d; k > 0; --k) {
            size_t best = SIZE_MAX;
            for (size_t id : current) {
                for (const auto& [p, op] : preds[id]) best = std::min(best, op);
            }
            std::set<size_t> prev;
            for (size_t id : current) {
                for (const auto& [p, op] : preds[id]) {
                    if (op == best) prev.insert(p);
                }
            }
            ops_rev.push_back(best);
            current.assign(prev.begin(), prev.end());
        }
        std::reverse(ops_rev.begin(), ops_rev.end());
        return to_actions(task, ops_rev);
    }
    throw NoPlanFound("no plan within " + std::to_string(limits.max_length) + " steps");
}

std::vector<GroundAction> plan(const Task& task, const PlannerLimits& limits) {
    const Conjunction& goal = task.problem().goal;
    if (!relaxed_reachable(task, task.initial_state(), goal)) {
        throw Unsolvable("goal " + conjunction_str(goal) + " is unreachable");
    }
    return replan(task, task.initial_state(), goal, limits);
}

PlanEnumerator::PlanEnumerator(const Task& task, const State& start, Conjunction goal, PlannerLimits limits,
                               const ExtraPreconditions* extra)
    : task_(task), start_(start), goal_(std::move(goal)), limits_(limits), extra_(extra) {}

void PlanEnumerator::build_graph() {
    graph_built_ = true;
    Budget budget{limits_};
    std::map<State, size_t> index{{start_, 0}};
    std::vector<State> states{start_};
    for (size_t id = 0; id < states.size(); ++id) {
        edges_.emplace_back();
        std::vector<State> succ;
        State here = states[id];
        auto ops = successors_of(task_, here, extra_, succ);
        for (size_t k = 0; k < ops.size(); ++k) {
            auto [it, inserted] = index.emplace(succ[k], states.size());
            if (inserted) {
                states.push_back(std::move(succ[k]));
                ++budget.nodes;
                if (budget.exhausted()) return;
            }
            edges_[id].emplace_back(ops[k], it->second);
        }
    }
    // Exact distance to the goal by reverse breadth-first search.
    std::vector<std::vector<size_t>> reverse(states.size());
    for (size_t id = 0; id < states.size(); ++id) {
        for (const auto& [op, to] : edges_[id]) reverse[to].push_back(id);
    }
    dist_.assign(states.size(), SIZE_MAX);
    std::vector<size_t> queue;
    for (size_t id = 0; id < states.size(); ++id) {
        if (holds(task_, states[id], goal_)) {
            dist_[id] = 0;
            queue.push_back(id);
        }
    }
    for (size_t q = 0; q < queue.size(); ++q) {
        for (size_t from : reverse[queue[q]]) {
            if (dist_[from] == SIZE_MAX) {
                dist_[from] = dist_[queue[q]] + 1;
                queue.push_back(from);
            }
        }
    }
    graph_ok_ = true;
}

void PlanEnumerator::fill(size_t length) {
    constexpr size_t kMaxPerLength = 5000;
    if (!graph_built_) build_graph();
    pending_.clear();
    cursor_ = 0;
    if (!graph_ok_) return;
    Budget budget{limits_};
    std::vector<std::vector<size_t>> found;
    std::vector<size_t> ops;
    std::vector<bool> on_path(edges_.size(), false);
    std::function<void(size_t, size_t)> dfs = [&](size_t node, size_t left) {
        if (left == 0) {
            if (dist_[node] == 0) found.push_back(ops);
            return;
        }
        if (dist_[node] == 0 || dist_[node] > left) return;
        ++budget.nodes;
        if (budget.exhausted()) return;
        on_path[node] = true;
        for (const auto& [op, to] : edges_[node]) {
            if (on_path[to] || found.size() >= kMaxPerLength) continue;
            ops.push_back(op);
            dfs(to, left - 1);
            ops.pop_back();
        }
        on_path[node] = false;
    };
    dfs(0, length);
    std::sort(found.begin(), found.end(), reversed_less);
    for (const auto& f : found) pending_.push_back(to_actions(task_, f));
}

std::optional<std::vector<GroundAction>> PlanEnumerator::next() {
    while (true) {
        if (cursor_ < pending_.size()) return pending_[cursor_++];
        if (!started_) {
            started_ = true;
            try {
                length_ = replan(task_, start_, goal_, limits_, extra_).size();
            } catch (const NoPlanFound&) {
                return std::nullopt;
            }
        } else {
            ++length_;
        }
        if (length_ > limits_.max_length) return std::nullopt;
        fill(length_);
    }
}

PlanCheck validate_plan(const Task& task, const ConditionalPlan& plan, const State& start, const Conjunction& goal) {
    PlanCheck out;
    State s = start;
    const ConditionalPlan* node = &plan;
    size_t executed = 0;
    while (true) {
        for (const auto& step : node->steps) {
            if (!applicable(task, s, step)) {
                out.failed_step = executed;
                Conjunction bad = s.failed() ? Conjunction{} : violated(task, s, preconditions(step));
                out.violation = step.str() + " not applicable: " + (bad.empty() ? "state failed" : conjunction_str(bad));
                return out;
            }
            s = apply_atomic(task, s, step);
            ++executed;
        }
        if (!node->branch) break;
        node = holds(task, s, node->branch->condition) ? &node->branch->then_plan : &node->branch->else_plan;
    }
    if (!holds(task, s, goal)) {
        out.violation = "goal not satisfied: " + conjunction_str(violated(task, s, goal));
        return out;
    }
    out.ok = true;
    return out;
}

PlanCheck validate_plan(const Task& task, const ConditionalPlan& plan) {
    return validate_plan(task, plan, task.initial_state(), task.problem().goal);
}

}  // namespace evplan
