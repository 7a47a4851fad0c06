#include "evplan/plan.hpp"

#include <functional>

namespace evplan {

bool ConditionalPlan::operator==(const ConditionalPlan& other) const {
    if (steps != other.steps) return false;
    if (!branch || !other.branch) return !branch && !other.branch;
    return branch->condition == other.branch->condition && branch->then_plan == other.branch->then_plan &&
           branch->else_plan == other.branch->else_plan;
}

ConditionalPlan make_linear(std::vector<GroundAction> steps) { return {std::move(steps), nullptr}; }

ConditionalPlan make_branch(std::vector<GroundAction> prefix, Conjunction condition, ConditionalPlan then_plan,
                            ConditionalPlan else_plan) {
    auto b = std::make_shared<Branch>(Branch{std::move(condition), std::move(then_plan), std::move(else_plan)});
    return {std::move(prefix), std::move(b)};
}

std::vector<PlanPath> all_paths(const ConditionalPlan& plan) {
    std::vector<PlanPath> out;
    std::function<void(const ConditionalPlan&, PlanPath)> walk = [&](const ConditionalPlan& node, PlanPath path) {
        path.steps.insert(path.steps.end(), node.steps.begin(), node.steps.end());
        if (!node.branch) {
            out.push_back(std::move(path));
            return;
        }
        PlanPath then_path = path;
        then_path.branches.push_back({path.steps.size(), node.branch->condition, true});
        walk(node.branch->then_plan, std::move(then_path));
        path.branches.push_back({path.steps.size(), node.branch->condition, false});
        walk(node.branch->else_plan, std::move(path));
    };
    walk(plan, {});
    return out;
}

PlanPath nominal_path(const Task& task, const ConditionalPlan& plan) {
    PlanPath path;
    State s = task.initial_state();
    const ConditionalPlan* node = &plan;
    while (true) {
        for (const auto& step : node->steps) {
            path.steps.push_back(step);
            if (!s.failed()) {
                if (applicable(task, s, step)) {
                    s = apply_atomic(task, s, step);
                } else {
                    s.set_failed();
                }
            }
        }
        if (!node->branch) break;
        bool taken = holds(task, s, node->branch->condition);
        path.branches.push_back({path.steps.size(), node->branch->condition, taken});
        node = taken ? &node->branch->then_plan : &node->branch->else_plan;
    }
    return path;
}

size_t count_steps(const ConditionalPlan& plan) {
    size_t n = plan.steps.size();
    if (plan.branch) n += count_steps(plan.branch->then_plan) + count_steps(plan.branch->else_plan);
    return n;
}

Schedule schedule(std::span<const GroundAction> path) {
    Schedule out;
    int t = 0;
    int s = 0;
    for (const auto& step : path) {
        ScheduledStep sch{step, t, s, 0, 0};
        if (step.duration() > 0) {
            t += step.duration();
            s = 0;
        } else {
            s += 1;
        }
        sch.end_time = t;
        sch.end_stage = s;
        out.steps.push_back(std::move(sch));
    }
    out.total_duration = t;
    out.final_time = t;
    out.final_stage = s;
    return out;
}

TickTrajectory expand_ticks(const Task& task, std::span<const GroundAction> path, const State* start) {
    TickTrajectory out;
    State s = start ? *start : task.initial_state();
    for (size_t i = 0; i < path.size(); ++i) {
        const auto& step = path[i];
        out.before.push_back(s);
        if (!applicable(task, s, step)) {
            throw InvalidPlan("step " + std::to_string(i) + " " + step.str() + " is not applicable: " +
                              conjunction_str(violated(task, s, preconditions(step))));
        }
        s = apply_initial(task, s, step);
        for (int k = 0; k < step.duration(); ++k) {
            out.ticks.push_back(s);
            out.tick_step.push_back(i);
        }
        s = apply_final(task, s, step);
    }
    out.before.push_back(s);
    return out;
}

PlanPosition position_on_path(const PlanPath& path, size_t index) {
    if (index > path.steps.size()) throw PositionOutOfRange("path index " + std::to_string(index));
    PlanPosition pos;
    size_t node_start = 0;
    for (const auto& b : path.branches) {
        if (b.position > index) break;
        pos.decisions.push_back(b.taken);
        node_start = b.position;
    }
    pos.index = index - node_start;
    return pos;
}

namespace {

ConditionalPlan rebuild(const ConditionalPlan& node, const PlanPosition& pos, size_t depth,
                        const std::function<ConditionalPlan(const ConditionalPlan&, size_t)>& edit) {
    if (depth == pos.decisions.size()) {
        if (pos.index > node.steps.size()) throw PositionOutOfRange("index " + std::to_string(pos.index));
        return edit(node, pos.index);
    }
    if (!node.branch) throw PositionOutOfRange("position descends through a missing branch");
    const Branch& b = *node.branch;
    ConditionalPlan then_plan = b.then_plan;
    ConditionalPlan else_plan = b.else_plan;
    if (pos.decisions[depth]) {
        then_plan = rebuild(b.then_plan, pos, depth + 1, edit);
    } else {
        else_plan = rebuild(b.else_plan, pos, depth + 1, edit);
    }
    return make_branch(node.steps, b.condition, std::move(then_plan), std::move(else_plan));
}

}  // namespace

ConditionalPlan attach_branch(const ConditionalPlan& plan, const PlanPosition& position, Conjunction condition,
                              ConditionalPlan alternate) {
    return rebuild(plan, position, 0, [&](const ConditionalPlan& node, size_t index) {
        std::vector<GroundAction> prefix(node.steps.begin(), node.steps.begin() + static_cast<long>(index));
        ConditionalPlan original{std::vector<GroundAction>(node.steps.begin() + static_cast<long>(index),
                                                           node.steps.end()),
                                 node.branch};
        return make_branch(std::move(prefix), condition, alternate, std::move(original));
    });
}

ConditionalPlan replace_suffix(const ConditionalPlan& plan, const PlanPosition& position, ConditionalPlan suffix) {
    return rebuild(plan, position, 0, [&](const ConditionalPlan& node, size_t index) {
        ConditionalPlan out = suffix;
        out.steps.insert(out.steps.begin(), node.steps.begin(), node.steps.begin() + static_cast<long>(index));
        return out;
    });
}

}  // namespace evplan
