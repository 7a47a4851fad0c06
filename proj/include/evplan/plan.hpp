#pragma once

// Linear and conditional plans, the (time, stage) schedule, and the nominal
// tick-by-tick trajectory.

#include <memory>
#include <span>
#include <vector>

#include "evplan/model.hpp"

namespace evplan {

struct Branch;

/// A run of steps optionally ending in a branch. Branch conditions describe
/// the alternate (event-produced) situation: `then` is the alternate
/// continuation and `else` the original one.
struct ConditionalPlan {
    std::vector<GroundAction> steps;
    std::shared_ptr<const Branch> branch;

    bool is_linear() const { return branch == nullptr; }
    bool operator==(const ConditionalPlan& other) const;
};

struct Branch {
    Conjunction condition;
    ConditionalPlan then_plan;
    ConditionalPlan else_plan;
};

ConditionalPlan make_linear(std::vector<GroundAction> steps);
ConditionalPlan make_branch(std::vector<GroundAction> prefix, Conjunction condition, ConditionalPlan then_plan,
                            ConditionalPlan else_plan);

/// Branch evaluated on a path just before steps[position].
struct BranchPoint {
    size_t position = 0;
    Conjunction condition;
    bool taken = false;
};

/// One root-to-leaf route through a conditional plan.
struct PlanPath {
    std::vector<GroundAction> steps;
    std::vector<BranchPoint> branches;
};

std::vector<PlanPath> all_paths(const ConditionalPlan& plan);
/// The route taken by event-free execution from the initial state.
PlanPath nominal_path(const Task& task, const ConditionalPlan& plan);
size_t count_steps(const ConditionalPlan& plan);

struct ScheduledStep {
    GroundAction step;
    int time = 0;    // start coordinate
    int stage = 0;
    int end_time = 0;  // post-update coordinate, where the effects sit
    int end_stage = 0;
};

struct Schedule {
    std::vector<ScheduledStep> steps;
    int total_duration = 0;
    int final_time = 0;
    int final_stage = 0;
};

/// T and S start at 0; a step of duration d > 0 moves to (T + d, 0), a
/// zero-duration step to (T, S + 1).
Schedule schedule(std::span<const GroundAction> path);

/// Nominal event-free execution of a linear path.
struct TickTrajectory {
    /// before[i] is the state when step i is checked; before.back() is final.
    std::vector<State> before;
    /// ticks[t] is the state at the start of tick t (durative initial effects applied).
    std::vector<State> ticks;
    /// Index of the step in progress during each tick.
    std::vector<size_t> tick_step;
};

TickTrajectory expand_ticks(const Task& task, std::span<const GroundAction> path,
                            const State* start = nullptr);

/// Address in a conditional plan: the branch decisions (true = then) taken
/// from the root, and a step index inside the node reached.
struct PlanPosition {
    std::vector<bool> decisions;
    size_t index = 0;
};

/// Position of path step `index` (or the path end), descending through every
/// branch evaluated at or before that boundary.
PlanPosition position_on_path(const PlanPath& path, size_t index);

ConditionalPlan attach_branch(const ConditionalPlan& plan, const PlanPosition& position, Conjunction condition,
                              ConditionalPlan alternate);
/// Replaces everything from `position` on (in that subtree) by `suffix`.
ConditionalPlan replace_suffix(const ConditionalPlan& plan, const PlanPosition& position, ConditionalPlan suffix);

}  // namespace evplan
