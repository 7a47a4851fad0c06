#pragma once

// Classical planning under event-free semantics.

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "evplan/model.hpp"
#include "evplan/plan.hpp"

namespace evplan {

struct PlannerLimits {
    size_t max_length = 40;
    size_t max_nodes = 200000;
    std::optional<std::chrono::milliseconds> deadline;
};

/// Shortest plan from the problem's initial state. Among plans of minimal
/// length the one chosen is smallest when compared from the last step
/// backwards, which matches what goal regression would settle on first.
/// Throws Unsolvable when the goal is unreachable even ignoring deletes, and
/// NoPlanFound when the limits are exhausted.
std::vector<GroundAction> plan(const Task& task, const PlannerLimits& limits = {});

/// Same search from an arbitrary state. `extra` adds preconditions per
/// operator name. Throws NoPlanFound.
std::vector<GroundAction> replan(const Task& task, const State& start, const Conjunction& goal,
                                 const PlannerLimits& limits = {}, const ExtraPreconditions* extra = nullptr);

/// Goal reachable when deletes and negative conditions are ignored.
bool relaxed_reachable(const Task& task, const State& start, const Conjunction& goal);

/// Yields distinct loop-free plans by nondecreasing length; within a length
/// in the same backwards order used by plan(). The first result equals plan().
class PlanEnumerator {
public:
    PlanEnumerator(const Task& task, const State& start, Conjunction goal, PlannerLimits limits = {},
                   const ExtraPreconditions* extra = nullptr);

    std::optional<std::vector<GroundAction>> next();

private:
    void build_graph();
    void fill(size_t length);

    const Task& task_;
    State start_;
    Conjunction goal_;
    PlannerLimits limits_;
    const ExtraPreconditions* extra_;
    size_t length_ = 0;
    bool started_ = false;
    std::vector<std::vector<GroundAction>> pending_;
    size_t cursor_ = 0;
    bool graph_built_ = false;
    bool graph_ok_ = false;
    std::vector<std::vector<std::pair<size_t, size_t>>> edges_;  // (operator, successor)
    std::vector<size_t> dist_;
};

struct PlanCheck {
    bool ok = false;
    /// Steps executed before the violation (index along the taken path).
    std::optional<size_t> failed_step;
    std::string violation;
};

/// Event-free execution through branches (the branch taken is the one the
/// simulated state selects); ok iff every step applies and the goal holds.
PlanCheck validate_plan(const Task& task, const ConditionalPlan& plan);
PlanCheck validate_plan(const Task& task, const ConditionalPlan& plan, const State& start, const Conjunction& goal);

}  // namespace evplan
