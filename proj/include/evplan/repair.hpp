#pragma once

// Plan repair: conditional branches, protection and rescheduling, driven by
// a loop that keeps only repairs which raise the success probability.

#include <string>
#include <vector>

#include "evplan/failure.hpp"
#include "evplan/planner.hpp"

namespace evplan {

/// Nominal state right before the failure's step with the contradicting
/// event's effects applied, and the branch condition that detects it.
struct AlternateState {
    State state;
    Conjunction condition;
    GroundAction event;
};

AlternateState predict_alternate(const Task& task, const PlanAnalysis& analysis, const FailureMode& failure);

/// Branch before the threatened step: `then` replans from the predicted
/// alternate state, `else` is the original continuation. Throws RepairFailed.
ConditionalPlan repair_branch(const Task& task, const ConditionalPlan& plan, const PlanAnalysis& analysis,
                              const FailureMode& failure, const PlannerLimits& limits = {});

/// Negations of the event's preconditions that protection may require,
/// in precondition order. Static literals and the threatened fact are skipped.
Conjunction protection_candidates(const Task& task, const GroundAction& event, const FailureMode& failure);

/// Replans the nominal route from the first durative step overlapping the
/// failure's interval, with `negated` as an extra precondition of that
/// ground step. Throws RepairFailed.
ConditionalPlan repair_protect(const Task& task, const ConditionalPlan& plan, const PlanAnalysis& analysis,
                               const FailureMode& failure, const GroundLiteral& negated,
                               const PlannerLimits& limits = {});

/// Ticks the threatened variable spends unwritten before it is read, summed
/// over every step precondition and the goal that mention it, along an
/// event-free schedule.
int exposure(const Task& task, std::span<const GroundAction> path, const GroundLiteral& threatened);

/// Valid reordering of a linear plan with the smallest exposure of the
/// threatened step; the plan itself when nothing is strictly better.
std::vector<GroundAction> repair_reschedule(const Task& task, std::span<const GroundAction> path,
                                            const FailureMode& failure, size_t max_nodes = 200000);

enum class RepairMethod { Branch, Protect, Reschedule };
enum class Termination { ThresholdMet, BudgetExhausted, NoRepairImproves };

std::string to_string(RepairMethod m);
std::string to_string(Termination t);

struct RepairAttempt {
    int iteration = 0;
    std::string failure;  // FailureMode::describe
    RepairMethod method = RepairMethod::Branch;
    std::string detail;   // chosen literal, or the reason for rejection
    bool accepted = false;
    double before = 0.0;
    double after = 0.0;
};

struct RepairReport {
    std::vector<RepairAttempt> log;
    /// Initial plans tried; the last one is the one the final plan grew from.
    int initial_plans = 0;
    ConditionalPlan plan;
    double probability = 0.0;
    Termination termination = Termination::NoRepairImproves;

    std::string str() const;
};

struct SolveOptions {
    double threshold = 0.9;
    /// Repair attempts allowed, over all iterations and initial plans.
    int budget = 20;
    int max_chain = 3;
    /// Initial plans considered before giving up.
    int max_initial_plans = 3;
    std::vector<RepairMethod> methods{RepairMethod::Branch, RepairMethod::Protect, RepairMethod::Reschedule};
    PlannerLimits limits;
};

/// Throws Unsolvable / NoPlanFound when there is no initial plan, and
/// DomainError for a threshold outside [0, 1].
RepairReport solve(const Task& task, const SolveOptions& options = {});

}  // namespace evplan
