#pragma once

// Failure modes: event chains that defeat a persistence assumption, plus the
// closed forms for simple persistence probabilities.

#include <string>
#include <vector>

#include "evplan/belief_net.hpp"
#include "evplan/inference.hpp"

namespace evplan {

struct FailureMode {
    size_t node = 0;        // action or goal node whose test fails
    size_t test_index = 0;
    bool at_goal = false;
    size_t step_index = 0;  // path index of the threatened step (path length for the goal)
    std::string step_name;
    GroundLiteral violated;
    /// Event nodes in the failure's ancestry, ordered by tick then id.
    std::vector<size_t> chain;
    /// Latest chain event that writes the violated variable.
    size_t terminal = 0;
    /// Longest event chain needed (the Stage 2 round of the deepest event).
    int chain_length = 0;
    /// Ticks [first_tick, end_tick) over which the threatened value persists.
    int first_tick = 0;
    int end_tick = 0;
    /// Probability the test fails on a value that is not FAILED.
    double probability = 0.0;

    std::string describe(const BeliefNet& net) const;
};

/// Failure modes of a linear-path net in nondecreasing chain length (then by
/// step). Modes with probability zero are dropped.
std::vector<FailureMode> find_failures(const BeliefNet& net, int max_chain = 3, const InferenceOptions& options = {});

/// Stable sort: probability descending, ties by earlier interval.
std::vector<FailureMode> rank_failures(std::vector<FailureMode> modes);

/// Net, exact success probability and failure modes of a (possibly
/// conditional) plan. Failure modes come from the nominal route; a mode is
/// dropped when a branch right before the threatened step already tests the
/// violated variable.
struct PlanAnalysis {
    PlanPath path;
    BeliefNet net;
    double success = 0.0;
    OutcomeDistribution outcomes;
    std::vector<FailureMode> failures;  // ranked
};

PlanAnalysis analyze_plan(const Task& task, const ConditionalPlan& plan, int max_chain = 3);

/// (1 - (1 - 2p)^n) / 2: a two-location flip chain is displaced after n ticks.
double two_state_flip(double p, int n);
/// (1 - p)^n: a fact survives n ticks against a per-tick destroyer.
double persistence_survival(double p, int n);

}  // namespace evplan
