#pragma once

// Exact probabilities: belief-net evaluation for linear paths and an
// execution-tree oracle that also covers conditional plans.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "evplan/belief_net.hpp"

namespace evplan {

struct InferenceOptions {
    size_t max_event_nodes = 40;
    /// Node values fixed regardless of their parents.
    std::map<size_t, Symbol> interventions;
};

/// Probability that some predicate holds of a node's value.
struct NetQuery {
    size_t node = 0;
    std::function<bool(Symbol)> accept;
};

/// Exact marginals of the queries. Enumerates joint assignments of the nodes
/// still needed downstream, in topological order; only event nodes branch.
/// Throws NetTooLarge above the event-node bound.
std::vector<double> query_net(const BeliefNet& net, const std::vector<NetQuery>& queries,
                              const InferenceOptions& options = {});

/// Probability that the goal node is true.
double evaluate_net(const BeliefNet& net, const InferenceOptions& options = {});
/// Probability that an event node fires.
double event_marginal(const BeliefNet& net, size_t event_node, const InferenceOptions& options = {});
/// Probability that test `test_index` of an action or goal node fails on a
/// value that is not FAILED (the step's own precondition is violated).
double violation_marginal(const BeliefNet& net, size_t node, size_t test_index,
                          const InferenceOptions& options = {});

/// Terminal outcome of one execution.
struct Outcome {
    bool success = false;
    /// Failed step's index along the executed route; the path length when
    /// only the goal test failed.
    size_t step = 0;
    std::string step_name;  // "(op args)", or "goal"
    Conjunction violated;
    /// Last event that wrote each violated variable, by event name ("none"
    /// when no event touched it).
    std::vector<std::string> causes;

    /// Stable text key, e.g. "(drive seattle-taxi ...)|(location ...)|taxi-moves".
    std::string key() const;
    auto operator<=>(const Outcome&) const = default;
};

struct OutcomeDistribution {
    std::map<Outcome, double> outcomes;

    double success() const;
    double total() const;
    /// Sum over failures whose key contains `needle`.
    double failure_mass(const std::string& needle) const;
};

struct OracleOptions {
    /// Bound on distinct (state, cause) branches alive at once, times the
    /// number of event subsets considered at a tick.
    size_t max_leaves = size_t{1} << 22;
};

/// Exhaustive execution: at every tick each enabled event occurs or not
/// (probability p / 1-p), effects in canonical order before the step's final
/// effects; branches resolved on the current state. Throws TreeTooLarge.
OutcomeDistribution enumerate_outcomes(const Task& task, const ConditionalPlan& plan, const OracleOptions& options = {});

}  // namespace evplan
