#pragma once

// Belief nets compiled from linear plan paths.
//
// Stage 1 is the deterministic skeleton: one node per action, feature nodes
// for the variables the actions read and write, and a goal node. Stage 2
// attaches exogenous event nodes wherever an event can change a value that is
// later read, repeating on the event nodes' own preconditions.

#include <climits>
#include <compare>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evplan/model.hpp"
#include "evplan/plan.hpp"

namespace evplan {

/// (time, stage) position. Two stage values sit after every regular stage of
/// a time: the intermediate state of a durative step, and the end of a tick
/// (after that tick's events).
struct Coord {
    int time = 0;
    int stage = 0;

    static constexpr int kIntermediate = INT_MAX - 1;
    static constexpr int kTickEnd = INT_MAX;

    std::string str() const;
    auto operator<=>(const Coord&) const = default;
};

enum class NodeKind { Feature, Action, Event, Goal };
enum class FeatureRole { Initial, Persistence, Effect, Intermediate, TickEnd };

/// A precondition checked against a feature node's value.
struct NodeTest {
    size_t node = 0;
    GroundLiteral literal;
    Symbol expect;  // functional value, or truth() for boolean facts

    bool passes(Symbol value) const;
};

struct NetNode {
    size_t id = 0;
    NodeKind kind = NodeKind::Feature;
    Coord coord;
    std::vector<size_t> parents;

    // Feature nodes: value = initial, or base value, then each fired event's
    // ops, then the action's ops (FAILED when the action did not run).
    VarKey var;
    FeatureRole role = FeatureRole::Initial;
    Symbol initial_value;
    std::optional<size_t> base;
    std::vector<size_t> event_parents;
    std::vector<VarOps> event_ops;
    std::optional<size_t> action;
    VarOps action_ops;

    // Action, event and goal nodes are true when every test passes (and, for
    // actions and the goal, the previous action ran).
    std::vector<NodeTest> tests;
    std::optional<size_t> prev_action;
    bool static_ok = true;

    // Action nodes.
    std::optional<GroundAction> step;
    size_t step_index = 0;

    // Event nodes: Bernoulli(probability) once the tests pass.
    std::optional<GroundAction> event;
    int tick = 0;
    int round = 0;
    double probability = 0.0;

    std::string label() const;
};

struct AttachedEvent {
    GroundAction event;
    int tick = 0;
    int round = 0;
};

struct BeliefNet {
    std::vector<GroundAction> path;
    Schedule schedule;
    std::vector<NetNode> nodes;
    std::vector<size_t> action_nodes;  // index-aligned with path
    size_t goal = 0;
    std::vector<AttachedEvent> attached;
    /// Rounds of Stage 2 that added events, and whether a further round
    /// found nothing new.
    int rounds = 0;
    bool fixpoint = false;

    size_t event_count() const;
    std::vector<std::vector<size_t>> children() const;
    /// Kahn order with ties broken by node id. Throws Error on a cycle.
    std::vector<size_t> topological_order() const;
    bool acyclic() const;
    /// Latest feature node of `var` at or before `at`, if any.
    std::optional<size_t> latest(const VarKey& var, Coord at) const;
};

/// Conditional distribution of one node given its parents' values
/// (aligned with node.parents). Entries with zero probability are omitted.
std::vector<std::pair<Symbol, double>> node_distribution(const NetNode& node, std::span<const Symbol> parent_values);

/// Throws InvalidPlan when the path does not execute event-free.
BeliefNet build_stage1(const Task& task, std::span<const GroundAction> path);
/// Adds event nodes in rounds until nothing new appears or `max_chain` rounds
/// have added events. Events already attached to `net` are kept.
BeliefNet build_stage2(const Task& task, const BeliefNet& net, int max_chain = 3);
/// Stage 1 followed by Stage 2.
BeliefNet build_net(const Task& task, std::span<const GroundAction> path, int max_chain = 3);

struct PersistenceLink {
    size_t from = 0;
    size_t to = 0;
    int first_tick = 0;  // ticks [first_tick, end_tick) elapse along the link
    int end_tick = 0;

    int ticks() const { return end_tick - first_tick; }
};

/// Feature-to-feature carry-overs that no action produces.
std::vector<PersistenceLink> persistence_links(const BeliefNet& net);

/// Graphviz text. Features are labelled "Var, T.S", actions are filled boxes,
/// events dashed ellipses.
std::string export_dot(const BeliefNet& net);

}  // namespace evplan
