#include "evplan/failure.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace evplan {

std::string FailureMode::describe(const BeliefNet& net) const {
    std::ostringstream os;
    os << step_name << " needs " << violated.str() << "; p = " << probability << "; "
       << net.nodes[terminal].event->name().str() << " over ticks " << first_tick << ".." << end_tick - 1 << " ("
       << chain.size() << " event node" << (chain.size() == 1 ? "" : "s") << ", chain length " << chain_length << ")";
    return os.str();
}

namespace {

std::set<size_t> event_ancestors(const BeliefNet& net, size_t feature) {
    std::set<size_t> events;
    std::set<size_t> seen;
    std::vector<size_t> stack{feature};
    while (!stack.empty()) {
        size_t id = stack.back();
        stack.pop_back();
        if (!seen.insert(id).second) continue;
        const NetNode& n = net.nodes[id];
        if (n.kind == NodeKind::Event) {
            events.insert(id);
            for (const auto& t : n.tests) stack.push_back(t.node);
        } else if (n.kind == NodeKind::Feature) {
            if (n.base) stack.push_back(*n.base);
            for (size_t e : n.event_parents) stack.push_back(e);
        }
    }
    return events;
}

std::pair<int, int> persistence_interval(const BeliefNet& net, size_t feature) {
    const NetNode* n = &net.nodes[feature];
    int end = n->coord.time;
    while (n->kind == NodeKind::Feature && !n->action && n->base) n = &net.nodes[*n->base];
    int first = n->coord.time;
    if (n->coord.stage == Coord::kTickEnd) first += 1;
    return {first, std::max(first, end)};
}

}  // namespace

std::vector<FailureMode> find_failures(const BeliefNet& net, int max_chain, const InferenceOptions& options) {
    std::vector<FailureMode> out;
    std::vector<size_t> checked = net.action_nodes;
    checked.push_back(net.goal);
    for (size_t id : checked) {
        const NetNode& node = net.nodes[id];
        for (size_t ti = 0; ti < node.tests.size(); ++ti) {
            const NodeTest& test = node.tests[ti];
            auto events = event_ancestors(net, test.node);
            if (events.empty()) continue;
            FailureMode m;
            m.node = id;
            m.test_index = ti;
            m.at_goal = node.kind == NodeKind::Goal;
            m.step_index = m.at_goal ? net.path.size() : node.step_index;
            m.step_name = m.at_goal ? "goal" : node.step->str();
            m.violated = test.literal;
            m.chain.assign(events.begin(), events.end());
            std::sort(m.chain.begin(), m.chain.end(), [&](size_t a, size_t b) {
                return std::make_pair(net.nodes[a].tick, a) < std::make_pair(net.nodes[b].tick, b);
            });
            for (size_t e : m.chain) m.chain_length = std::max(m.chain_length, net.nodes[e].round);
            if (m.chain_length > max_chain) continue;
            // The terminal event writes the threatened variable itself.
            VarKey var = net.nodes[test.node].var;
            std::optional<size_t> terminal;
            for (size_t e : m.chain) {
                for (const auto& n : net.nodes) {
                    if (n.kind != NodeKind::Feature || n.var != var) continue;
                    if (std::find(n.event_parents.begin(), n.event_parents.end(), e) != n.event_parents.end()) {
                        terminal = e;
                    }
                }
            }
            if (!terminal) continue;
            m.terminal = *terminal;
            std::tie(m.first_tick, m.end_tick) = persistence_interval(net, test.node);
            m.probability = violation_marginal(net, id, ti, options);
            if (m.probability <= 1e-15) continue;
            out.push_back(std::move(m));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const FailureMode& a, const FailureMode& b) {
        return std::make_pair(a.chain_length, a.step_index) < std::make_pair(b.chain_length, b.step_index);
    });
    return out;
}

std::vector<FailureMode> rank_failures(std::vector<FailureMode> modes) {
    std::stable_sort(modes.begin(), modes.end(), [](const FailureMode& a, const FailureMode& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return std::make_pair(a.first_tick, a.end_tick) < std::make_pair(b.first_tick, b.end_tick);
    });
    return modes;
}

PlanAnalysis analyze_plan(const Task& task, const ConditionalPlan& plan, int max_chain) {
    PlanAnalysis a;
    a.path = nominal_path(task, plan);
    a.net = build_net(task, a.path.steps, max_chain);
    a.outcomes = enumerate_outcomes(task, plan);
    a.success = a.outcomes.success();
    Schedule sched = a.net.schedule;
    auto time_at = [&](size_t index) {
        return index < sched.steps.size() ? sched.steps[index].time : sched.final_time;
    };
    for (auto& m : find_failures(a.net, max_chain)) {
        VarKey var = task.var_of(m.violated.atom);
        bool covered = false;
        for (const auto& b : a.path.branches) {
            if (b.position > m.step_index || time_at(b.position) != time_at(m.step_index)) continue;
            for (const auto& lit : b.condition) {
                if (task.var_of(lit.atom) == var) covered = true;
            }
        }
        if (!covered) a.failures.push_back(std::move(m));
    }
    a.failures = rank_failures(std::move(a.failures));
    return a;
}

double two_state_flip(double p, int n) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability must lie in [0, 1]");
    if (n < 0) throw DomainError("tick count must be non-negative");
    return (1.0 - std::pow(1.0 - 2.0 * p, n)) / 2.0;
}

double persistence_survival(double p, int n) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability must lie in [0, 1]");
    if (n < 0) throw DomainError("tick count must be non-negative");
    return std::pow(1.0 - p, n);
}

}  // namespace evplan
