#include "evplan/belief_net.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace evplan {

std::string Coord::str() const {
    if (stage == kTickEnd) return std::to_string(time) + ".end";
    if (stage == kIntermediate) return std::to_string(time) + ".mid";
    return std::to_string(time) + "." + std::to_string(stage);
}

bool NodeTest::passes(Symbol value) const {
    if (value == values::failed()) return false;
    return (value == expect) == literal.positive;
}

std::string NetNode::label() const {
    switch (kind) {
        case NodeKind::Feature: return var.str() + ", " + coord.str();
        case NodeKind::Action: return step->str() + ", " + coord.str();
        case NodeKind::Event: return event->str() + ", tick " + std::to_string(tick);
        case NodeKind::Goal: return "goal, " + coord.str();
    }
    return {};
}

size_t BeliefNet::event_count() const {
    return static_cast<size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const NetNode& n) { return n.kind == NodeKind::Event; }));
}

std::vector<std::vector<size_t>> BeliefNet::children() const {
    std::vector<std::vector<size_t>> out(nodes.size());
    for (const auto& n : nodes) {
        for (size_t p : n.parents) out[p].push_back(n.id);
    }
    return out;
}

std::vector<size_t> BeliefNet::topological_order() const {
    auto kids = children();
    std::vector<size_t> indegree(nodes.size(), 0);
    for (const auto& n : nodes) indegree[n.id] = n.parents.size();
    std::set<size_t> ready;
    for (const auto& n : nodes) {
        if (indegree[n.id] == 0) ready.insert(n.id);
    }
    std::vector<size_t> order;
    while (!ready.empty()) {
        size_t id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (size_t c : kids[id]) {
            if (--indegree[c] == 0) ready.insert(c);
        }
    }
    if (order.size() != nodes.size()) throw Error("belief net has a cycle");
    return order;
}

bool BeliefNet::acyclic() const {
    try {
        topological_order();
        return true;
    } catch (const Error&) {
        return false;
    }
}

std::optional<size_t> BeliefNet::latest(const VarKey& var, Coord at) const {
    std::optional<size_t> best;
    for (const auto& n : nodes) {
        if (n.kind != NodeKind::Feature || n.var != var || n.coord > at) continue;
        if (!best || nodes[*best].coord < n.coord || (nodes[*best].coord == n.coord && n.id > *best)) best = n.id;
    }
    return best;
}

std::vector<std::pair<Symbol, double>> node_distribution(const NetNode& node, std::span<const Symbol> parent_values) {
    std::map<size_t, Symbol> value;
    for (size_t i = 0; i < node.parents.size(); ++i) value[node.parents[i]] = parent_values[i];
    auto tests_pass = [&] {
        for (const auto& t : node.tests) {
            if (!t.passes(value.at(t.node))) return false;
        }
        return true;
    };
    auto truth = [](bool b) { return b ? values::truth() : values::falsity(); };
    switch (node.kind) {
        case NodeKind::Feature: {
            if (node.role == FeatureRole::Initial) return {{node.initial_value, 1.0}};
            Symbol v = node.base ? value.at(*node.base) : values::none();
            for (size_t i = 0; i < node.event_parents.size(); ++i) {
                if (value.at(node.event_parents[i]) == values::truth()) v = apply_ops(node.event_ops[i], v);
            }
            if (node.action) {
                v = value.at(*node.action) == values::truth() ? apply_ops(node.action_ops, v) : values::failed();
            }
            return {{v, 1.0}};
        }
        case NodeKind::Action:
        case NodeKind::Goal: {
            bool ok = node.static_ok && tests_pass();
            if (node.prev_action && value.at(*node.prev_action) != values::truth()) ok = false;
            return {{truth(ok), 1.0}};
        }
        case NodeKind::Event: {
            if (!tests_pass()) return {{values::falsity(), 1.0}};
            if (node.probability >= 1.0) return {{values::truth(), 1.0}};
            return {{values::truth(), node.probability}, {values::falsity(), 1.0 - node.probability}};
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Construction

namespace {

bool overwrites(const VarOps& ops) {
    return std::any_of(ops.begin(), ops.end(), [](const VarOp& op) { return op.kind == VarOp::Kind::Set; });
}

/// Value an op list leaves behind when it overwrites, or none() after a
/// clearing-only list (an over-approximation used for reachability).
Symbol written_value(const VarOps& ops) {
    Symbol v = values::none();
    for (const auto& op : ops) {
        if (op.kind == VarOp::Kind::Set) v = op.value;
    }
    return v;
}

struct Builder {
    const Task& task;
    BeliefNet net;
    /// Variables read or written by attached events; durative steps split
    /// their effects on these into intermediate and final nodes.
    std::set<VarKey> involved;

    size_t add(NetNode n) {
        n.id = net.nodes.size();
        net.nodes.push_back(std::move(n));
        return net.nodes.back().id;
    }

    size_t latest_or_init(const VarKey& var, Coord at) {
        if (auto id = net.latest(var, at)) return *id;
        NetNode n;
        n.kind = NodeKind::Feature;
        n.role = FeatureRole::Initial;
        n.var = var;
        n.coord = {0, 0};
        n.initial_value = task.initial_state().value(var);
        return add(std::move(n));
    }

    /// Existing node of `var` at exactly `at`, else a persistence node there.
    size_t find_or_create(const VarKey& var, Coord at) {
        size_t prev = latest_or_init(var, at);
        if (net.nodes[prev].coord == at) return prev;
        NetNode n;
        n.kind = NodeKind::Feature;
        n.role = FeatureRole::Persistence;
        n.var = var;
        n.coord = at;
        n.base = prev;
        n.parents = {prev};
        return add(std::move(n));
    }

    std::vector<NodeTest> tests_for(const Conjunction& literals, Coord at, bool find_exact) {
        std::vector<NodeTest> out;
        for (const auto& lit : literals) {
            if (task.domain().is_static(lit.atom.predicate)) continue;
            VarKey var = task.var_of(lit.atom);
            size_t node = find_exact ? find_or_create(var, at) : latest_or_init(var, at);
            out.push_back({node, lit, task.value_of(lit.atom)});
        }
        return out;
    }

    void effect_node(const VarKey& var, const VarOps& ops, size_t action, Coord at, FeatureRole role) {
        NetNode n;
        n.kind = NodeKind::Feature;
        n.role = role;
        n.var = var;
        n.coord = at;
        n.action = action;
        n.action_ops = ops;
        if (!overwrites(ops)) {
            n.base = latest_or_init(var, at);
            n.parents.push_back(*n.base);
        }
        n.parents.push_back(action);
        add(std::move(n));
    }

    void events_at_tick(int tick, int step_index, const State& tick_state) {
        std::vector<const AttachedEvent*> here;
        for (const auto& a : net.attached) {
            if (a.tick == tick) here.push_back(&a);
        }
        std::sort(here.begin(), here.end(),
                  [](const AttachedEvent* x, const AttachedEvent* y) { return canonical_less(x->event, y->event); });
        if (here.empty()) return;
        Coord read_at{tick, Coord::kIntermediate};
        std::map<VarKey, std::vector<std::pair<size_t, VarOps>>> writes;
        for (const AttachedEvent* a : here) {
            NetNode n;
            n.kind = NodeKind::Event;
            n.coord = {tick, Coord::kTickEnd};
            n.event = a->event;
            n.tick = tick;
            n.round = a->round;
            n.probability = a->event.probability();
            n.step_index = static_cast<size_t>(step_index);
            n.tests = tests_for(preconditions(a->event), read_at, false);
            for (const auto& t : n.tests) n.parents.push_back(t.node);
            size_t id = add(std::move(n));
            auto ops = var_ops(task, expand_effects(task, tick_state, a->event, EffectPhase::Plain));
            for (auto& [var, o] : ops) writes[var].emplace_back(id, o);
        }
        for (auto& [var, list] : writes) {
            NetNode n;
            n.kind = NodeKind::Feature;
            n.role = FeatureRole::TickEnd;
            n.var = var;
            n.coord = {tick, Coord::kTickEnd};
            n.base = latest_or_init(var, read_at);
            n.parents.push_back(*n.base);
            for (auto& [ev, ops] : list) {
                n.event_parents.push_back(ev);
                n.event_ops.push_back(ops);
                n.parents.push_back(ev);
            }
            add(std::move(n));
        }
    }

    void build(std::span<const GroundAction> path) {
        net.path.assign(path.begin(), path.end());
        net.schedule = schedule(path);
        TickTrajectory traj = expand_ticks(task, path);
        const State init = task.initial_state();
        std::optional<size_t> prev;
        int tick = 0;
        for (size_t i = 0; i < path.size(); ++i) {
            const auto& st = net.schedule.steps[i];
            const GroundAction& step = path[i];
            Coord at{st.time, st.stage};
            NetNode a;
            a.kind = NodeKind::Action;
            a.coord = at;
            a.step = step;
            a.step_index = i;
            a.prev_action = prev;
            Conjunction pre = preconditions(step);
            for (const auto& lit : pre) {
                if (task.domain().is_static(lit.atom.predicate) && !holds(task, init, lit)) a.static_ok = false;
            }
            a.tests = tests_for(pre, at, true);
            for (const auto& t : a.tests) a.parents.push_back(t.node);
            if (prev) a.parents.push_back(*prev);
            size_t action = add(std::move(a));
            net.action_nodes.push_back(action);
            prev = action;

            const State& before = traj.before[i];
            auto initial = var_ops(task, expand_effects(task, before, step, EffectPhase::Initial));
            Coord end{st.end_time, st.end_stage};
            if (step.duration() == 0) {
                for (const auto& [var, ops] : initial) effect_node(var, ops, action, end, FeatureRole::Effect);
                continue;
            }
            State mid = apply_initial(task, before, step);
            auto final_ops = var_ops(task, expand_effects(task, mid, step, EffectPhase::Final));
            std::map<VarKey, VarOps> composite;
            for (const auto& [var, ops] : initial) {
                if (involved.count(var)) {
                    effect_node(var, ops, action, {st.time, Coord::kIntermediate}, FeatureRole::Intermediate);
                } else {
                    composite[var] = ops;
                }
            }
            for (const auto& [var, ops] : final_ops) {
                if (!involved.count(var)) composite[var].insert(composite[var].end(), ops.begin(), ops.end());
            }
            for (int k = 0; k < step.duration(); ++k, ++tick) {
                events_at_tick(tick, static_cast<int>(i), traj.ticks[static_cast<size_t>(tick)]);
            }
            for (const auto& [var, ops] : final_ops) {
                if (involved.count(var)) effect_node(var, ops, action, end, FeatureRole::Effect);
            }
            for (const auto& [var, ops] : composite) effect_node(var, ops, action, end, FeatureRole::Effect);
        }
        Coord final_at{net.schedule.final_time, net.schedule.final_stage};
        NetNode g;
        g.kind = NodeKind::Goal;
        g.coord = final_at;
        g.prev_action = prev;
        g.tests = tests_for(task.problem().goal, final_at, true);
        for (const auto& lit : task.problem().goal) {
            if (task.domain().is_static(lit.atom.predicate) && !holds(task, init, lit)) g.static_ok = false;
        }
        for (const auto& t : g.tests) g.parents.push_back(t.node);
        if (prev) g.parents.push_back(*prev);
        net.goal = add(std::move(g));
    }
};

BeliefNet build_with(const Task& task, std::span<const GroundAction> path, std::vector<AttachedEvent> attached) {
    Builder b{task, {}, {}};
    for (const auto& a : attached) {
        for (const auto& lit : preconditions(a.event)) {
            if (!task.domain().is_static(lit.atom.predicate)) b.involved.insert(task.var_of(lit.atom));
        }
        for (const auto& d : a.event.schema->plain.dels) b.involved.insert(task.var_of(instantiate(a.event, d.atom).atom));
        for (const auto& d : a.event.schema->plain.adds) b.involved.insert(task.var_of(instantiate(a.event, d.atom).atom));
    }
    b.net.attached = std::move(attached);
    b.build(path);
    return std::move(b.net);
}

// ---------------------------------------------------------------------------
// Stage 2 candidate search

/// Ordering key of an access to a variable.
struct AccessKey {
    Coord coord;
    int phase = 0;
    auto operator<=>(const AccessKey&) const = default;
};

struct Access {
    AccessKey key;
    enum class Kind { Read, Overwrite, Modify, EventWrite } kind = Kind::Read;
    Symbol value;  // written value for writes
};

class AccessMap {
public:
    AccessMap(const Task& task, const std::vector<GroundAction>& path, const Schedule& sched,
              const TickTrajectory& traj, const std::vector<AttachedEvent>& attached)
        : task_(task) {
        for (size_t i = 0; i < path.size(); ++i) {
            const auto& st = sched.steps[i];
            const auto& step = path[i];
            read(preconditions(step), {{st.time, st.stage}, 1});
            auto initial = var_ops(task, expand_effects(task, traj.before[i], step, EffectPhase::Initial));
            if (step.duration() == 0) {
                write(initial, {{st.end_time, st.end_stage}, 0});
            } else {
                write(initial, {{st.time, Coord::kIntermediate}, 0});
                State mid = apply_initial(task, traj.before[i], step);
                write(var_ops(task, expand_effects(task, mid, step, EffectPhase::Final)),
                      {{st.end_time, st.end_stage}, 0});
            }
        }
        read(task.problem().goal, {{sched.final_time, sched.final_stage}, 1});
        for (const auto& a : attached) {
            read(preconditions(a.event), {{a.tick, Coord::kTickEnd}, 0});
            auto ops = var_ops(task, expand_effects(task, traj.ticks[static_cast<size_t>(a.tick)], a.event,
                                                    EffectPhase::Plain));
            for (const auto& [var, o] : ops) {
                by_var_[var].push_back({{{a.tick, Coord::kTickEnd}, 1}, Access::Kind::EventWrite, written_value(o)});
            }
        }
        for (auto& [var, list] : by_var_) {
            std::stable_sort(list.begin(), list.end(), [](const Access& x, const Access& y) { return x.key < y.key; });
        }
    }

    /// An event write at `tick` reaches a later read before being overwritten.
    bool live(const VarKey& var, int tick) const {
        auto it = by_var_.find(var);
        if (it == by_var_.end()) return false;
        AccessKey at{{tick, Coord::kTickEnd}, 1};
        for (const auto& a : it->second) {
            if (a.key <= at || a.kind == Access::Kind::EventWrite) continue;
            return a.kind != Access::Kind::Overwrite;
        }
        return false;
    }

    /// Values `var` may hold at the start of `tick` besides its nominal value.
    std::set<Symbol> event_values(const VarKey& var, int tick) const {
        std::set<Symbol> out;
        auto it = by_var_.find(var);
        if (it == by_var_.end()) return out;
        AccessKey at{{tick, Coord::kTickEnd}, 0};
        for (const auto& a : it->second) {
            if (!(a.key < at)) break;
            if (a.kind == Access::Kind::Overwrite) out.clear();
            if (a.kind == Access::Kind::EventWrite) out.insert(a.value);
        }
        return out;
    }

private:
    void read(const Conjunction& lits, AccessKey key) {
        for (const auto& l : lits) {
            if (task_.domain().is_static(l.atom.predicate)) continue;
            by_var_[task_.var_of(l.atom)].push_back({key, Access::Kind::Read, {}});
        }
    }
    void write(const std::map<VarKey, VarOps>& ops, AccessKey key) {
        for (const auto& [var, o] : ops) {
            by_var_[var].push_back({key, overwrites(o) ? Access::Kind::Overwrite : Access::Kind::Modify,
                                    written_value(o)});
        }
    }

    const Task& task_;
    std::map<VarKey, std::vector<Access>> by_var_;
};

bool same_instance(const AttachedEvent& a, const GroundAction& e, int tick) { return a.tick == tick && a.event == e; }

}  // namespace

BeliefNet build_stage1(const Task& task, std::span<const GroundAction> path) { return build_with(task, path, {}); }

BeliefNet build_stage2(const Task& task, const BeliefNet& net, int max_chain) {
    if (max_chain < 1) throw DomainError("max_chain must be at least 1");
    TickTrajectory traj = expand_ticks(task, net.path);
    std::vector<AttachedEvent> attached = net.attached;
    int rounds = net.rounds;
    bool fixpoint = false;
    const auto& events = task.ground_events();
    const auto& event_pre = task.ground_event_preconditions();
    while (true) {
        AccessMap access(task, net.path, net.schedule, traj, attached);
        std::vector<AttachedEvent> found;
        for (int tick = 0; tick < static_cast<int>(traj.ticks.size()); ++tick) {
            const State& s = traj.ticks[static_cast<size_t>(tick)];
            for (size_t e = 0; e < events.size(); ++e) {
                const GroundAction& ev = events[e];
                bool exists = std::any_of(attached.begin(), attached.end(),
                                          [&](const AttachedEvent& a) { return same_instance(a, ev, tick); });
                if (exists) continue;
                auto ops = var_ops(task, expand_effects(task, s, ev, EffectPhase::Plain));
                bool relevant = std::any_of(ops.begin(), ops.end(),
                                            [&](const auto& kv) { return access.live(kv.first, tick); });
                if (!relevant) continue;
                bool possible = true;
                for (const auto& lit : event_pre[e]) {
                    if (task.domain().is_static(lit.atom.predicate)) continue;
                    VarKey var = task.var_of(lit.atom);
                    auto vals = access.event_values(var, tick);
                    vals.insert(s.value(var));
                    NodeTest t{0, lit, task.value_of(lit.atom)};
                    if (std::none_of(vals.begin(), vals.end(), [&](Symbol v) { return t.passes(v); })) {
                        possible = false;
                        break;
                    }
                }
                if (possible) found.push_back({ev, tick, rounds + 1});
            }
        }
        if (found.empty()) {
            fixpoint = true;
            break;
        }
        if (rounds >= max_chain) break;
        ++rounds;
        attached.insert(attached.end(), found.begin(), found.end());
    }
    BeliefNet out = build_with(task, net.path, std::move(attached));
    out.rounds = rounds;
    out.fixpoint = fixpoint;
    return out;
}

BeliefNet build_net(const Task& task, std::span<const GroundAction> path, int max_chain) {
    return build_stage2(task, build_stage1(task, path), max_chain);
}

std::vector<PersistenceLink> persistence_links(const BeliefNet& net) {
    std::vector<PersistenceLink> out;
    for (const auto& n : net.nodes) {
        if (n.kind != NodeKind::Feature || n.action || !n.base) continue;
        const NetNode& from = net.nodes[*n.base];
        int first = from.coord.stage == Coord::kTickEnd ? from.coord.time + 1 : from.coord.time;
        int end = n.coord.stage == Coord::kTickEnd ? n.coord.time + 1 : n.coord.time;
        if (n.coord.stage == Coord::kTickEnd) first = std::min(first, n.coord.time);
        out.push_back({from.id, n.id, first, std::max(first, end)});
    }
    return out;
}

std::string export_dot(const BeliefNet& net) {
    std::ostringstream os;
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') q += '\\';
            q += c;
        }
        return q + "\"";
    };
    os << "digraph plan {\n  rankdir=LR;\n";
    for (const auto& n : net.nodes) {
        os << "  n" << n.id << " [label=" << quote(n.label());
        switch (n.kind) {
            case NodeKind::Action: os << ", shape=box, style=filled, fillcolor=gray80"; break;
            case NodeKind::Event: os << ", shape=ellipse, style=dashed"; break;
            case NodeKind::Goal: os << ", shape=doubleoctagon"; break;
            case NodeKind::Feature: os << ", shape=ellipse"; break;
        }
        os << "];\n";
    }
    for (const auto& n : net.nodes) {
        for (size_t p : n.parents) os << "  n" << p << " -> n" << n.id << ";\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace evplan
