#include "evplan/inference.hpp"

#include <algorithm>

namespace evplan {

std::vector<double> query_net(const BeliefNet& net, const std::vector<NetQuery>& queries,
                              const InferenceOptions& options) {
    if (net.event_count() > options.max_event_nodes) {
        throw NetTooLarge(std::to_string(net.event_count()) + " event nodes exceed the bound of " +
                          std::to_string(options.max_event_nodes));
    }
    std::vector<double> result(queries.size(), 0.0);
    std::vector<std::vector<size_t>> queries_of(net.nodes.size());
    for (size_t q = 0; q < queries.size(); ++q) queries_of.at(queries[q].node).push_back(q);

    auto kids = net.children();
    std::vector<size_t> pending(net.nodes.size());
    for (size_t i = 0; i < net.nodes.size(); ++i) pending[i] = kids[i].size();

    std::vector<size_t> live;
    std::map<std::vector<Symbol>, double> frontier{{{}, 1.0}};
    std::vector<Symbol> parent_values;
    for (size_t id : net.topological_order()) {
        const NetNode& node = net.nodes[id];
        std::vector<size_t> slots;
        for (size_t p : node.parents) {
            slots.push_back(static_cast<size_t>(std::find(live.begin(), live.end(), p) - live.begin()));
        }
        auto pinned = options.interventions.find(id);
        std::map<std::vector<Symbol>, double> next;
        for (const auto& [key, p] : frontier) {
            std::vector<std::pair<Symbol, double>> dist;
            if (pinned != options.interventions.end()) {
                dist = {{pinned->second, 1.0}};
            } else {
                parent_values.clear();
                for (size_t s : slots) parent_values.push_back(key[s]);
                dist = node_distribution(node, parent_values);
            }
            for (const auto& [v, q] : dist) {
                for (size_t qi : queries_of[id]) {
                    if (queries[qi].accept(v)) result[qi] += p * q;
                }
                std::vector<Symbol> k = key;
                k.push_back(v);
                next[std::move(k)] += p * q;
            }
        }
        live.push_back(id);
        for (size_t p : node.parents) --pending[p];
        // Forget nodes no remaining node depends on.
        std::vector<bool> keep(live.size());
        bool drop = false;
        for (size_t i = 0; i < live.size(); ++i) {
            keep[i] = pending[live[i]] > 0;
            drop = drop || !keep[i];
        }
        if (drop) {
            std::map<std::vector<Symbol>, double> merged;
            for (const auto& [key, p] : next) {
                std::vector<Symbol> k;
                for (size_t i = 0; i < key.size(); ++i) {
                    if (keep[i]) k.push_back(key[i]);
                }
                merged[std::move(k)] += p;
            }
            next = std::move(merged);
            std::vector<size_t> kept;
            for (size_t i = 0; i < live.size(); ++i) {
                if (keep[i]) kept.push_back(live[i]);
            }
            live = std::move(kept);
        }
        frontier = std::move(next);
    }
    return result;
}

double evaluate_net(const BeliefNet& net, const InferenceOptions& options) {
    return query_net(net, {{net.goal, [](Symbol v) { return v == values::truth(); }}}, options).front();
}

double event_marginal(const BeliefNet& net, size_t event_node, const InferenceOptions& options) {
    if (net.nodes.at(event_node).kind != NodeKind::Event) throw Error("node " + std::to_string(event_node) + " is not an event");
    return query_net(net, {{event_node, [](Symbol v) { return v == values::truth(); }}}, options).front();
}

double violation_marginal(const BeliefNet& net, size_t node, size_t test_index, const InferenceOptions& options) {
    const NodeTest& test = net.nodes.at(node).tests.at(test_index);
    auto accept = [test](Symbol v) { return v != values::failed() && !test.passes(v); };
    return query_net(net, {{test.node, accept}}, options).front();
}

// ---------------------------------------------------------------------------
// Execution-tree oracle

std::string Outcome::key() const {
    if (success) return "success";
    std::string k = step_name + "|" + conjunction_str(violated) + "|";
    for (size_t i = 0; i < causes.size(); ++i) k += (i ? "," : "") + causes[i];
    return k;
}

double OutcomeDistribution::success() const {
    double s = 0.0;
    for (const auto& [o, p] : outcomes) {
        if (o.success) s += p;
    }
    return s;
}

double OutcomeDistribution::total() const {
    double s = 0.0;
    for (const auto& [o, p] : outcomes) s += p;
    return s;
}

double OutcomeDistribution::failure_mass(const std::string& needle) const {
    double s = 0.0;
    for (const auto& [o, p] : outcomes) {
        if (!o.success && o.key().find(needle) != std::string::npos) s += p;
    }
    return s;
}

namespace {

struct Config {
    State state;
    std::map<VarKey, Symbol> cause;  // event name that last wrote the variable
    auto operator<=>(const Config&) const = default;
};

using Dist = std::map<Config, double>;

class Oracle {
public:
    Oracle(const Task& task, const OracleOptions& options) : task_(task), options_(options) {}

    OutcomeDistribution run(const ConditionalPlan& plan) {
        Dist start{{Config{task_.initial_state(), {}}, 1.0}};
        walk(plan, std::move(start), 0);
        return std::move(out_);
    }

private:
    void fail(const Config& c, double p, size_t index, const std::string& name, const Conjunction& bad) {
        Outcome o;
        o.step = index;
        o.step_name = name;
        o.violated = bad;
        for (const auto& l : bad) {
            auto it = c.cause.find(task_.var_of(l.atom));
            o.causes.push_back(it == c.cause.end() ? "none" : it->second.str());
        }
        out_.outcomes[o] += p;
    }

    void clear_causes(Config& c, const EffectSet& fx) {
        for (const auto* list : {&fx.adds, &fx.dels}) {
            for (const auto& a : *list) c.cause.erase(task_.var_of(a));
        }
    }

    Dist tick(const Dist& in) {
        Dist next;
        for (const auto& [cfg, p] : in) {
            auto enabled = enabled_events(task_, cfg.state);
            size_t n = enabled.size();
            if (n >= 63 || (in.size() << n) > options_.max_leaves) {
                throw TreeTooLarge("execution tree exceeds " + std::to_string(options_.max_leaves) + " leaves");
            }
            std::vector<EffectSet> effects;
            for (const auto& e : enabled) effects.push_back(expand_effects(task_, cfg.state, e, EffectPhase::Plain));
            for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
                double q = p;
                Config c = cfg;
                for (size_t i = 0; i < n; ++i) {
                    double pe = enabled[i].probability();
                    if (mask & (uint64_t{1} << i)) {
                        q *= pe;
                        apply_effects(task_, c.state, effects[i]);
                        for (const auto* list : {&effects[i].adds, &effects[i].dels}) {
                            for (const auto& a : *list) c.cause[task_.var_of(a)] = enabled[i].name();
                        }
                    } else {
                        q *= 1.0 - pe;
                    }
                }
                if (q > 0.0) next[std::move(c)] += q;
            }
        }
        return next;
    }

    void walk(const ConditionalPlan& node, Dist dist, size_t index) {
        for (const auto& step : node.steps) {
            Dist after;
            for (const auto& [cfg, p] : dist) {
                if (!applicable(task_, cfg.state, step)) {
                    fail(cfg, p, index, step.str(), violated(task_, cfg.state, preconditions(step)));
                    continue;
                }
                Config c = cfg;
                EffectSet fx = expand_effects(task_, c.state, step, EffectPhase::Initial);
                apply_effects(task_, c.state, fx);
                clear_causes(c, fx);
                after[std::move(c)] += p;
            }
            for (int k = 0; k < step.duration(); ++k) after = tick(after);
            dist.clear();
            for (const auto& [cfg, p] : after) {
                Config c = cfg;
                EffectSet fx = expand_effects(task_, c.state, step, EffectPhase::Final);
                apply_effects(task_, c.state, fx);
                clear_causes(c, fx);
                dist[std::move(c)] += p;
            }
            ++index;
        }
        if (node.branch) {
            Dist then_dist;
            Dist else_dist;
            for (auto& [cfg, p] : dist) {
                (holds(task_, cfg.state, node.branch->condition) ? then_dist : else_dist)[cfg] += p;
            }
            if (!then_dist.empty()) walk(node.branch->then_plan, std::move(then_dist), index);
            if (!else_dist.empty()) walk(node.branch->else_plan, std::move(else_dist), index);
            return;
        }
        const Conjunction& goal = task_.problem().goal;
        for (const auto& [cfg, p] : dist) {
            if (holds(task_, cfg.state, goal)) {
                Outcome o;
                o.success = true;
                out_.outcomes[o] += p;
            } else {
                fail(cfg, p, index, "goal", violated(task_, cfg.state, goal));
            }
        }
    }

    const Task& task_;
    OracleOptions options_;
    OutcomeDistribution out_;
};

}  // namespace

OutcomeDistribution enumerate_outcomes(const Task& task, const ConditionalPlan& plan, const OracleOptions& options) {
    return Oracle(task, options).run(plan);
}

}  // namespace evplan
