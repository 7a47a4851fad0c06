#include "evplan/repair.hpp"

#include <algorithm>
#include <sstream>

namespace evplan {

namespace {

State state_before(const Task& task, std::span<const GroundAction> path, size_t index) {
    State s = task.initial_state();
    for (size_t i = 0; i < index && i < path.size(); ++i) s = apply_atomic(task, s, path[i]);
    return s;
}

/// Chain events to consider, terminal first, then the rest latest first.
std::vector<GroundAction> chain_events(const BeliefNet& net, const FailureMode& failure) {
    std::vector<GroundAction> out{*net.nodes.at(failure.terminal).event};
    for (auto it = failure.chain.rbegin(); it != failure.chain.rend(); ++it) {
        const GroundAction& e = *net.nodes[*it].event;
        if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
    }
    return out;
}

}  // namespace

AlternateState predict_alternate(const Task& task, const PlanAnalysis& analysis, const FailureMode& failure) {
    State nominal = state_before(task, analysis.path.steps, failure.step_index);
    VarKey var = task.var_of(failure.violated.atom);
    for (const auto& e : chain_events(analysis.net, failure)) {
        EffectSet fx = expand_effects(task, nominal, e, EffectPhase::Plain);
        State s = nominal;
        apply_effects(task, s, fx);
        if (holds(task, s, failure.violated)) continue;
        AlternateState alt{std::move(s), {}, e};
        for (const auto& a : fx.adds) {
            if (task.var_of(a) == var) alt.condition.push_back({a, true});
        }
        if (alt.condition.empty()) alt.condition.push_back(failure.violated.negated());
        return alt;
    }
    throw RepairFailed("no event in the chain contradicts " + failure.violated.str());
}

ConditionalPlan repair_branch(const Task& task, const ConditionalPlan& plan, const PlanAnalysis& analysis,
                              const FailureMode& failure, const PlannerLimits& limits) {
    AlternateState alt = predict_alternate(task, analysis, failure);
    std::vector<GroundAction> sub;
    try {
        sub = replan(task, alt.state, task.problem().goal, limits);
    } catch (const NoPlanFound& e) {
        throw RepairFailed("no plan from the state after " + alt.event.str() + ": " + e.what());
    }
    PlanPosition pos = position_on_path(analysis.path, failure.step_index);
    return attach_branch(plan, pos, alt.condition, make_linear(std::move(sub)));
}

Conjunction protection_candidates(const Task& task, const GroundAction& event, const FailureMode& failure) {
    Conjunction out;
    for (const auto& lit : preconditions(event)) {
        if (task.domain().is_static(lit.atom.predicate)) continue;
        if (lit == failure.violated) continue;
        out.push_back(lit.negated());
    }
    return out;
}

ConditionalPlan repair_protect(const Task& task, const ConditionalPlan& plan, const PlanAnalysis& analysis,
                               const FailureMode& failure, const GroundLiteral& negated,
                               const PlannerLimits& limits) {
    const auto& path = analysis.path.steps;
    Schedule sched = schedule(path);
    int first = failure.first_tick;
    int end = std::max(failure.end_tick, first + 1);
    std::optional<size_t> spanning;
    for (size_t i = 0; i < path.size() && i <= failure.step_index; ++i) {
        const ScheduledStep& s = sched.steps[i];
        if (path[i].duration() > 0 && s.time < end && s.end_time > first) {
            spanning = i;
            break;
        }
    }
    if (!spanning) throw RepairFailed("no durative step spans ticks " + std::to_string(first) + ".." + std::to_string(end - 1));
    State start = state_before(task, path, *spanning);
    ExtraPreconditions extra{{Symbol(path[*spanning].str()), {negated}}};
    std::vector<GroundAction> sub;
    try {
        sub = replan(task, start, task.problem().goal, limits, &extra);
    } catch (const NoPlanFound& e) {
        throw RepairFailed("cannot keep " + negated.str() + " during " + path[*spanning].str() + ": " + e.what());
    }
    PlanPosition pos = position_on_path(analysis.path, *spanning);
    return replace_suffix(plan, pos, make_linear(std::move(sub)));
}

int exposure(const Task& task, std::span<const GroundAction> path, const GroundLiteral& threatened) {
    Schedule sched = schedule(path);
    VarKey var = task.var_of(threatened.atom);
    auto reads = [&](const Conjunction& c) {
        return std::any_of(c.begin(), c.end(), [&](const GroundLiteral& l) { return task.var_of(l.atom) == var; });
    };
    int since = 0;
    int total = 0;
    State s = task.initial_state();
    for (size_t i = 0; i < path.size(); ++i) {
        if (reads(preconditions(path[i]))) total += sched.steps[i].time - since;
        EffectSet initial = expand_effects(task, s, path[i], EffectPhase::Initial);
        if (var_ops(task, initial).count(var)) since = sched.steps[i].time;
        apply_effects(task, s, initial);
        EffectSet final_fx = expand_effects(task, s, path[i], EffectPhase::Final);
        if (var_ops(task, final_fx).count(var)) since = sched.steps[i].end_time;
        apply_effects(task, s, final_fx);
    }
    if (reads(task.problem().goal)) total += sched.final_time - since;
    return total;
}

namespace {

class Rescheduler {
public:
    Rescheduler(const Task& task, std::span<const GroundAction> path, const FailureMode& failure, size_t max_nodes)
        : task_(task), path_(path.begin(), path.end()), failure_(failure), max_nodes_(max_nodes) {}

    std::vector<GroundAction> run() {
        best_ = path_;
        best_exposure_ = exposure(task_, path_, failure_.violated);
        used_.assign(path_.size(), false);
        search(task_.initial_state());
        return best_;
    }

private:
    void search(const State& s) {
        if (++nodes_ > max_nodes_) return;
        if (current_.size() == path_.size()) {
            if (!holds(task_, s, task_.problem().goal)) return;
            int e = exposure(task_, current_, failure_.violated);
            if (e < best_exposure_) {
                best_exposure_ = e;
                best_ = current_;
            }
            return;
        }
        for (size_t i = 0; i < path_.size(); ++i) {
            if (used_[i]) continue;
            // Equal steps are interchangeable: only try the first unused one.
            bool dup = false;
            for (size_t j = 0; j < i && !dup; ++j) dup = !used_[j] && path_[j] == path_[i];
            if (dup || !applicable(task_, s, path_[i])) continue;
            used_[i] = true;
            current_.push_back(path_[i]);
            search(apply_atomic(task_, s, path_[i]));
            current_.pop_back();
            used_[i] = false;
        }
    }

    const Task& task_;
    std::vector<GroundAction> path_;
    const FailureMode& failure_;
    size_t max_nodes_;
    std::vector<bool> used_;
    std::vector<GroundAction> current_;
    std::vector<GroundAction> best_;
    int best_exposure_ = 0;
    size_t nodes_ = 0;
};

}  // namespace

std::vector<GroundAction> repair_reschedule(const Task& task, std::span<const GroundAction> path,
                                            const FailureMode& failure, size_t max_nodes) {
    return Rescheduler(task, path, failure, max_nodes).run();
}

std::string to_string(RepairMethod m) {
    switch (m) {
        case RepairMethod::Branch: return "branch";
        case RepairMethod::Protect: return "protect";
        case RepairMethod::Reschedule: return "reschedule";
    }
    return "?";
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::ThresholdMet: return "threshold-met";
        case Termination::BudgetExhausted: return "budget-exhausted";
        case Termination::NoRepairImproves: return "no-repair-improves";
    }
    return "?";
}

std::string RepairReport::str() const {
    std::ostringstream os;
    os.precision(10);
    for (const auto& a : log) {
        os << "iteration " << a.iteration << ": " << to_string(a.method) << (a.accepted ? " accepted" : " rejected")
           << " (" << a.before << " -> " << a.after << ")";
        if (!a.detail.empty()) os << " " << a.detail;
        os << "\n  failure: " << a.failure << "\n";
    }
    os << "initial plans tried: " << initial_plans << "\n";
    os << "success probability: " << probability << "\n";
    os << "termination: " << to_string(termination) << "\n";
    return os.str();
}

namespace {

struct Candidate {
    RepairMethod method;
    std::string detail;
    std::function<ConditionalPlan()> build;
};

std::vector<Candidate> candidates(const Task& task, const ConditionalPlan& plan, const PlanAnalysis& analysis,
                                  const FailureMode& failure, const SolveOptions& options) {
    std::vector<Candidate> out;
    for (RepairMethod m : options.methods) {
        switch (m) {
            case RepairMethod::Branch:
                out.push_back({m, "", [&, failure] { return repair_branch(task, plan, analysis, failure, options.limits); }});
                break;
            case RepairMethod::Protect:
                for (const auto& e : chain_events(analysis.net, failure)) {
                    for (const auto& lit : protection_candidates(task, e, failure)) {
                        out.push_back({m, "keeping " + lit.str() + " against " + e.str(), [&, failure, lit] {
                                           return repair_protect(task, plan, analysis, failure, lit, options.limits);
                                       }});
                    }
                }
                break;
            case RepairMethod::Reschedule:
                if (!plan.branch) {
                    out.push_back({m, "", [&, failure] {
                                       auto moved = repair_reschedule(task, plan.steps, failure);
                                       if (moved == plan.steps) throw RepairFailed("no reordering shortens the exposure");
                                       return make_linear(std::move(moved));
                                   }});
                }
                break;
        }
    }
    return out;
}

}  // namespace

RepairReport solve(const Task& task, const SolveOptions& options) {
    if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) throw DomainError("threshold must lie in [0, 1]");
    const State start = task.initial_state();
    const Conjunction& goal = task.problem().goal;
    auto first = plan(task, options.limits);
    PlanEnumerator alternatives(task, start, goal, options.limits);
    alternatives.next();  // same as `first`

    RepairReport report;
    double best = -1.0;
    int attempts = 0;
    int iteration = 0;
    std::optional<std::vector<GroundAction>> initial = std::move(first);
    auto finish = [&](const ConditionalPlan& p, double prob, Termination t) {
        if (t != Termination::ThresholdMet && prob <= best) return;
        report.plan = p;
        report.probability = prob;
        best = prob;
        report.termination = t;
    };

    while (initial && report.initial_plans < options.max_initial_plans) {
        ++report.initial_plans;
        ConditionalPlan current = make_linear(std::move(*initial));
        double p = enumerate_outcomes(task, current).success();
        while (true) {
            if (p >= options.threshold) {
                finish(current, p, Termination::ThresholdMet);
                return report;
            }
            PlanAnalysis analysis = analyze_plan(task, current, options.max_chain);
            bool improved = false;
            ++iteration;
            for (const auto& failure : analysis.failures) {
                for (auto& c : candidates(task, current, analysis, failure, options)) {
                    if (attempts >= options.budget) {
                        finish(current, p, Termination::BudgetExhausted);
                        report.termination = Termination::BudgetExhausted;
                        return report;
                    }
                    ++attempts;
                    RepairAttempt a{iteration, failure.describe(analysis.net), c.method, c.detail, false, p, p};
                    try {
                        ConditionalPlan candidate = c.build();
                        PlanCheck check = validate_plan(task, candidate);
                        if (!check.ok) throw RepairFailed("repaired plan does not execute: " + check.violation);
                        a.after = enumerate_outcomes(task, candidate).success();
                        if (a.after > p) {
                            a.accepted = true;
                            current = std::move(candidate);
                            p = a.after;
                        } else if (a.detail.empty()) {
                            a.detail = "no improvement";
                        }
                    } catch (const RepairFailed& e) {
                        a.detail += (a.detail.empty() ? "" : "; ") + std::string(e.what());
                    }
                    report.log.push_back(std::move(a));
                    if (report.log.back().accepted) {
                        improved = true;
                        break;
                    }
                }
                if (improved) break;
            }
            if (!improved) break;
        }
        finish(current, p, Termination::NoRepairImproves);
        initial = alternatives.next();
    }
    report.termination = Termination::NoRepairImproves;
    return report;
}

}  // namespace evplan
