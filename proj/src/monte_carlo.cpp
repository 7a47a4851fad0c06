#include "evplan/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace evplan {

std::string Trace::text() const {
    std::ostringstream os;
    for (const auto& r : records) {
        switch (r.kind) {
            case TraceRecord::Kind::StepChecked: os << "checking step " << r.subject << "\n"; break;
            case TraceRecord::Kind::EffectApplied:
                os << (r.nested ? "    " : "  ") << (r.adding ? "adding " : "deleting ") << r.subject << "\n";
                break;
            case TraceRecord::Kind::StepBegun: os << "  step begun.\n"; break;
            case TraceRecord::Kind::EventOccurred:
                os << "  ** event " << r.subject << " takes place at tick " << r.tick << ".\n";
                break;
            case TraceRecord::Kind::StepCompleted: os << "  step completed.\n"; break;
            case TraceRecord::Kind::StepNotApplicable:
                for (const auto& l : r.failed) os << "  precondition " << l.str() << " is false\n";
                os << "  *** step was not applicable\n";
                break;
            case TraceRecord::Kind::BranchTaken:
                os << "branch " << r.subject << " is " << (r.truth ? "true, taking then" : "false, taking else") << "\n";
                break;
            case TraceRecord::Kind::GoalResult:
                if (r.truth) {
                    os << "goal " << r.subject << " achieved.\n";
                } else {
                    for (const auto& l : r.failed) os << "  goal condition " << l.str() << " is false\n";
                    os << "*** goal not achieved\n";
                }
                break;
        }
    }
    return os.str();
}

uint64_t trial_seed(uint64_t master_seed, uint64_t trial) {
    std::seed_seq seq{static_cast<uint32_t>(master_seed), static_cast<uint32_t>(master_seed >> 32),
                      static_cast<uint32_t>(trial), static_cast<uint32_t>(trial >> 32)};
    std::mt19937_64 gen(seq);
    return gen();
}

namespace {

using Decide = std::function<bool(int tick, const GroundAction& event)>;

class Simulator {
public:
    Simulator(const Task& task, Decide decide) : task_(task), decide_(std::move(decide)) {}

    Trace run(const ConditionalPlan& plan) {
        state_ = task_.initial_state();
        const ConditionalPlan* node = &plan;
        size_t index = 0;
        while (true) {
            for (const auto& step : node->steps) {
                if (!execute(step, index)) return std::move(trace_);
                ++index;
            }
            if (!node->branch) break;
            bool taken = holds(task_, state_, node->branch->condition);
            TraceRecord r;
            r.kind = TraceRecord::Kind::BranchTaken;
            r.subject = conjunction_str(node->branch->condition);
            r.truth = taken;
            trace_.records.push_back(std::move(r));
            node = taken ? &node->branch->then_plan : &node->branch->else_plan;
        }
        const Conjunction& goal = task_.problem().goal;
        TraceRecord r;
        r.kind = TraceRecord::Kind::GoalResult;
        r.subject = conjunction_str(goal);
        r.truth = holds(task_, state_, goal);
        if (r.truth) {
            trace_.outcome.success = true;
        } else {
            r.failed = violated(task_, state_, goal);
            fail(index, "goal", r.failed);
        }
        trace_.records.push_back(std::move(r));
        return std::move(trace_);
    }

private:
    void fail(size_t index, const std::string& name, const Conjunction& bad) {
        Outcome& o = trace_.outcome;
        o.success = false;
        o.step = index;
        o.step_name = name;
        o.violated = bad;
        for (const auto& l : bad) {
            auto it = cause_.find(task_.var_of(l.atom));
            o.causes.push_back(it == cause_.end() ? "none" : it->second.str());
        }
    }

    void apply(const EffectSet& fx, bool nested) {
        for (const auto& d : fx.dels) record_effect(d, false, nested);
        for (const auto& a : fx.adds) record_effect(a, true, nested);
        apply_effects(task_, state_, fx);
    }

    void record_effect(const Atom& a, bool adding, bool nested) {
        TraceRecord r;
        r.kind = TraceRecord::Kind::EffectApplied;
        r.subject = a.str();
        r.adding = adding;
        r.nested = nested;
        trace_.records.push_back(std::move(r));
    }

    void forget_causes(const EffectSet& fx) {
        for (const auto* list : {&fx.adds, &fx.dels}) {
            for (const auto& a : *list) cause_.erase(task_.var_of(a));
        }
    }

    bool execute(const GroundAction& step, size_t index) {
        TraceRecord check;
        check.kind = TraceRecord::Kind::StepChecked;
        check.subject = step.str();
        trace_.records.push_back(std::move(check));
        if (!applicable(task_, state_, step)) {
            TraceRecord r;
            r.kind = TraceRecord::Kind::StepNotApplicable;
            r.subject = step.str();
            r.failed = violated(task_, state_, preconditions(step));
            fail(index, step.str(), r.failed);
            trace_.records.push_back(std::move(r));
            return false;
        }
        EffectSet initial = expand_effects(task_, state_, step, EffectPhase::Initial);
        apply(initial, false);
        forget_causes(initial);
        if (step.duration() > 0) {
            trace_.records.push_back({TraceRecord::Kind::StepBegun, {}, false, false, 0, false, {}});
            for (int k = 0; k < step.duration(); ++k, ++tick_) run_tick();
            EffectSet final_fx = expand_effects(task_, state_, step, EffectPhase::Final);
            apply(final_fx, false);
            forget_causes(final_fx);
            trace_.records.push_back({TraceRecord::Kind::StepCompleted, {}, false, false, 0, false, {}});
        }
        trace_.states.push_back(state_);
        return true;
    }

    void run_tick() {
        auto enabled = enabled_events(task_, state_);
        std::vector<EffectSet> effects;
        std::vector<size_t> fired;
        for (size_t i = 0; i < enabled.size(); ++i) {
            if (decide_(tick_, enabled[i])) fired.push_back(i);
        }
        for (size_t i : fired) effects.push_back(expand_effects(task_, state_, enabled[i], EffectPhase::Plain));
        for (size_t k = 0; k < fired.size(); ++k) {
            const GroundAction& e = enabled[fired[k]];
            TraceRecord r;
            r.kind = TraceRecord::Kind::EventOccurred;
            r.subject = e.name().str();
            r.tick = tick_;
            trace_.records.push_back(std::move(r));
            trace_.events.push_back({tick_, e});
            apply(effects[k], true);
            for (const auto* list : {&effects[k].adds, &effects[k].dels}) {
                for (const auto& a : *list) cause_[task_.var_of(a)] = e.name();
            }
        }
    }

    const Task& task_;
    Decide decide_;
    State state_;
    std::map<VarKey, Symbol> cause_;
    int tick_ = 0;
    Trace trace_;
};

}  // namespace

Trace simulate_once(const Task& task, const ConditionalPlan& plan, uint64_t seed) {
    std::mt19937_64 gen(seed);
    auto decide = [&gen](int, const GroundAction& e) {
        double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        return u < e.probability();
    };
    return Simulator(task, decide).run(plan);
}

Trace replay(const Task& task, const ConditionalPlan& plan, const std::vector<FiredEvent>& fired) {
    auto decide = [&fired](int tick, const GroundAction& e) {
        return std::any_of(fired.begin(), fired.end(),
                           [&](const FiredEvent& f) { return f.tick == tick && f.event == e; });
    };
    return Simulator(task, decide).run(plan);
}

double TrialStats::success_rate() const { return trials ? static_cast<double>(successes) / trials : 0.0; }

double TrialStats::rate(const std::string& failure_key) const {
    auto it = failures.find(failure_key);
    return it == failures.end() || trials == 0 ? 0.0 : static_cast<double>(it->second) / trials;
}

double TrialStats::failure_rate(const std::string& needle) const {
    size_t n = 0;
    for (const auto& [k, c] : failures) {
        if (k.find(needle) != std::string::npos) n += c;
    }
    return trials ? static_cast<double>(n) / trials : 0.0;
}

double TrialStats::standard_error(double rate) const {
    if (trials < 2) return 0.0;
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
}

namespace {

/// Outcome key of every trial, computed in parallel chunks.
std::vector<std::string> trial_keys(const Task& task, const ConditionalPlan& plan, size_t trials,
                                    uint64_t master_seed, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<size_t>(threads, std::max<size_t>(1, trials)));
    std::vector<std::string> keys(trials);
    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            keys[i] = simulate_once(task, plan, trial_seed(master_seed, i)).outcome.key();
        }
    };
    if (threads == 1) {
        work(0, trials);
        return keys;
    }
    std::vector<std::thread> pool;
    size_t chunk = (trials + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        size_t begin = t * chunk;
        size_t end = std::min(trials, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
    return keys;
}

}  // namespace

TrialStats run_trials(const Task& task, const ConditionalPlan& plan, size_t trials, uint64_t master_seed,
                      unsigned threads) {
    if (trials == 0) throw DomainError("at least one trial is required");
    TrialStats stats;
    stats.trials = trials;
    for (const auto& k : trial_keys(task, plan, trials, master_seed, threads)) {
        if (k == "success") {
            ++stats.successes;
        } else {
            ++stats.failures[k];
        }
    }
    return stats;
}

std::string ConvergenceSeries::csv() const {
    std::ostringstream os;
    auto field = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    };
    os << "trials,success";
    for (const auto& k : failure_keys) os << "," << field(k);
    os << "\n";
    os.precision(10);
    for (const auto& r : rows) {
        os << r.trials << "," << r.success;
        for (double f : r.failures) os << "," << f;
        os << "\n";
    }
    return os.str();
}

ConvergenceSeries convergence_series(const Task& task, const ConditionalPlan& plan, size_t trials, size_t stride,
                                     uint64_t master_seed, unsigned threads) {
    if (stride == 0) throw DomainError("stride must be at least 1");
    if (trials == 0) throw DomainError("at least one trial is required");
    auto keys = trial_keys(task, plan, trials, master_seed, threads);
    ConvergenceSeries out;
    std::map<std::string, size_t> column;
    for (const auto& k : keys) {
        if (k != "success") column.emplace(k, 0);
    }
    for (auto& [k, c] : column) {
        c = out.failure_keys.size();
        out.failure_keys.push_back(k);
    }
    size_t successes = 0;
    std::vector<size_t> counts(out.failure_keys.size(), 0);
    for (size_t i = 0; i < trials; ++i) {
        if (keys[i] == "success") {
            ++successes;
        } else {
            ++counts[column[keys[i]]];
        }
        size_t n = i + 1;
        if (n % stride == 0 || n == trials) {
            ConvergenceRow row;
            row.trials = n;
            row.success = static_cast<double>(successes) / n;
            for (size_t c : counts) row.failures.push_back(static_cast<double>(c) / n);
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

}  // namespace evplan
