#pragma once

// Sampled plan execution with random event occurrences.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "evplan/inference.hpp"
#include "evplan/plan.hpp"

namespace evplan {

struct TraceRecord {
    enum class Kind {
        StepChecked,
        EffectApplied,
        StepBegun,
        EventOccurred,
        StepCompleted,
        StepNotApplicable,
        BranchTaken,
        GoalResult
    };
    Kind kind = Kind::StepChecked;
    std::string subject;  // step, fact, event name, or condition
    bool adding = false;     // EffectApplied
    bool nested = false;     // EffectApplied by an event
    int tick = 0;            // EventOccurred
    bool truth = false;      // BranchTaken, GoalResult
    Conjunction failed;      // StepNotApplicable, failed GoalResult
};

struct FiredEvent {
    int tick = 0;
    GroundAction event;
};

struct Trace {
    std::vector<TraceRecord> records;
    std::vector<FiredEvent> events;
    /// State after each executed step.
    std::vector<State> states;
    Outcome outcome;

    std::string text() const;
};

/// Per-trial seed derived from the master seed and the trial index.
uint64_t trial_seed(uint64_t master_seed, uint64_t trial);

/// One execution; each enabled event fires independently per tick.
Trace simulate_once(const Task& task, const ConditionalPlan& plan, uint64_t seed);
/// Deterministic execution in which exactly the listed events fire.
Trace replay(const Task& task, const ConditionalPlan& plan, const std::vector<FiredEvent>& fired);

struct TrialStats {
    size_t trials = 0;
    size_t successes = 0;
    /// Failure counts keyed by Outcome::key().
    std::map<std::string, size_t> failures;

    double success_rate() const;
    double rate(const std::string& failure_key) const;
    /// Summed rate of failures whose key contains `needle`.
    double failure_rate(const std::string& needle) const;
    /// sqrt(r (1 - r) / N); 0 when N < 2.
    double standard_error(double rate) const;
};

/// `threads` = 0 uses the hardware concurrency. Results do not depend on it.
TrialStats run_trials(const Task& task, const ConditionalPlan& plan, size_t trials, uint64_t master_seed,
                      unsigned threads = 0);

struct ConvergenceRow {
    size_t trials = 0;
    double success = 0.0;
    std::vector<double> failures;  // aligned with ConvergenceSeries::failure_keys
};

struct ConvergenceSeries {
    std::vector<std::string> failure_keys;
    std::vector<ConvergenceRow> rows;

    /// Header "trials,success,<failure keys>" then one line per row.
    std::string csv() const;
};

/// Cumulative estimates after every `stride` trials (and after the last).
ConvergenceSeries convergence_series(const Task& task, const ConditionalPlan& plan, size_t trials, size_t stride,
                                     uint64_t master_seed, unsigned threads = 0);

}  // namespace evplan
