#include <cmath>
#include <sstream>

#include "doctest.h"
#include "evplan/monte_carlo.hpp"
#include "fixture.hpp"

using namespace evplan;

namespace {

GroundAction event(const Task& t, const char* name, std::initializer_list<const char*> args) {
    std::vector<Symbol> as;
    for (const char* s : args) as.emplace_back(s);
    return ground(t, t.domain().find_event(Symbol(name)), as);
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("sampled rates agree with the exact distribution") {
    Task t = fixture::task();
    auto plan = fixture::initial_plan(t);
    auto exact = enumerate_outcomes(t, plan);
    TrialStats s = run_trials(t, plan, 20000, 99);
    CHECK(s.trials == 20000);
    double sigma = s.standard_error(exact.success());
    CHECK(std::abs(s.success_rate() - exact.success()) <= 3 * sigma);
    for (const auto& [o, p] : exact.outcomes) {
        if (o.success) continue;
        CAPTURE(o.key());
        CHECK(std::abs(s.rate(o.key()) - p) <= 3 * s.standard_error(p));
    }
    size_t failed = 0;
    for (const auto& [k, c] : s.failures) failed += c;
    CHECK(failed + s.successes == s.trials);
}

TEST_CASE("results do not depend on the thread count") {
    Task t = fixture::task();
    auto plan = fixture::initial_plan(t);
    TrialStats one = run_trials(t, plan, 3000, 5, 1);
    for (unsigned threads : {2u, 3u, 8u}) {
        TrialStats many = run_trials(t, plan, 3000, 5, threads);
        CHECK(many.successes == one.successes);
        CHECK(many.failures == one.failures);
    }
    TrialStats other = run_trials(t, plan, 3000, 6, 1);
    CHECK(other.failures != one.failures);
}

TEST_CASE("trace of a failed drive") {
    Task t = fixture::task();
    auto plan = fixture::initial_plan(t);
    std::vector<FiredEvent> fired{{0, event(t, "taxi-moves", {"seattle-taxi", "seattle-po", "seattle-airport"})}};
    Trace tr = replay(t, plan, fired);
    CHECK_FALSE(tr.outcome.success);
    CHECK(tr.outcome.key() ==
          "(drive seattle-taxi seattle-po seattle-airport)|(location seattle-taxi seattle-po)|taxi-moves");
    auto ls = lines(tr.text());
    REQUIRE(ls.size() >= 3);
    CHECK(ls.front() == "checking step (load-taxi package1 pgh-taxi pgh-po)");
    CHECK(ls[ls.size() - 3] == "checking step (drive seattle-taxi seattle-po seattle-airport)");
    CHECK(ls[ls.size() - 2] == "  precondition (location seattle-taxi seattle-po) is false");
    CHECK(ls.back() == "  *** step was not applicable");
    CHECK(std::count(ls.begin(), ls.end(), "  ** event taxi-moves takes place at tick 0.") == 1);
    CHECK(std::count(ls.begin(), ls.end(), "    adding (location seattle-taxi seattle-airport)") == 1);
    CHECK(tr.states.size() == 6);
}

TEST_CASE("event-free execution reaches the goal") {
    Task t = fixture::task();
    auto plan = fixture::initial_plan(t);
    Trace tr = replay(t, plan, {});
    CHECK(tr.outcome.success);
    CHECK(tr.events.empty());
    CHECK(tr.states.size() == plan.steps.size());
    auto ls = lines(tr.text());
    CHECK(ls.back() == "goal (location package1 seattle-po) achieved.");
    CHECK(std::count(ls.begin(), ls.end(), "  step begun.") == 4);
    CHECK(std::count(ls.begin(), ls.end(), "  step completed.") == 4);
}

TEST_CASE("sampled traces are well formed and replayable") {
    Task t = fixture::task();
    auto plan = fixture::initial_plan(t);
    for (uint64_t trial = 0; trial < 200; ++trial) {
        Trace tr = simulate_once(t, plan, trial_seed(17, trial));
        bool in_step = false;
        int last_tick = -1;
        for (const auto& r : tr.records) {
            if (r.kind == TraceRecord::Kind::StepBegun) in_step = true;
            if (r.kind == TraceRecord::Kind::StepCompleted) in_step = false;
            if (r.kind == TraceRecord::Kind::EventOccurred) {
                CHECK(in_step);
                CHECK(r.tick >= last_tick);
                CHECK(r.tick < 8);
                last_tick = r.tick;
            }
        }
        Trace again = replay(t, plan, tr.events);
        CHECK(again.text() == tr.text());
        CHECK(again.outcome.key() == tr.outcome.key());
    }
}

TEST_CASE("branch records") {
    Task t = fixture::task();
    ConditionalPlan plan = fixture::initial_plan(t);
    Atom at_airport{Symbol("location"), {Symbol("seattle-taxi"), Symbol("seattle-airport")}};
    std::vector<GroundAction> skip(plan.steps.begin() + 7, plan.steps.end());
    ConditionalPlan b = attach_branch(plan, PlanPosition{{}, 6}, {{at_airport, true}}, make_linear(skip));
    std::vector<FiredEvent> fired{{0, event(t, "taxi-moves", {"seattle-taxi", "seattle-po", "seattle-airport"})}};
    Trace tr = replay(t, b, fired);
    CHECK(tr.outcome.success);
    CHECK(tr.text().find("branch (location seattle-taxi seattle-airport) is true, taking then") != std::string::npos);
    TrialStats s = run_trials(t, b, 20000, 3);
    double exact = enumerate_outcomes(t, b).success();
    CHECK(std::abs(s.success_rate() - exact) <= 3 * s.standard_error(exact));
}

TEST_CASE("convergence series") {
    Task t = fixture::task();
    auto plan = fixture::initial_plan(t);
    ConvergenceSeries c = convergence_series(t, plan, 1050, 100, 8, 2);
    REQUIRE(c.rows.size() == 11);
    CHECK(c.rows.back().trials == 1050);
    CHECK(c.rows[0].trials == 100);
    TrialStats s = run_trials(t, plan, 1050, 8, 1);
    CHECK(c.rows.back().success == doctest::Approx(s.success_rate()));
    for (const auto& row : c.rows) {
        double sum = row.success;
        for (double f : row.failures) sum += f;
        CHECK(sum == doctest::Approx(1.0));
    }
    auto ls = lines(c.csv());
    CHECK(ls.size() == 12);
    CHECK(ls[0].rfind("trials,success,", 0) == 0);
    CHECK(ls[0].find("\"(drive seattle-taxi") == std::string::npos);
    CHECK_THROWS_AS(convergence_series(t, plan, 10, 0, 1), DomainError);
    CHECK_THROWS_AS(run_trials(t, plan, 0, 1), DomainError);
}
