#include <cmath>

#include "doctest.h"
#include "evplan/failure.hpp"
#include "fixture.hpp"

using namespace evplan;

namespace {

// Probability that a two-state chain which flips with p each tick ends away
// from its start after n ticks, by summing over all 2^n flip patterns.
double flip_by_enumeration(double p, int n) {
    double away = 0.0;
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        int flips = 0;
        double w = 1.0;
        for (int k = 0; k < n; ++k) {
            bool f = mask & (1u << k);
            flips += f;
            w *= f ? p : 1.0 - p;
        }
        if (flips % 2 == 1) away += w;
    }
    return away;
}

double survival_by_product(double p, int n) {
    double s = 1.0;
    for (int k = 0; k < n; ++k) s *= 1.0 - p;
    return s;
}

}  // namespace

TEST_CASE("two failure modes on the fixture plan") {
    Task t = fixture::task();
    PlanAnalysis a = analyze_plan(t, fixture::initial_plan(t), 3);
    CHECK(a.success == doctest::Approx(0.4709952).epsilon(1e-12));
    REQUIRE(a.failures.size() == 2);

    const FailureMode& taxi = a.failures[0];
    CHECK(taxi.step_name == "(drive seattle-taxi seattle-po seattle-airport)");
    CHECK(taxi.violated.str() == "(location seattle-taxi seattle-po)");
    CHECK(taxi.probability == doctest::Approx(flip_by_enumeration(0.2, 6)).epsilon(1e-12));
    CHECK(taxi.chain_length == 2);
    CHECK(taxi.first_tick == 0);
    CHECK(taxi.end_tick == 6);
    CHECK(a.net.nodes[taxi.terminal].event->name().str() == "taxi-moves");

    const FailureMode& lost = a.failures[1];
    CHECK(lost.step_name == "(load-taxi package1 seattle-taxi seattle-airport)");
    CHECK(lost.violated.str() == "(location package1 seattle-airport)");
    CHECK(lost.probability == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(lost.chain_length == 1);
    CHECK(lost.chain.size() == 1);
    CHECK(a.net.nodes[lost.terminal].event->name().str() == "lose-package-from-airport");

    CHECK(taxi.describe(a.net).find("taxi-moves") != std::string::npos);
}

TEST_CASE("discovery order is by chain length, ranking by probability") {
    Task t = fixture::task();
    BeliefNet net = build_net(t, fixture::initial_plan(t).steps, 3);
    auto found = find_failures(net, 3);
    REQUIRE(found.size() == 2);
    CHECK(found[0].chain_length <= found[1].chain_length);
    auto ranked = rank_failures(found);
    for (size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].probability >= ranked[i].probability);

    // Equal probabilities fall back to the earlier interval.
    FailureMode late;
    late.probability = 0.5;
    late.first_tick = 4;
    FailureMode early;
    early.probability = 0.5;
    early.first_tick = 1;
    auto tied = rank_failures({late, early});
    CHECK(tied[0].first_tick == 1);
}

TEST_CASE("chain bound hides longer failure chains") {
    Task t = fixture::task();
    BeliefNet net = build_net(t, fixture::initial_plan(t).steps, 1);
    auto found = find_failures(net, 1);
    for (const auto& m : found) CHECK(m.chain_length <= 1);
}

TEST_CASE("a covering branch removes the taxi failure") {
    Task t = fixture::task();
    ConditionalPlan plan = fixture::initial_plan(t);
    Atom at_airport{Symbol("location"), {Symbol("seattle-taxi"), Symbol("seattle-airport")}};
    std::vector<GroundAction> skip(plan.steps.begin() + 7, plan.steps.end());
    ConditionalPlan b = attach_branch(plan, PlanPosition{{}, 6}, {{at_airport, true}}, make_linear(skip));
    PlanAnalysis a = analyze_plan(t, b, 3);
    CHECK(a.success == doctest::Approx(0.9476672).epsilon(1e-12));
    REQUIRE(a.failures.size() == 1);
    CHECK(a.failures[0].step_name == "(load-taxi package1 seattle-taxi seattle-airport)");
}

TEST_CASE("two-state flip closed form matches enumeration") {
    for (double p : {0.0, 0.05, 0.2, 0.5, 0.77, 1.0}) {
        for (int n = 0; n <= 12; ++n) {
            CAPTURE(p);
            CAPTURE(n);
            CHECK(two_state_flip(p, n) == doctest::Approx(flip_by_enumeration(p, n)).epsilon(1e-12));
        }
    }
    CHECK(two_state_flip(0.2, 6) == doctest::Approx(0.476672).epsilon(1e-12));
    CHECK(two_state_flip(0.5, 3) == doctest::Approx(0.5));
}

TEST_CASE("persistence survival") {
    for (double p : {0.0, 0.1, 0.3, 1.0}) {
        for (int n = 0; n <= 12; ++n) CHECK(persistence_survival(p, n) == doctest::Approx(survival_by_product(p, n)));
    }
    CHECK(persistence_survival(0.1, 1) == doctest::Approx(0.9));
    CHECK_THROWS_AS(persistence_survival(1.5, 2), DomainError);
    CHECK_THROWS_AS(persistence_survival(0.5, -1), DomainError);
    CHECK_THROWS_AS(two_state_flip(-0.1, 2), DomainError);
    CHECK_THROWS_AS(two_state_flip(0.1, -2), DomainError);
}
