#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "evplan/inference.hpp"
#include "fixture.hpp"

using namespace evplan;

namespace {

Atom atom(const char* pred, std::initializer_list<const char*> args) {
    Atom a{Symbol(pred), {}};
    for (const char* s : args) a.args.emplace_back(s);
    return a;
}

// Closed forms for the fixture: the seattle taxi flips between two places
// with p = 0.2 on each of the 6 ticks before its drive; the package can be
// lost on the single tick it waits at the airport.
double taxi_displaced() { return (1.0 - std::pow(1.0 - 2.0 * 0.2, 6)) / 2.0; }
double loss() { return 0.1; }

struct Micro {
    std::string domain;
    std::string problem;
};

// Random small domains: a robot moving between places (possibly durative),
// items that spoil and recover, and drift events on the robot.
Micro random_micro(std::mt19937& rng) {
    std::uniform_int_distribution<int> dur(0, 2);
    std::uniform_real_distribution<double> prob(0.05, 0.6);
    int places = std::uniform_int_distribution<int>(2, 3)(rng);
    int items = std::uniform_int_distribution<int>(1, 2)(rng);
    int move_d = dur(rng);
    int work_d = std::uniform_int_distribution<int>(1, 2)(rng);
    std::ostringstream d;
    d << "(domain micro\n"
         "  (:types (place object) (robot object) (item object))\n"
         "  (:predicates (at ?r - robot ?p - place) (fresh ?i - item) (held ?i - item) (link ?a ?b - place))\n"
         "  (:functional at)\n";
    d << "  (:operator move :params (?r - robot ?from ?to - place) :duration " << move_d
      << " :pre (and (link ?from ?to) (at ?r ?from))";
    if (move_d == 0) {
        d << " :del ((at ?r ?from)) :add ((at ?r ?to)))\n";
    } else {
        d << " :final-del ((at ?r ?from)) :final-add ((at ?r ?to)))\n";
    }
    d << "  (:operator work :params (?r - robot ?p - place ?i - item) :duration " << work_d
      << " :pre (and (at ?r ?p) (fresh ?i)) :final-add ((held ?i)))\n";
    d << "  (:event drift :params (?r - robot ?from ?to - place) :duration 0 :probability " << prob(rng)
      << " :pre (and (link ?from ?to) (at ?r ?from)) :del ((at ?r ?from)) :add ((at ?r ?to)))\n";
    d << "  (:event spoil :params (?i - item) :duration 0 :probability " << prob(rng)
      << " :pre (and (fresh ?i)) :del ((fresh ?i)))\n";
    d << "  (:event recover :params (?i - item) :duration 0 :probability " << prob(rng)
      << " :pre (and (not (fresh ?i))) :add ((fresh ?i))))\n";

    std::ostringstream p;
    p << "(problem micro-task (:domain micro) (:objects r1 - robot";
    for (int i = 0; i < places; ++i) p << " p" << i;
    p << " - place";
    for (int i = 0; i < items; ++i) p << " i" << i;
    p << " - item) (:init (at r1 p0)";
    for (int i = 0; i < items; ++i) p << " (fresh i" << i << ")";
    for (int a = 0; a < places; ++a) {
        for (int b = 0; b < places; ++b) {
            if (a != b) p << " (link p" << a << " p" << b << ")";
        }
    }
    p << ") (:goal (held i0)))";
    return {d.str(), p.str()};
}

// Event-free random walk of applicable operators; the goal becomes whatever
// the walk reaches.
std::vector<GroundAction> random_walk(const Task& t, std::mt19937& rng, Conjunction& goal) {
    State s = t.initial_state();
    auto ops = t.ground_operators();
    std::vector<GroundAction> path;
    int len = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int k = 0; k < len; ++k) {
        std::vector<GroundAction> ok;
        for (const auto& g : ops) {
            if (applicable(t, s, g)) ok.push_back(g);
        }
        if (ok.empty()) break;
        GroundAction g = ok[std::uniform_int_distribution<size_t>(0, ok.size() - 1)(rng)];
        s = apply_atomic(t, s, g);
        path.push_back(g);
    }
    goal.clear();
    for (const auto& f : s.facts()) {
        if (f.predicate.str() == "at" || f.predicate.str() == "held") goal.push_back({f, true});
    }
    return path;
}

}  // namespace

TEST_CASE("oracle reproduces the fixture closed forms") {
    Task t = fixture::task();
    auto dist = enumerate_outcomes(t, fixture::initial_plan(t));
    CHECK(dist.total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dist.success() == doctest::Approx((1.0 - taxi_displaced()) * (1.0 - loss())).epsilon(1e-12));
    CHECK(dist.failure_mass("|taxi-moves") == doctest::Approx(taxi_displaced()).epsilon(1e-12));
    CHECK(dist.failure_mass("lose-package-from-airport") ==
          doctest::Approx((1.0 - taxi_displaced()) * loss()).epsilon(1e-12));
    CHECK(dist.outcomes.size() == 3);
}

TEST_CASE("net evaluation agrees with the oracle on the fixture") {
    Task t = fixture::task();
    auto plan = fixture::initial_plan(t);
    BeliefNet net = build_net(t, plan.steps);
    CHECK(evaluate_net(net) == doctest::Approx(enumerate_outcomes(t, plan).success()).epsilon(1e-12));

    size_t drive = net.action_nodes[6];
    size_t load = net.action_nodes[7];
    auto location_test = [&](size_t node, const char* object) {
        const auto& tests = net.nodes[node].tests;
        for (size_t i = 0; i < tests.size(); ++i) {
            if (tests[i].literal.atom.predicate.str() == "location" && tests[i].literal.atom.args[0].str() == object) {
                return i;
            }
        }
        FAIL("no location test");
        return size_t{0};
    };
    CHECK(violation_marginal(net, drive, location_test(drive, "seattle-taxi")) ==
          doctest::Approx(taxi_displaced()).epsilon(1e-12));
    CHECK(violation_marginal(net, load, location_test(load, "package1")) == doctest::Approx(loss()).epsilon(1e-12));
}

TEST_CASE("a branch around the seattle drive") {
    Task t = fixture::task();
    ConditionalPlan plan = fixture::initial_plan(t);
    Conjunction cond{{atom("location", {"seattle-taxi", "seattle-airport"}), true}};
    std::vector<GroundAction> skip(plan.steps.begin() + 7, plan.steps.end());
    ConditionalPlan b = attach_branch(plan, PlanPosition{{}, 6}, cond, make_linear(skip));
    double expected = taxi_displaced() + (1.0 - taxi_displaced()) * (1.0 - loss());
    CHECK(enumerate_outcomes(t, b).success() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.9476672).epsilon(1e-12));
}

TEST_CASE("net and oracle agree on random micro-domains") {
    std::mt19937 rng(2024);
    int compared = 0;
    for (int round = 0; round < 120; ++round) {
        Micro m = random_micro(rng);
        Domain dom = parse_domain(m.domain);
        Problem prob = parse_problem(m.problem);
        Task probe(dom, prob);
        Conjunction goal;
        auto path = random_walk(probe, rng, goal);
        if (path.empty()) continue;
        prob.goal = goal;
        Task t(dom, prob);
        BeliefNet net = build_net(t, path, 12);
        if (!net.fixpoint || net.event_count() > 24) continue;
        double exact = enumerate_outcomes(t, make_linear(path)).success();
        CAPTURE(m.domain);
        CAPTURE(round);
        CHECK(evaluate_net(net) == doctest::Approx(exact).epsilon(1e-9));
        CHECK(net.acyclic());
        ++compared;
    }
    CHECK(compared >= 40);
}

TEST_CASE("interventions and bounds") {
    Task t = fixture::task();
    BeliefNet net = build_net(t, fixture::initial_plan(t).steps);
    InferenceOptions none_fire;
    for (size_t i = 0; i < net.nodes.size(); ++i) {
        if (net.nodes[i].kind == NodeKind::Event) none_fire.interventions[i] = values::falsity();
    }
    CHECK(evaluate_net(net, none_fire) == doctest::Approx(1.0));

    InferenceOptions tight;
    tight.max_event_nodes = 5;
    CHECK_THROWS_AS(evaluate_net(net, tight), NetTooLarge);

    OracleOptions small;
    small.max_leaves = 4;
    CHECK_THROWS_AS(enumerate_outcomes(t, fixture::initial_plan(t), small), TreeTooLarge);
}
