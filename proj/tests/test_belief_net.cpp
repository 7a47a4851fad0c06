#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "evplan/inference.hpp"
#include "fixture.hpp"

using namespace evplan;

namespace {

BeliefNet fixture_net(const Task& t, int max_chain = 3) {
    return build_net(t, fixture::initial_plan(t).steps, max_chain);
}

size_t count_kind(const BeliefNet& net, NodeKind k) {
    return static_cast<size_t>(
        std::count_if(net.nodes.begin(), net.nodes.end(), [k](const NetNode& n) { return n.kind == k; }));
}

const char* kLockerProblem = R"(
(problem key-only
  (:domain logistics)
  (:objects package1 - package locker1 - locker seattle-airport - airport)
  (:init (location locker1 seattle-airport) (location package1 seattle-airport) (have-money 3))
  (:goal (have-key locker1)))
)";

Task locker_task() {
    return Task(parse_domain(read_file(fixture::path("logistics.evd"))), parse_problem(kLockerProblem));
}

}  // namespace

TEST_CASE("stage 1 skeleton of the fixture plan") {
    Task t = fixture::task();
    auto steps = fixture::initial_plan(t).steps;
    BeliefNet net = build_stage1(t, steps);
    CHECK(net.nodes.size() == 34);
    CHECK(net.event_count() == 0);
    CHECK(net.action_nodes.size() == steps.size());
    CHECK(net.acyclic());
    CHECK(evaluate_net(net) == doctest::Approx(1.0));
    for (size_t i = 0; i < steps.size(); ++i) {
        const NetNode& a = net.nodes[net.action_nodes[i]];
        CHECK(a.kind == NodeKind::Action);
        CHECK(a.step_index == i);
        CHECK(a.coord.time == net.schedule.steps[i].time);
        CHECK(a.coord.stage == net.schedule.steps[i].stage);
        CHECK(a.static_ok);
    }
}

TEST_CASE("stage 1 nodes are deterministic for every parent assignment") {
    Task t = fixture::task();
    BeliefNet net = build_stage1(t, fixture::initial_plan(t).steps);
    std::vector<Symbol> pool{values::truth(), values::falsity(), values::none(), values::failed()};
    for (const auto& o : t.problem().objects) pool.push_back(o.first);
    std::mt19937 rng(11);
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    for (const auto& node : net.nodes) {
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<Symbol> parents;
            for (size_t k = 0; k < node.parents.size(); ++k) parents.push_back(pool[pick(rng)]);
            auto dist = node_distribution(node, parents);
            REQUIRE(dist.size() == 1);
            CHECK(dist.front().second == 1.0);
        }
    }
}

TEST_CASE("stage 2 attaches taxi moves and package loss") {
    Task t = fixture::task();
    BeliefNet stage1 = build_stage1(t, fixture::initial_plan(t).steps);
    BeliefNet net = build_stage2(t, stage1, 3);
    CHECK(net.nodes.size() == 56);
    CHECK(net.event_count() == 12);
    CHECK(net.rounds == 2);
    CHECK(net.fixpoint);
    CHECK(net.acyclic());

    std::multiset<std::pair<std::string, int>> got;
    for (const auto& e : net.attached) got.insert({e.event.str() + "@" + std::to_string(e.round), e.tick});
    for (int k = 0; k <= 5; ++k) {
        CHECK(got.count({"(taxi-moves seattle-taxi seattle-po seattle-airport)@1", k}) == 1);
    }
    for (int k = 1; k <= 5; ++k) {
        CHECK(got.count({"(taxi-moves seattle-taxi seattle-airport seattle-po)@2", k}) == 1);
    }
    CHECK(got.count({"(lose-package-from-airport package1 seattle-airport)@1", 6}) == 1);

    // Stage 2 keeps every Stage 1 node unchanged.
    REQUIRE(net.nodes.size() >= stage1.nodes.size());
    for (const auto& n : stage1.nodes) {
        auto same = [&](const NetNode& m) {
            return m.kind == n.kind && m.coord == n.coord && m.label() == n.label();
        };
        CHECK(std::any_of(net.nodes.begin(), net.nodes.end(), same));
    }

    double p = 0.0;
    for (size_t i = 0; i < net.nodes.size(); ++i) {
        if (net.nodes[i].kind == NodeKind::Event && net.nodes[i].event->name().str() == "lose-package-from-airport") {
            p = event_marginal(net, i);
        }
    }
    CHECK(p == doctest::Approx(0.1));
}

TEST_CASE("stage 2 at its fixpoint is unchanged by another pass") {
    Task t = fixture::task();
    BeliefNet net = fixture_net(t, 5);
    REQUIRE(net.fixpoint);
    BeliefNet again = build_stage2(t, net, 5);
    CHECK(again.nodes.size() == net.nodes.size());
    CHECK(again.event_count() == net.event_count());
    CHECK(evaluate_net(again) == doctest::Approx(evaluate_net(net)).epsilon(1e-12));
}

TEST_CASE("chain bound limits the rounds") {
    Task t = fixture::task();
    BeliefNet one = fixture_net(t, 1);
    CHECK(one.rounds == 1);
    CHECK_FALSE(one.fixpoint);
    CHECK(one.event_count() == 7);
    CHECK(one.acyclic());
}

TEST_CASE("persistence links expose the seattle taxi") {
    Task t = fixture::task();
    BeliefNet net = build_stage1(t, fixture::initial_plan(t).steps);
    bool found = false;
    for (const auto& link : persistence_links(net)) {
        const NetNode& to = net.nodes[link.to];
        if (to.var.key.size() == 1 && to.var.key[0].str() == "seattle-taxi" &&
            net.nodes[link.from].role == FeatureRole::Initial) {
            found = true;
            CHECK(link.first_tick == 0);
            CHECK(link.end_tick == 6);
            CHECK(link.ticks() == 6);
        }
    }
    CHECK(found);
}

TEST_CASE("dot export") {
    Task t = fixture::task();
    BeliefNet net = fixture_net(t);
    std::string dot = export_dot(net);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(dot.find("style=dashed") != std::string::npos);
    CHECK(dot.find("style=filled") != std::string::npos);
    size_t edges = 0;
    for (size_t pos = dot.find("->"); pos != std::string::npos; pos = dot.find("->", pos + 2)) ++edges;
    size_t parents = 0;
    for (const auto& n : net.nodes) parents += std::set<size_t>(n.parents.begin(), n.parents.end()).size();
    CHECK(edges == parents);
}

TEST_CASE("one-step open-locker net") {
    Task t = locker_task();
    std::vector<Symbol> args{Symbol("locker1"), Symbol("3")};
    std::vector<GroundAction> path{ground(t, t.domain().find_operator(Symbol("open-locker")), args)};
    BeliefNet net = build_net(t, path);
    CHECK(count_kind(net, NodeKind::Feature) == 3);
    CHECK(count_kind(net, NodeKind::Action) == 1);
    CHECK(count_kind(net, NodeKind::Goal) == 1);
    CHECK(net.event_count() == 0);
    CHECK(evaluate_net(net) == doctest::Approx(1.0));

    // Pinning the money to a different amount makes the step, and the goal, fail.
    const NetNode& action = net.nodes[net.action_nodes[0]];
    REQUIRE(action.tests.size() == 1);
    InferenceOptions pinned;
    pinned.interventions[action.tests[0].node] = Symbol("2");
    CHECK(evaluate_net(net, pinned) == doctest::Approx(0.0));
}

TEST_CASE("inapplicable paths are rejected") {
    Task t = fixture::task();
    auto steps = fixture::initial_plan(t).steps;
    std::swap(steps[0], steps[1]);
    CHECK_THROWS_AS(build_stage1(t, steps), InvalidPlan);
}
