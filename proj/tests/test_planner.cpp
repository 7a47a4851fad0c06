#include "doctest.h"
#include "evplan/planner.hpp"
#include "fixture.hpp"

using namespace evplan;

namespace {

Atom atom(const char* pred, std::initializer_list<const char*> args) {
    Atom a{Symbol(pred), {}};
    for (const char* s : args) a.args.emplace_back(s);
    return a;
}

std::vector<std::string> names(const std::vector<GroundAction>& steps) {
    std::vector<std::string> out;
    for (const auto& s : steps) out.push_back(s.str());
    return out;
}

bool has_step(const std::vector<GroundAction>& steps, const std::string& name) {
    for (const auto& s : steps) {
        if (s.name().str() == name) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("fixture plan reaches the goal and matches the initial plan file") {
    Task t = fixture::task();
    auto p = plan(t);
    CHECK(validate_plan(t, make_linear(p)).ok);
    CHECK(names(p) == names(fixture::initial_plan(t).steps));
}

TEST_CASE("planner is deterministic") {
    Task t = fixture::task();
    CHECK(names(plan(t)) == names(plan(t)));
}

TEST_CASE("returned plans are justified") {
    Task t = fixture::task();
    auto p = plan(t);
    for (size_t i = 0; i < p.size(); ++i) {
        auto shorter = p;
        shorter.erase(shorter.begin() + static_cast<long>(i));
        CHECK_FALSE(validate_plan(t, make_linear(shorter)).ok);
    }
}

TEST_CASE("trivial goals") {
    Task t = fixture::task();
    CHECK(replan(t, t.initial_state(), {{atom("location", {"package1", "pgh-po"}), true}}).empty());
    State s = t.initial_state();
    s.erase(atom("have-money", {"3"}));
    s.insert(atom("have-money", {"1"}));
    auto p = replan(t, s, {{atom("have-key", {"locker1"}), true}});
    REQUIRE(p.size() == 1);
    CHECK(p[0].str() == "(open-locker locker1 1)");
}

TEST_CASE("replanning from a displaced taxi skips the drive") {
    Task t = fixture::task();
    auto full = fixture::initial_plan(t).steps;
    State s = t.initial_state();
    for (size_t i = 0; i < 6; ++i) s = apply_atomic(t, s, full[i]);
    s.erase(atom("location", {"seattle-taxi", "seattle-po"}));
    s.insert(atom("location", {"seattle-taxi", "seattle-airport"}));
    auto p = replan(t, s, t.problem().goal);
    CHECK(names(p) == std::vector<std::string>{"(load-taxi package1 seattle-taxi seattle-airport)",
                                               "(drive seattle-taxi seattle-airport seattle-po)",
                                               "(unload-taxi package1 seattle-taxi seattle-po)"});
}

TEST_CASE("extra preconditions force protection before driving") {
    Task t = fixture::task();
    auto full = fixture::initial_plan(t).steps;
    State s = t.initial_state();
    for (size_t i = 0; i < 6; ++i) s = apply_atomic(t, s, full[i]);
    GroundLiteral guarded{atom("protected", {"package1"}), true};
    ExtraPreconditions extra{{Symbol("(drive seattle-taxi seattle-po seattle-airport)"), {guarded}}};
    auto p = replan(t, s, t.problem().goal, {}, &extra);
    CHECK(has_step(p, "open-locker"));
    CHECK(has_step(p, "store"));
    CHECK(has_step(p, "unstore"));
    CHECK(validate_plan(t, make_linear(p), s, t.problem().goal).ok);
    auto n = names(p);
    REQUIRE(n.size() == 7);
    CHECK(n[0] == "(open-locker locker1 3)");
    CHECK(n[1] == "(store package1 locker1 seattle-airport)");
    CHECK(n[2] == "(drive seattle-taxi seattle-po seattle-airport)");
    CHECK(n[3] == "(unstore locker1 seattle-airport)");
    CHECK(n[4] == "(load-taxi package1 seattle-taxi seattle-airport)");

    // Keyed by operator name the guard also binds the return drive, which
    // cannot be protected once the package is out of the locker.
    ExtraPreconditions every_drive{{Symbol("drive"), {guarded}}};
    CHECK_THROWS_AS(replan(t, s, t.problem().goal, {}, &every_drive), NoPlanFound);
}

TEST_CASE("unreachable goals") {
    Task t = fixture::task();
    State s;
    CHECK_THROWS_AS(replan(t, s, t.problem().goal), NoPlanFound);
    Problem p = t.problem();
    p.goal = {{atom("location", {"package1", "lost"}), true}};
    Task lost(t.domain(), p);
    CHECK_THROWS_AS(plan(lost), Unsolvable);
    PlannerLimits tight;
    tight.max_length = 3;
    CHECK_THROWS_AS(plan(t, tight), NoPlanFound);
}

TEST_CASE("plan enumerator yields distinct plans by length") {
    Task t = fixture::task();
    PlanEnumerator it(t, t.initial_state(), t.problem().goal);
    auto first = it.next();
    REQUIRE(first);
    CHECK(names(*first) == names(plan(t)));
    std::set<std::vector<std::string>> seen{names(*first)};
    size_t last_len = first->size();
    for (int i = 0; i < 30; ++i) {
        auto p = it.next();
        REQUIRE(p);
        CHECK(p->size() >= last_len);
        last_len = p->size();
        CHECK(seen.insert(names(*p)).second);
        CHECK(validate_plan(t, make_linear(*p)).ok);
    }
}

TEST_CASE("validate_plan reports the first violation") {
    Task t = fixture::task();
    auto steps = fixture::initial_plan(t).steps;
    std::swap(steps[1], steps[2]);
    auto check = validate_plan(t, make_linear(steps));
    CHECK_FALSE(check.ok);
    REQUIRE(check.failed_step);
    CHECK(*check.failed_step == 1);
    Problem p = t.problem();
    p.goal = {{atom("location", {"package1", "pgh-po"}), true}};
    CHECK(validate_plan(Task(t.domain(), p), ConditionalPlan{}).ok);
}
