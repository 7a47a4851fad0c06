#include <regex>

#include "doctest.h"
#include "evplan/parser.hpp"
#include "evplan/sexpr.hpp"
#include "fixture.hpp"

using namespace evplan;

namespace {

std::string domain_text() { return read_file(fixture::path("logistics.evd")); }
std::string problem_text() { return read_file(fixture::path("logistics.evp")); }

std::string replace(std::string s, const std::string& from, const std::string& to) {
    auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("s-expression reader") {
    auto es = read_sexprs("(a (B c) ; note\n d)");
    REQUIRE(es.size() == 1);
    CHECK(es[0].items.size() == 3);
    CHECK(es[0].items[1].items[0].atom == "b");
    CHECK(es[0].items[2].loc.line == 2);
    CHECK_THROWS_AS(read_sexprs("(a (b)"), SyntaxError);
    CHECK_THROWS_AS(read_sexprs("a)"), SyntaxError);
}

TEST_CASE("fixture domain parses with nine operators and three events") {
    Domain d = parse_domain(domain_text());
    CHECK(d.operators.size() == 9);
    CHECK(d.events.size() == 3);
    auto drive = d.find_operator(Symbol("drive"));
    REQUIRE(drive);
    CHECK(drive->duration == 1);
    REQUIRE(drive->initial.adds.size() == 1);
    CHECK(drive->initial.adds[0].atom.str() == "(location ?taxi on-the-road)");
    CHECK(d.find_event(Symbol("taxi-moves"))->probability == doctest::Approx(0.2));
    CHECK(d.is_functional(Symbol("location")));
    CHECK(d.is_static(Symbol("same-city")));
    CHECK_FALSE(d.is_static(Symbol("location")));
}

TEST_CASE("semantic errors carry locations") {
    auto text = replace(domain_text(), ":probability 0.1", ":probability 1.7");
    try {
        parse_domain(text);
        FAIL("expected SemanticError");
    } catch (const SemanticError& e) {
        CHECK(std::string(e.what()).find("probability") != std::string::npos);
        CHECK(e.where().line > 1);
    }
    CHECK_THROWS_AS(parse_domain(replace(domain_text(), ":duration 5", ":duration -5")), SemanticError);
    CHECK_THROWS_AS(parse_domain(replace(domain_text(), "    :probability 0.2\n", "    :probability 0.2\n    :duration 2\n")),
                    SemanticError);
    CHECK_THROWS_AS(parse_domain(replace(domain_text(), "(have-key ?locker))\n    :del", "(have-kee ?locker))\n    :del")),
                    SemanticError);
    CHECK_THROWS_AS(parse_domain(replace(domain_text(), "(taxi vehicle)", "(taxi vehicel)")), SemanticError);
    CHECK_THROWS_AS(parse_domain(replace(domain_text(), "(location object)", "(location taxi)")), SemanticError);
    CHECK_THROWS_AS(parse_domain(replace(domain_text(), "(location ?package ?taxi)))", "(location ?pkg ?taxi)))")),
                    SemanticError);
}

TEST_CASE("fixture problem validates cleanly") {
    Domain d = parse_domain(domain_text());
    Problem p = parse_problem(problem_text());
    CHECK(validate(d, p).empty());
    REQUIRE(p.goal.size() == 1);
    CHECK(p.goal[0].str() == "(location package1 seattle-po)");
}

TEST_CASE("validation diagnostics") {
    Domain d = parse_domain(domain_text());
    SUBCASE("undeclared goal object") {
        auto p = parse_problem(replace(problem_text(), "(location package1 seattle-po)))", "(location package2 seattle-po)))"));
        auto diags = validate(d, p);
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].message.find("package2") != std::string::npos);
        CHECK(diags[0].loc.line > 0);
    }
    SUBCASE("functional conflict in init") {
        auto p = parse_problem(replace(problem_text(), "(location package1 pgh-po)",
                                       "(location package1 pgh-po) (location package1 pgh-airport)"));
        auto diags = validate(d, p);
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].message.find("functional conflict") != std::string::npos);
    }
    SUBCASE("domain mismatch and type errors") {
        auto p = parse_problem(replace(replace(problem_text(), "(:domain logistics)", "(:domain other)"),
                                       "(location airplane1 pgh-airport)", "(have-key airplane1)"));
        CHECK(validate(d, p).size() == 2);
    }
}

TEST_CASE("plan round trip") {
    Task task = fixture::task();
    ConditionalPlan plan = fixture::initial_plan(task);
    REQUIRE(plan.steps.size() == 10);
    std::string text = serialize_plan(plan);
    CHECK(text.find("(load-taxi package1 pgh-taxi pgh-po)") < text.find("(fly airplane1 pgh-airport seattle-airport)"));
    CHECK(parse_plan(text, task) == plan);

    ConditionalPlan empty;
    CHECK(parse_plan(serialize_plan(empty), task) == empty);

    Conjunction cond{{Atom{Symbol("location"), {Symbol("seattle-taxi"), Symbol("seattle-airport")}}, true}};
    std::vector<GroundAction> prefix(plan.steps.begin(), plan.steps.begin() + 6);
    std::vector<GroundAction> rest(plan.steps.begin() + 6, plan.steps.end());
    std::vector<GroundAction> skip(plan.steps.begin() + 7, plan.steps.end());
    ConditionalPlan branched = make_branch(prefix, cond, make_linear(skip), make_linear(rest));
    std::string btext = serialize_plan(branched);
    CHECK(btext.find("(branch (location seattle-taxi seattle-airport)") != std::string::npos);
    CHECK(parse_plan(btext, task) == branched);

    CHECK_THROWS_AS(parse_plan("(plan (teleport package1))", task), UnknownOperator);
    CHECK_THROWS_AS(parse_plan("(plan (load-taxi package1)", task), SyntaxError);
}

TEST_CASE("domain and problem round trip") {
    Domain d = parse_domain(domain_text());
    Domain d2 = parse_domain(serialize_domain(d));
    CHECK(serialize_domain(d2) == serialize_domain(d));
    CHECK(d2.operators.size() == 9);
    for (size_t i = 0; i < d.operators.size(); ++i) {
        CHECK(d2.operators[i]->pre == d.operators[i]->pre);
        CHECK(d2.operators[i]->plain == d.operators[i]->plain);
        CHECK(d2.operators[i]->initial == d.operators[i]->initial);
        CHECK(d2.operators[i]->final_ == d.operators[i]->final_);
    }
    Problem p = parse_problem(problem_text());
    Problem p2 = parse_problem(serialize_problem(p));
    CHECK(p2.objects == p.objects);
    CHECK(p2.init == p.init);
    CHECK(p2.goal == p.goal);
}
