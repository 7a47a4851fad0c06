#pragma once

#include <string>

#include "evplan/parser.hpp"

namespace fixture {

inline std::string path(const std::string& name) { return std::string(EVPLAN_DATA_DIR) + "/" + name; }

inline evplan::Task task() {
    return evplan::Task(evplan::parse_domain(evplan::read_file(path("logistics.evd"))),
                        evplan::parse_problem(evplan::read_file(path("logistics.evp"))));
}

inline evplan::ConditionalPlan initial_plan(const evplan::Task& t) {
    return evplan::parse_plan(evplan::read_file(path("logistics-initial.evplan")), t);
}

}  // namespace fixture
