#pragma once

// Textual domain (.evd), problem (.evp) and plan (.evplan) formats. The
// grammar is documented in docs/grammar.md.

#include <string>
#include <string_view>
#include <vector>

#include "evplan/model.hpp"
#include "evplan/plan.hpp"

namespace evplan {

/// Throws SyntaxError or SemanticError (unknown type or predicate, bad
/// probability, negative duration, nonzero event duration, ...).
Domain parse_domain(std::string_view text);
/// Throws SyntaxError; cross-checks against a domain happen in validate().
Problem parse_problem(std::string_view text);

struct Diagnostic {
    SourceLoc loc;
    std::string message;

    std::string str() const { return loc.str() + ": " + message; }
};

/// Empty result means the problem is well-formed for the domain.
std::vector<Diagnostic> validate(const Domain& domain, const Problem& problem);

std::string serialize_domain(const Domain& domain);
std::string serialize_problem(const Problem& problem);

std::string serialize_plan(const ConditionalPlan& plan);
/// Throws SyntaxError, UnknownOperator, or grounding errors.
ConditionalPlan parse_plan(std::string_view text, const Task& task);

/// Reads a whole file; throws Error when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace evplan
