#pragma once

#include <stdexcept>
#include <string>

namespace evplan {

/// Position in a source text, 1-based. line == 0 means "unknown".
struct SourceLoc {
    int line = 0;
    int column = 0;

    std::string str() const {
        return std::to_string(line) + ":" + std::to_string(column);
    }
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(SourceLoc loc, const std::string& what)
        : Error(loc.str() + ": syntax error: " + what), loc_(loc) {}
    SourceLoc where() const { return loc_; }

private:
    SourceLoc loc_;
};

class SemanticError : public Error {
public:
    SemanticError(SourceLoc loc, const std::string& what)
        : Error(loc.str() + ": " + what), loc_(loc) {}
    SourceLoc where() const { return loc_; }

private:
    SourceLoc loc_;
};

#define EVPLAN_DEFINE_ERROR(Name)          \
    class Name : public Error {            \
    public:                                \
        using Error::Error;                \
    }

EVPLAN_DEFINE_ERROR(TypeMismatch);
EVPLAN_DEFINE_ERROR(ArityError);
EVPLAN_DEFINE_ERROR(UnknownPredicate);
EVPLAN_DEFINE_ERROR(UnknownOperator);
EVPLAN_DEFINE_ERROR(NotApplicable);
EVPLAN_DEFINE_ERROR(FunctionalConflict);
EVPLAN_DEFINE_ERROR(NoPlanFound);
EVPLAN_DEFINE_ERROR(InvalidPlan);
EVPLAN_DEFINE_ERROR(PositionOutOfRange);
EVPLAN_DEFINE_ERROR(NetTooLarge);
EVPLAN_DEFINE_ERROR(TreeTooLarge);
EVPLAN_DEFINE_ERROR(RepairFailed);
EVPLAN_DEFINE_ERROR(DomainError);

/// Goal unreachable even when deletes are ignored.
class Unsolvable : public NoPlanFound {
public:
    using NoPlanFound::NoPlanFound;
};

#undef EVPLAN_DEFINE_ERROR

}  // namespace evplan
