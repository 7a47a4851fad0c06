#pragma once

// Domain ontology, states, grounding, and the execution semantics of
// operators and exogenous events.

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "evplan/error.hpp"
#include "evplan/symbol.hpp"

namespace evplan {

Symbol object_type();
Symbol number_type();

/// Types form a DAG rooted at `object`; a type may have several parents.
/// `number` is built in and only admits integer constants.
class TypeHierarchy {
public:
    TypeHierarchy();

    /// Declares (or extends) a type. Types without parents hang off `object`.
    void declare(Symbol type, std::vector<Symbol> parents);

    bool contains(Symbol type) const { return parents_.count(type) != 0; }
    bool is_subtype(Symbol sub, Symbol super) const;
    /// Returns a type that participates in a cycle, if any.
    std::optional<Symbol> find_cycle() const;
    /// Returns a parent reference to an undeclared type, if any.
    std::optional<Symbol> find_unknown_parent() const;

    const std::map<Symbol, std::vector<Symbol>>& parents() const { return parents_; }

private:
    std::map<Symbol, std::vector<Symbol>> parents_;
};

struct Param {
    Symbol var;   // includes the leading '?'
    Symbol type;
    bool operator==(const Param&) const = default;
};

struct Term {
    enum class Kind { Constant, Variable, Integer, Decrement };
    Kind kind = Kind::Constant;
    Symbol name;        // constant or variable name
    long value = 0;     // integer value, or decrement amount (>= 1)

    static Term constant(Symbol s) { return {Kind::Constant, s, 0}; }
    static Term variable(Symbol s) { return {Kind::Variable, s, 0}; }
    static Term integer(long v) { return {Kind::Integer, {}, v}; }
    static Term decrement(Symbol var, long k) { return {Kind::Decrement, var, k}; }

    std::string str() const;
    bool operator==(const Term&) const = default;
};

struct Literal {
    Symbol predicate;
    std::vector<Term> args;
    bool positive = true;
    SourceLoc loc;

    std::string str() const;
    bool operator==(const Literal& o) const {
        return predicate == o.predicate && args == o.args && positive == o.positive;
    }
};

/// One add or delete. A non-empty `forall` makes it universally quantified over
/// the listed variables, restricted to bindings where `when` holds in the
/// pre-effect state.
struct Effect {
    Literal atom;
    std::vector<Param> forall;
    std::vector<Literal> when;
    bool operator==(const Effect&) const = default;
};

struct EffectLists {
    std::vector<Effect> adds;
    std::vector<Effect> dels;
    bool empty() const { return adds.empty() && dels.empty(); }
    bool operator==(const EffectLists&) const = default;
};

enum class SchemaKind { Operator, Event };

/// Operator or event template. Zero-duration schemas use `plain`; durative
/// operators use `initial` and `final` instead.
struct Schema {
    SchemaKind kind = SchemaKind::Operator;
    Symbol name;
    std::vector<Param> params;
    int duration = 0;
    std::vector<Literal> pre;
    EffectLists plain;
    EffectLists initial;
    EffectLists final_;
    double probability = 1.0;
    SourceLoc loc;

    bool is_event() const { return kind == SchemaKind::Event; }
};

using SchemaPtr = std::shared_ptr<const Schema>;

struct PredicateDecl {
    Symbol name;
    std::vector<Param> args;
    /// Single-valued: the last argument is the value, the others the key.
    bool functional = false;
    SourceLoc loc;
};

class Domain {
public:
    Symbol name;
    TypeHierarchy types;
    std::map<Symbol, PredicateDecl> predicates;
    std::vector<SchemaPtr> operators;
    std::vector<SchemaPtr> events;
    long numeric_floor = 0;

    const PredicateDecl* predicate(Symbol name) const;
    SchemaPtr find_operator(Symbol name) const;
    SchemaPtr find_event(Symbol name) const;
    bool is_functional(Symbol pred) const;
    /// Static predicates never occur in any operator or event effect.
    bool is_static(Symbol pred) const;
    /// Recomputes the static-predicate set; call after editing schemas.
    void finalize();

private:
    std::set<Symbol> touched_;
};

struct Atom {
    Symbol predicate;
    std::vector<Symbol> args;

    std::string str() const;
    auto operator<=>(const Atom&) const = default;
};

struct GroundLiteral {
    Atom atom;
    bool positive = true;

    std::string str() const;
    GroundLiteral negated() const { return {atom, !positive}; }
    auto operator<=>(const GroundLiteral&) const = default;
};

using Conjunction = std::vector<GroundLiteral>;

std::string conjunction_str(const Conjunction& c);

struct Problem {
    Symbol name;
    Symbol domain_name;
    std::vector<std::pair<Symbol, Symbol>> objects;  // (object, type) in declaration order
    std::vector<Atom> init;
    Conjunction goal;

    std::vector<SourceLoc> object_locs;
    std::vector<SourceLoc> init_locs;
    std::vector<SourceLoc> goal_locs;
    SourceLoc loc;
};

/// Identity of a state variable: a functional predicate plus its key
/// arguments, or a whole boolean fact.
struct VarKey {
    Symbol predicate;
    std::vector<Symbol> key;
    bool functional = false;

    std::string str() const;
    auto operator<=>(const VarKey&) const = default;
};

/// Closed-world set of ground facts plus the terminal `failed` flag.
class State {
public:
    State() = default;
    explicit State(std::vector<Atom> facts);

    bool contains(const Atom& a) const;
    void insert(Atom a);
    void erase(const Atom& a);
    const std::vector<Atom>& facts() const { return facts_; }

    bool failed() const { return failed_; }
    void set_failed() { failed_ = true; }

    /// All facts of predicate `pred` whose arguments start with `key`.
    std::span<const Atom> with_prefix(Symbol pred, std::span<const Symbol> key) const;

    /// Value of a state variable: the functional value or none, or
    /// values::truth()/falsity() for boolean facts. Failed states yield failed().
    Symbol value(const VarKey& var) const;

    size_t hash() const;
    auto operator<=>(const State&) const = default;
    bool operator==(const State&) const = default;

private:
    std::vector<Atom> facts_;  // sorted, unique
    bool failed_ = false;
};

struct StateHash {
    size_t operator()(const State& s) const { return s.hash(); }
};

/// Fully bound operator or event instance.
struct GroundAction {
    SchemaPtr schema;
    std::vector<Symbol> args;

    Symbol name() const { return schema->name; }
    int duration() const { return schema->duration; }
    bool is_event() const { return schema->is_event(); }
    double probability() const { return schema->probability; }
    std::string str() const;

    bool operator==(const GroundAction& o) const {
        return schema->name == o.schema->name && schema->kind == o.schema->kind && args == o.args;
    }
};

/// Name-then-arguments lexicographic order over names (not intern ids).
bool canonical_less(const GroundAction& a, const GroundAction& b);

struct EffectSet {
    std::vector<Atom> adds;
    std::vector<Atom> dels;
};

/// Primitive change to one state variable.
struct VarOp {
    enum class Kind { Set, ClearIf };
    Kind kind = Kind::Set;
    Symbol value;
    bool operator==(const VarOp&) const = default;
};
using VarOps = std::vector<VarOp>;

Symbol apply_ops(const VarOps& ops, Symbol v);

/// Extra precondition literals keyed by operator name, or by a ground step's
/// text such as "(drive taxi1 a b)" (used by protection).
using ExtraPreconditions = std::map<Symbol, Conjunction>;

/// Domain + problem with cached groundings. Immutable after construction.
class Task {
public:
    Task(Domain domain, Problem problem);

    const Domain& domain() const { return domain_; }
    const Problem& problem() const { return problem_; }
    State initial_state() const;

    std::optional<Symbol> type_of(Symbol object) const;
    bool has_object(Symbol object) const { return type_of(object).has_value(); }
    /// Objects assignable to `type`, lexically sorted. For `number` the
    /// integers in [floor, largest integer mentioned by the problem].
    std::vector<Symbol> objects_of(Symbol type) const;

    /// Every type-correct ground operator whose static preconditions hold in
    /// the initial state, in canonical order.
    const std::vector<GroundAction>& ground_operators() const { return ground_operators_; }
    /// Same for events.
    const std::vector<GroundAction>& ground_events() const { return ground_events_; }
    /// Instantiated preconditions of ground_events(), index-aligned.
    const std::vector<Conjunction>& ground_event_preconditions() const { return ground_event_pre_; }

    VarKey var_of(const Atom& a) const;
    /// Value an atom assigns to its variable (functional value or truth()).
    Symbol value_of(const Atom& a) const;

private:
    std::vector<GroundAction> ground_all(const std::vector<SchemaPtr>& schemas) const;

    Domain domain_;
    Problem problem_;
    std::map<Symbol, Symbol> object_types_;
    long max_number_ = 0;
    std::vector<GroundAction> ground_operators_;
    std::vector<GroundAction> ground_events_;
    std::vector<Conjunction> ground_event_pre_;
};

GroundAction ground(const Task& task, const SchemaPtr& schema, std::span<const Symbol> args);
GroundAction ground(const Task& task, const SchemaPtr& schema, const std::map<Symbol, Symbol>& binding);

/// Instantiated preconditions, including static literals.
Conjunction preconditions(const GroundAction& a);
/// Instantiates a literal under the action's binding.
GroundLiteral instantiate(const GroundAction& a, const Literal& lit);

bool holds(const Task& task, const State& state, const GroundLiteral& lit);
bool holds(const Task& task, const State& state, std::span<const GroundLiteral> formula);
Conjunction violated(const Task& task, const State& state, std::span<const GroundLiteral> formula);

/// Truth of a literal given its variable's value; failed() never satisfies.
bool test_value(const Task& task, const GroundLiteral& lit, Symbol value);

bool applicable(const Task& task, const State& state, const GroundAction& step,
                const ExtraPreconditions* extra = nullptr);

enum class EffectPhase { Plain, Initial, Final };

/// Expands one effect phase against the pre-effect state. For zero-duration
/// schemas Initial means the plain effects and Final is empty.
EffectSet expand_effects(const Task& task, const State& pre, const GroundAction& a, EffectPhase phase);
/// Deletes, then adds. Functional adds replace the key's current value.
void apply_effects(const Task& task, State& state, const EffectSet& effects);
/// Per-variable change described by an effect set (deletes before adds).
std::map<VarKey, VarOps> var_ops(const Task& task, const EffectSet& effects);

State apply_initial(const Task& task, const State& state, const GroundAction& step);
State apply_final(const Task& task, const State& state, const GroundAction& step);
State apply_atomic(const Task& task, const State& state, const GroundAction& step);

/// Ground events whose preconditions hold, in canonical order.
std::vector<GroundAction> enabled_events(const Task& task, const State& state);

/// Parses an integer symbol, if it is one.
std::optional<long> as_integer(Symbol s);

}  // namespace evplan
