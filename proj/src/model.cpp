#include "evplan/model.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

namespace evplan {

Symbol object_type() {
    static const Symbol s("object");
    return s;
}

Symbol number_type() {
    static const Symbol s("number");
    return s;
}

// ---------------------------------------------------------------------------
// Types

TypeHierarchy::TypeHierarchy() {
    parents_[object_type()] = {};
    parents_[number_type()] = {};
}

void TypeHierarchy::declare(Symbol type, std::vector<Symbol> parents) {
    if (type == object_type()) return;
    if (parents.empty()) parents.push_back(object_type());
    auto& slot = parents_[type];
    for (Symbol p : parents) {
        if (std::find(slot.begin(), slot.end(), p) == slot.end()) slot.push_back(p);
    }
}

bool TypeHierarchy::is_subtype(Symbol sub, Symbol super) const {
    if (sub == super) return true;
    std::vector<Symbol> stack{sub};
    std::set<Symbol> seen;
    while (!stack.empty()) {
        Symbol t = stack.back();
        stack.pop_back();
        if (t == super) return true;
        if (!seen.insert(t).second) continue;
        auto it = parents_.find(t);
        if (it == parents_.end()) continue;
        for (Symbol p : it->second) stack.push_back(p);
    }
    return false;
}

std::optional<Symbol> TypeHierarchy::find_cycle() const {
    enum Mark { White, Grey, Black };
    std::map<Symbol, Mark> mark;
    std::optional<Symbol> found;
    std::function<void(Symbol)> visit = [&](Symbol t) {
        if (found) return;
        mark[t] = Grey;
        auto it = parents_.find(t);
        if (it != parents_.end()) {
            for (Symbol p : it->second) {
                if (mark[p] == Grey) {
                    found = p;
                    return;
                }
                if (mark[p] == White) visit(p);
            }
        }
        mark[t] = Black;
    };
    for (const auto& [t, _] : parents_) {
        if (mark[t] == White) visit(t);
        if (found) break;
    }
    return found;
}

std::optional<Symbol> TypeHierarchy::find_unknown_parent() const {
    for (const auto& [t, ps] : parents_) {
        for (Symbol p : ps) {
            if (!contains(p)) return p;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Printing

std::string Term::str() const {
    switch (kind) {
        case Kind::Constant:
        case Kind::Variable:
            return name.str();
        case Kind::Integer:
            return std::to_string(value);
        case Kind::Decrement:
            return "(- " + name.str() + " " + std::to_string(value) + ")";
    }
    return {};
}

std::string Literal::str() const {
    std::string s = "(" + predicate.str();
    for (const auto& a : args) s += " " + a.str();
    s += ")";
    return positive ? s : "(not " + s + ")";
}

std::string Atom::str() const {
    std::string s = "(" + predicate.str();
    for (Symbol a : args) s += " " + a.str();
    return s + ")";
}

std::string GroundLiteral::str() const {
    return positive ? atom.str() : "(not " + atom.str() + ")";
}

std::string conjunction_str(const Conjunction& c) {
    if (c.size() == 1) return c.front().str();
    std::string s = "(and";
    for (const auto& l : c) s += " " + l.str();
    return s + ")";
}

std::string VarKey::str() const {
    std::string s = "(" + predicate.str();
    for (Symbol a : key) s += " " + a.str();
    return s + ")";
}

std::string GroundAction::str() const {
    std::string s = "(" + schema->name.str();
    for (Symbol a : args) s += " " + a.str();
    return s + ")";
}

bool canonical_less(const GroundAction& a, const GroundAction& b) {
    if (a.name() != b.name()) return lexical_less(a.name(), b.name());
    return std::lexicographical_compare(a.args.begin(), a.args.end(), b.args.begin(), b.args.end(),
                                        lexical_less);
}

std::optional<long> as_integer(Symbol s) {
    const std::string& t = s.str();
    if (t.empty()) return std::nullopt;
    long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

// ---------------------------------------------------------------------------
// Domain

const PredicateDecl* Domain::predicate(Symbol pred) const {
    auto it = predicates.find(pred);
    return it == predicates.end() ? nullptr : &it->second;
}

SchemaPtr Domain::find_operator(Symbol n) const {
    for (const auto& s : operators) {
        if (s->name == n) return s;
    }
    return nullptr;
}

SchemaPtr Domain::find_event(Symbol n) const {
    for (const auto& s : events) {
        if (s->name == n) return s;
    }
    return nullptr;
}

bool Domain::is_functional(Symbol pred) const {
    const auto* p = predicate(pred);
    return p != nullptr && p->functional;
}

bool Domain::is_static(Symbol pred) const { return touched_.count(pred) == 0; }

void Domain::finalize() {
    touched_.clear();
    auto mark = [&](const EffectLists& e) {
        for (const auto& x : e.adds) touched_.insert(x.atom.predicate);
        for (const auto& x : e.dels) touched_.insert(x.atom.predicate);
    };
    for (const auto* list : {&operators, &events}) {
        for (const auto& s : *list) {
            mark(s->plain);
            mark(s->initial);
            mark(s->final_);
        }
    }
}

// ---------------------------------------------------------------------------
// State

State::State(std::vector<Atom> facts) : facts_(std::move(facts)) {
    std::sort(facts_.begin(), facts_.end());
    facts_.erase(std::unique(facts_.begin(), facts_.end()), facts_.end());
}

bool State::contains(const Atom& a) const { return std::binary_search(facts_.begin(), facts_.end(), a); }

void State::insert(Atom a) {
    auto it = std::lower_bound(facts_.begin(), facts_.end(), a);
    if (it != facts_.end() && *it == a) return;
    facts_.insert(it, std::move(a));
}

void State::erase(const Atom& a) {
    auto it = std::lower_bound(facts_.begin(), facts_.end(), a);
    if (it != facts_.end() && *it == a) facts_.erase(it);
}

std::span<const Atom> State::with_prefix(Symbol pred, std::span<const Symbol> key) const {
    Atom probe{pred, std::vector<Symbol>(key.begin(), key.end())};
    auto first = std::lower_bound(facts_.begin(), facts_.end(), probe);
    auto last = first;
    while (last != facts_.end() && last->predicate == pred && last->args.size() >= key.size() &&
           std::equal(key.begin(), key.end(), last->args.begin())) {
        ++last;
    }
    return {first, last};
}

Symbol State::value(const VarKey& var) const {
    if (failed_) return values::failed();
    if (var.functional) {
        auto found = with_prefix(var.predicate, var.key);
        for (const auto& a : found) {
            if (a.args.size() == var.key.size() + 1) return a.args.back();
        }
        return values::none();
    }
    return contains(Atom{var.predicate, var.key}) ? values::truth() : values::falsity();
}

size_t State::hash() const {
    size_t h = failed_ ? 0x9e3779b97f4a7c15ULL : 0;
    auto mix = [&h](size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (const auto& a : facts_) {
        mix(static_cast<size_t>(a.predicate.id()));
        for (Symbol s : a.args) mix(static_cast<size_t>(s.id()));
        mix(0xff);
    }
    return h;
}

Symbol apply_ops(const VarOps& ops, Symbol v) {
    for (const auto& op : ops) {
        if (v == values::failed()) return v;
        if (op.kind == VarOp::Kind::Set) {
            v = op.value;
        } else if (v == op.value) {
            v = values::none();
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Binding and grounding

namespace {

using Binding = std::map<Symbol, Symbol>;

Binding binding_of(const GroundAction& a) {
    Binding b;
    for (size_t i = 0; i < a.schema->params.size(); ++i) b[a.schema->params[i].var] = a.args[i];
    return b;
}

Symbol eval_term(const Term& t, const Binding& b) {
    switch (t.kind) {
        case Term::Kind::Constant:
            return t.name;
        case Term::Kind::Integer:
            return Symbol(std::to_string(t.value));
        case Term::Kind::Variable:
        case Term::Kind::Decrement: {
            auto it = b.find(t.name);
            if (it == b.end()) throw Error("unbound variable " + t.name.str());
            if (t.kind == Term::Kind::Variable) return it->second;
            auto n = as_integer(it->second);
            if (!n) throw TypeMismatch("decrement of non-numeric value " + it->second.str());
            return Symbol(std::to_string(*n - t.value));
        }
    }
    return {};
}

Atom eval_atom(const Literal& l, const Binding& b) {
    Atom a{l.predicate, {}};
    a.args.reserve(l.args.size());
    for (const auto& t : l.args) a.args.push_back(eval_term(t, b));
    return a;
}

template <typename F>
void for_each_literal(const Schema& s, F&& f) {
    for (const auto& l : s.pre) f(l);
    for (const auto* e : {&s.plain, &s.initial, &s.final_}) {
        for (const auto* list : {&e->adds, &e->dels}) {
            for (const auto& x : *list) {
                f(x.atom);
                for (const auto& w : x.when) f(w);
            }
        }
    }
}

long largest_integer(const Domain& d, const Problem& p) {
    long best = d.numeric_floor;
    auto see = [&best](Symbol s) {
        if (auto n = as_integer(s)) best = std::max(best, *n);
    };
    for (const auto& a : p.init) {
        for (Symbol s : a.args) see(s);
    }
    for (const auto& g : p.goal) {
        for (Symbol s : g.atom.args) see(s);
    }
    for (const auto* list : {&d.operators, &d.events}) {
        for (const auto& s : *list) {
            for_each_literal(*s, [&](const Literal& l) {
                for (const auto& t : l.args) {
                    if (t.kind == Term::Kind::Integer) best = std::max(best, t.value);
                }
            });
        }
    }
    return best;
}

}  // namespace

Task::Task(Domain domain, Problem problem) : domain_(std::move(domain)), problem_(std::move(problem)) {
    domain_.finalize();
    for (size_t i = 0; i < problem_.objects.size(); ++i) {
        const auto& [obj, type] = problem_.objects[i];
        if (!domain_.types.contains(type)) {
            SourceLoc loc = i < problem_.object_locs.size() ? problem_.object_locs[i] : SourceLoc{};
            throw SemanticError(loc, "unknown type " + type.str() + " for object " + obj.str());
        }
        object_types_[obj] = type;
    }
    max_number_ = largest_integer(domain_, problem_);
    ground_operators_ = ground_all(domain_.operators);
    ground_events_ = ground_all(domain_.events);
    for (const auto& e : ground_events_) ground_event_pre_.push_back(preconditions(e));
}

State Task::initial_state() const { return State(problem_.init); }

std::optional<Symbol> Task::type_of(Symbol object) const {
    auto it = object_types_.find(object);
    if (it != object_types_.end()) return it->second;
    if (as_integer(object)) return number_type();
    return std::nullopt;
}

std::vector<Symbol> Task::objects_of(Symbol type) const {
    std::vector<Symbol> out;
    if (type == number_type()) {
        for (long v = domain_.numeric_floor; v <= max_number_; ++v) out.emplace_back(std::to_string(v));
        return out;
    }
    for (const auto& [obj, t] : object_types_) {
        if (domain_.types.is_subtype(t, type)) out.push_back(obj);
    }
    std::sort(out.begin(), out.end(), lexical_less);
    return out;
}

VarKey Task::var_of(const Atom& a) const {
    if (domain_.is_functional(a.predicate) && !a.args.empty()) {
        return {a.predicate, std::vector<Symbol>(a.args.begin(), a.args.end() - 1), true};
    }
    return {a.predicate, a.args, false};
}

Symbol Task::value_of(const Atom& a) const {
    if (domain_.is_functional(a.predicate) && !a.args.empty()) return a.args.back();
    return values::truth();
}

namespace {

void check_arg_type(const Task& task, const Param& p, Symbol arg) {
    if (p.type == number_type()) {
        auto n = as_integer(arg);
        if (!n) throw TypeMismatch(arg.str() + " is not a number (parameter " + p.var.str() + ")");
        if (*n < task.domain().numeric_floor) throw TypeMismatch(arg.str() + " is below the numeric floor");
        return;
    }
    auto t = task.type_of(arg);
    if (!t) throw TypeMismatch("unknown object " + arg.str());
    if (!task.domain().types.is_subtype(*t, p.type)) {
        throw TypeMismatch(arg.str() + " of type " + t->str() + " does not fit parameter " + p.var.str() +
                           " of type " + p.type.str());
    }
}

void check_decrements(const Task& task, const Schema& s, const Binding& b) {
    for_each_literal(s, [&](const Literal& l) {
        for (const auto& t : l.args) {
            if (t.kind != Term::Kind::Decrement) continue;
            auto it = b.find(t.name);
            if (it == b.end()) continue;
            auto n = as_integer(it->second);
            if (!n || *n - t.value < task.domain().numeric_floor) {
                throw TypeMismatch("decrement " + t.str() + " falls below the numeric floor");
            }
        }
    });
}

}  // namespace

GroundAction ground(const Task& task, const SchemaPtr& schema, std::span<const Symbol> args) {
    if (args.size() != schema->params.size()) {
        throw ArityError(schema->name.str() + " expects " + std::to_string(schema->params.size()) +
                         " arguments, got " + std::to_string(args.size()));
    }
    for (size_t i = 0; i < args.size(); ++i) check_arg_type(task, schema->params[i], args[i]);
    GroundAction g{schema, std::vector<Symbol>(args.begin(), args.end())};
    check_decrements(task, *schema, binding_of(g));
    return g;
}

GroundAction ground(const Task& task, const SchemaPtr& schema, const std::map<Symbol, Symbol>& binding) {
    std::vector<Symbol> args;
    for (const auto& p : schema->params) {
        auto it = binding.find(p.var);
        if (it == binding.end()) throw ArityError("binding misses parameter " + p.var.str());
        args.push_back(it->second);
    }
    if (binding.size() != schema->params.size()) throw ArityError("binding has extra variables");
    return ground(task, schema, args);
}

std::vector<GroundAction> Task::ground_all(const std::vector<SchemaPtr>& schemas) const {
    std::vector<GroundAction> out;
    for (const auto& s : schemas) {
        const size_t n = s->params.size();
        // Static literals are checked as soon as all their variables are bound.
        std::vector<std::vector<const Literal*>> checks(n + 1);
        for (const auto& l : s->pre) {
            if (!domain_.is_static(l.predicate)) continue;
            size_t level = 0;
            for (const auto& t : l.args) {
                if (t.kind != Term::Kind::Variable && t.kind != Term::Kind::Decrement) continue;
                for (size_t i = 0; i < n; ++i) {
                    if (s->params[i].var == t.name) level = std::max(level, i + 1);
                }
            }
            checks[level].push_back(&l);
        }
        const State init = initial_state();
        auto passes = [&](size_t level, const Binding& b) {
            for (const Literal* l : checks[level]) {
                if (init.contains(eval_atom(*l, b)) != l->positive) return false;
            }
            return true;
        };
        std::vector<std::vector<Symbol>> candidates;
        for (const auto& p : s->params) candidates.push_back(objects_of(p.type));
        Binding b;
        std::vector<Symbol> args(n);
        std::function<void(size_t)> rec = [&](size_t i) {
            if (!passes(i, b)) return;
            if (i == n) {
                try {
                    out.push_back(ground(*this, s, args));
                } catch (const TypeMismatch&) {
                }
                return;
            }
            for (Symbol c : candidates[i]) {
                args[i] = c;
                b[s->params[i].var] = c;
                rec(i + 1);
            }
            b.erase(s->params[i].var);
        };
        rec(0);
    }
    std::stable_sort(out.begin(), out.end(), canonical_less);
    return out;
}

GroundLiteral instantiate(const GroundAction& a, const Literal& lit) {
    return {eval_atom(lit, binding_of(a)), lit.positive};
}

Conjunction preconditions(const GroundAction& a) {
    Binding b = binding_of(a);
    Conjunction out;
    out.reserve(a.schema->pre.size());
    for (const auto& l : a.schema->pre) out.push_back({eval_atom(l, b), l.positive});
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

bool holds(const Task& task, const State& state, const GroundLiteral& lit) {
    if (task.domain().predicate(lit.atom.predicate) == nullptr) {
        throw UnknownPredicate("unknown predicate " + lit.atom.predicate.str());
    }
    if (state.failed()) return false;
    return state.contains(lit.atom) == lit.positive;
}

bool holds(const Task& task, const State& state, std::span<const GroundLiteral> formula) {
    bool ok = !state.failed();
    for (const auto& l : formula) {
        if (!holds(task, state, l)) ok = false;
    }
    return ok;
}

Conjunction violated(const Task& task, const State& state, std::span<const GroundLiteral> formula) {
    Conjunction out;
    for (const auto& l : formula) {
        if (!holds(task, state, l)) out.push_back(l);
    }
    return out;
}

bool test_value(const Task& task, const GroundLiteral& lit, Symbol value) {
    if (value == values::failed()) return false;
    if (task.domain().is_functional(lit.atom.predicate) && !lit.atom.args.empty()) {
        return (value == lit.atom.args.back()) == lit.positive;
    }
    return (value == values::truth()) == lit.positive;
}

bool applicable(const Task& task, const State& state, const GroundAction& step, const ExtraPreconditions* extra) {
    if (state.failed()) return false;
    if (!holds(task, state, preconditions(step))) return false;
    if (extra != nullptr && !extra->empty()) {
        auto it = extra->find(step.name());
        if (it != extra->end() && !holds(task, state, it->second)) return false;
        it = extra->find(Symbol(step.str()));
        if (it != extra->end() && !holds(task, state, it->second)) return false;
    }
    return true;
}

EffectSet expand_effects(const Task& task, const State& pre, const GroundAction& a, EffectPhase phase) {
    const Schema& s = *a.schema;
    const EffectLists* lists = nullptr;
    if (s.duration == 0) {
        if (phase == EffectPhase::Final) return {};
        lists = &s.plain;
    } else {
        lists = phase == EffectPhase::Final ? &s.final_ : &s.initial;
        if (phase == EffectPhase::Plain) lists = &s.plain;
    }
    Binding base = binding_of(a);
    EffectSet out;
    auto expand = [&](const Effect& e, std::vector<Atom>& sink) {
        if (e.forall.empty()) {
            sink.push_back(eval_atom(e.atom, base));
            return;
        }
        Binding b = base;
        std::function<void(size_t)> rec = [&](size_t i) {
            if (i == e.forall.size()) {
                for (const auto& w : e.when) {
                    if (pre.contains(eval_atom(w, b)) != w.positive) return;
                }
                sink.push_back(eval_atom(e.atom, b));
                return;
            }
            for (Symbol o : task.objects_of(e.forall[i].type)) {
                b[e.forall[i].var] = o;
                rec(i + 1);
            }
        };
        rec(0);
    };
    for (const auto& e : lists->dels) expand(e, out.dels);
    for (const auto& e : lists->adds) expand(e, out.adds);
    return out;
}

void apply_effects(const Task& task, State& state, const EffectSet& effects) {
    for (const auto& d : effects.dels) state.erase(d);
    std::map<VarKey, Symbol> assigned;
    for (const auto& a : effects.adds) {
        VarKey var = task.var_of(a);
        if (var.functional) {
            Symbol v = a.args.back();
            auto [it, inserted] = assigned.emplace(var, v);
            if (!inserted && it->second != v) {
                throw FunctionalConflict("two values for " + var.str() + ": " + it->second.str() + " and " +
                                         v.str());
            }
            auto existing = state.with_prefix(var.predicate, var.key);
            std::vector<Atom> stale(existing.begin(), existing.end());
            for (const auto& s : stale) state.erase(s);
        }
        state.insert(a);
    }
}

std::map<VarKey, VarOps> var_ops(const Task& task, const EffectSet& effects) {
    std::map<VarKey, VarOps> out;
    for (const auto& d : effects.dels) {
        VarKey var = task.var_of(d);
        if (var.functional) {
            out[var].push_back({VarOp::Kind::ClearIf, d.args.back()});
        } else {
            out[var].push_back({VarOp::Kind::Set, values::falsity()});
        }
    }
    for (const auto& a : effects.adds) {
        VarKey var = task.var_of(a);
        out[var].push_back({VarOp::Kind::Set, task.value_of(a)});
    }
    return out;
}

State apply_initial(const Task& task, const State& state, const GroundAction& step) {
    if (!applicable(task, state, step)) {
        std::string why = state.failed() ? "state has failed" : conjunction_str(violated(task, state, preconditions(step)));
        throw NotApplicable(step.str() + " not applicable: " + why);
    }
    State next = state;
    apply_effects(task, next, expand_effects(task, state, step, EffectPhase::Initial));
    return next;
}

State apply_final(const Task& task, const State& state, const GroundAction& step) {
    State next = state;
    if (step.duration() > 0) apply_effects(task, next, expand_effects(task, state, step, EffectPhase::Final));
    return next;
}

State apply_atomic(const Task& task, const State& state, const GroundAction& step) {
    return apply_final(task, apply_initial(task, state, step), step);
}

std::vector<GroundAction> enabled_events(const Task& task, const State& state) {
    std::vector<GroundAction> out;
    if (state.failed()) return out;
    const auto& events = task.ground_events();
    const auto& pres = task.ground_event_preconditions();
    for (size_t i = 0; i < events.size(); ++i) {
        if (holds(task, state, pres[i])) out.push_back(events[i]);
    }
    return out;
}

}  // namespace evplan
