#include "evplan/parser.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "evplan/sexpr.hpp"

namespace evplan {
namespace {

bool is_variable(std::string_view s) { return !s.empty() && s.front() == '?'; }

bool is_integer(std::string_view s) {
    if (s.empty()) return false;
    size_t i = (s.front() == '-') ? 1 : 0;
    if (i == s.size()) return false;
    return std::all_of(s.begin() + static_cast<long>(i), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

const SExpr& expect_list(const SExpr& e, std::string_view what) {
    if (!e.is_list) throw SyntaxError(e.loc, "expected " + std::string(what));
    return e;
}

const std::string& expect_atom(const SExpr& e, std::string_view what) {
    if (e.is_list) throw SyntaxError(e.loc, "expected " + std::string(what));
    return e.atom;
}

/// `?a ?b - type ?c` style list. Untyped entries default to `object`.
std::vector<Param> parse_typed_list(const SExpr& list, bool variables) {
    expect_list(list, "typed list");
    std::vector<Param> out;
    std::vector<Symbol> pending;
    for (size_t i = 0; i < list.items.size(); ++i) {
        const auto& name = expect_atom(list.items[i], "name");
        if (name == "-") {
            if (i + 1 >= list.items.size() || pending.empty()) throw SyntaxError(list.items[i].loc, "dangling '-'");
            Symbol type(expect_atom(list.items[++i], "type name"));
            for (Symbol p : pending) out.push_back({p, type});
            pending.clear();
            continue;
        }
        if (variables != is_variable(name)) {
            throw SyntaxError(list.items[i].loc, variables ? "expected ?variable" : "unexpected variable " + name);
        }
        pending.emplace_back(name);
    }
    for (Symbol p : pending) out.push_back({p, object_type()});
    return out;
}

Term parse_term(const SExpr& e) {
    if (e.is_list) {
        if (e.items.size() != 3 || !e.items[0].is_atom("-")) throw SyntaxError(e.loc, "expected (- ?var k)");
        const auto& var = expect_atom(e.items[1], "variable");
        const auto& k = expect_atom(e.items[2], "integer");
        if (!is_variable(var)) throw SyntaxError(e.items[1].loc, "decrement needs a variable");
        if (!is_integer(k)) throw SyntaxError(e.items[2].loc, "decrement needs an integer");
        long n = std::stol(k);
        if (n < 1) throw SemanticError(e.items[2].loc, "decrement constant must be >= 1");
        return Term::decrement(Symbol(var), n);
    }
    if (is_variable(e.atom)) return Term::variable(Symbol(e.atom));
    if (is_integer(e.atom)) return Term::integer(std::stol(e.atom));
    return Term::constant(Symbol(e.atom));
}

Literal parse_literal(const SExpr& e) {
    expect_list(e, "literal");
    if (e.has_head("not")) {
        if (e.items.size() != 2) throw SyntaxError(e.loc, "(not ...) takes one literal");
        Literal l = parse_literal(e.items[1]);
        if (!l.positive) throw SyntaxError(e.loc, "double negation");
        l.positive = false;
        l.loc = e.loc;
        return l;
    }
    if (e.items.empty()) throw SyntaxError(e.loc, "empty literal");
    Literal l;
    l.predicate = Symbol(expect_atom(e.items[0], "predicate name"));
    l.loc = e.loc;
    for (size_t i = 1; i < e.items.size(); ++i) l.args.push_back(parse_term(e.items[i]));
    return l;
}

std::vector<Literal> parse_formula(const SExpr& e) {
    expect_list(e, "formula");
    if (e.items.empty()) return {};
    if (e.has_head("and")) {
        std::vector<Literal> out;
        for (size_t i = 1; i < e.items.size(); ++i) {
            auto part = parse_formula(e.items[i]);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    return {parse_literal(e)};
}

std::vector<Effect> parse_effects(const SExpr& list) {
    expect_list(list, "effect list");
    std::vector<Effect> out;
    for (const auto& item : list.items) {
        expect_list(item, "effect");
        if (item.has_head("forall")) {
            if (item.items.size() != 3) throw SyntaxError(item.loc, "expected (forall (vars) effect)");
            Effect eff;
            eff.forall = parse_typed_list(item.items[1], true);
            const SExpr& body = item.items[2];
            if (body.has_head("when")) {
                if (body.items.size() != 3) throw SyntaxError(body.loc, "expected (when condition atom)");
                eff.when = parse_formula(body.items[1]);
                eff.atom = parse_literal(body.items[2]);
            } else {
                eff.atom = parse_literal(body);
            }
            if (!eff.atom.positive) throw SyntaxError(body.loc, "effects list positive atoms");
            out.push_back(std::move(eff));
            continue;
        }
        Effect eff;
        eff.atom = parse_literal(item);
        if (!eff.atom.positive) throw SyntaxError(item.loc, "effects list positive atoms; use :del");
        out.push_back(std::move(eff));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Domain checks

struct SchemaChecker {
    const Domain& domain;

    void literal(const Literal& l, const std::map<Symbol, Symbol>& scope) const {
        const PredicateDecl* decl = domain.predicate(l.predicate);
        if (decl == nullptr) throw SemanticError(l.loc, "unknown predicate " + l.predicate.str());
        if (decl->args.size() != l.args.size()) {
            throw SemanticError(l.loc, "predicate " + l.predicate.str() + " takes " +
                                           std::to_string(decl->args.size()) + " arguments");
        }
        for (size_t i = 0; i < l.args.size(); ++i) {
            const Term& t = l.args[i];
            Symbol expected = decl->args[i].type;
            if (t.kind == Term::Kind::Variable || t.kind == Term::Kind::Decrement) {
                auto it = scope.find(t.name);
                if (it == scope.end()) throw SemanticError(l.loc, "unbound variable " + t.name.str());
                Symbol actual = it->second;
                if (t.kind == Term::Kind::Decrement && actual != number_type()) {
                    throw SemanticError(l.loc, "decrement of non-numeric variable " + t.name.str());
                }
                if (!domain.types.is_subtype(actual, expected) && !domain.types.is_subtype(expected, actual)) {
                    throw SemanticError(l.loc, "variable " + t.name.str() + " of type " + actual.str() +
                                                   " does not fit argument " + std::to_string(i + 1) + " of " +
                                                   l.predicate.str() + " (" + expected.str() + ")");
                }
            } else if (t.kind == Term::Kind::Integer && expected != number_type()) {
                throw SemanticError(l.loc, "integer argument where " + expected.str() + " expected");
            }
        }
    }

    void effects(const EffectLists& e, const std::map<Symbol, Symbol>& scope) const {
        for (const auto* list : {&e.adds, &e.dels}) {
            for (const auto& x : *list) {
                auto inner = scope;
                for (const auto& p : x.forall) {
                    type(p.type, x.atom.loc);
                    inner[p.var] = p.type;
                }
                for (const auto& w : x.when) literal(w, inner);
                literal(x.atom, inner);
            }
        }
    }

    void type(Symbol t, SourceLoc loc) const {
        if (!domain.types.contains(t)) throw SemanticError(loc, "unknown type " + t.str());
    }

    void schema(const Schema& s) const {
        std::map<Symbol, Symbol> scope;
        for (const auto& p : s.params) {
            type(p.type, s.loc);
            if (!scope.emplace(p.var, p.type).second) {
                throw SemanticError(s.loc, "duplicate parameter " + p.var.str() + " in " + s.name.str());
            }
        }
        if (s.duration < 0) throw SemanticError(s.loc, "negative duration in " + s.name.str());
        if (s.is_event()) {
            if (s.duration != 0) throw SemanticError(s.loc, "event " + s.name.str() + " must have duration 0");
            if (!(s.probability > 0.0 && s.probability <= 1.0)) {
                throw SemanticError(s.loc, "probability of " + s.name.str() + " must lie in (0, 1]");
            }
        }
        if (s.duration == 0 && (!s.initial.empty() || !s.final_.empty())) {
            throw SemanticError(s.loc, s.name.str() + " has duration 0 but initial/final effects");
        }
        if (s.duration > 0 && !s.plain.empty()) {
            throw SemanticError(s.loc, s.name.str() + " is durative; use :initial-*/:final-* effects");
        }
        for (const auto& l : s.pre) literal(l, scope);
        effects(s.plain, scope);
        effects(s.initial, scope);
        effects(s.final_, scope);
    }
};

Schema parse_schema(const SExpr& e, SchemaKind kind) {
    Schema s;
    s.kind = kind;
    s.loc = e.loc;
    if (e.items.size() < 2) throw SyntaxError(e.loc, "schema needs a name");
    s.name = Symbol(expect_atom(e.items[1], "schema name"));
    bool has_probability = false;
    for (size_t i = 2; i < e.items.size(); i += 2) {
        const auto& key = expect_atom(e.items[i], "keyword");
        if (i + 1 >= e.items.size()) throw SyntaxError(e.items[i].loc, "missing value for " + key);
        const SExpr& v = e.items[i + 1];
        if (key == ":params") {
            s.params = parse_typed_list(v, true);
        } else if (key == ":duration") {
            const auto& d = expect_atom(v, "integer duration");
            if (!is_integer(d)) throw SyntaxError(v.loc, "duration must be an integer");
            s.duration = std::stoi(d);
        } else if (key == ":probability") {
            const auto& p = expect_atom(v, "probability");
            try {
                size_t used = 0;
                s.probability = std::stod(p, &used);
                if (used != p.size()) throw std::invalid_argument(p);
            } catch (const std::exception&) {
                throw SyntaxError(v.loc, "malformed probability " + p);
            }
            has_probability = true;
            if (kind == SchemaKind::Operator) throw SemanticError(v.loc, "operators do not take :probability");
        } else if (key == ":pre") {
            s.pre = parse_formula(v);
        } else if (key == ":add") {
            s.plain.adds = parse_effects(v);
        } else if (key == ":del") {
            s.plain.dels = parse_effects(v);
        } else if (key == ":initial-add") {
            s.initial.adds = parse_effects(v);
        } else if (key == ":initial-del") {
            s.initial.dels = parse_effects(v);
        } else if (key == ":final-add") {
            s.final_.adds = parse_effects(v);
        } else if (key == ":final-del") {
            s.final_.dels = parse_effects(v);
        } else {
            throw SyntaxError(e.items[i].loc, "unknown keyword " + key);
        }
    }
    if (kind == SchemaKind::Event && !has_probability) {
        throw SemanticError(e.loc, "event " + s.name.str() + " needs :probability");
    }
    return s;
}

const SExpr& single_top(std::string_view text, std::string_view head) {
    static thread_local std::vector<SExpr> holder;
    holder = read_sexprs(text);
    if (holder.size() != 1 || !holder.front().has_head(head)) {
        SourceLoc loc = holder.empty() ? SourceLoc{1, 1} : holder.front().loc;
        throw SyntaxError(loc, "expected a single (" + std::string(head) + " ...) form");
    }
    return holder.front();
}

}  // namespace

Domain parse_domain(std::string_view text) {
    const SExpr top = single_top(text, "domain");
    Domain d;
    if (top.items.size() < 2) throw SyntaxError(top.loc, "domain needs a name");
    d.name = Symbol(expect_atom(top.items[1], "domain name"));
    std::vector<std::pair<Symbol, SourceLoc>> functional;
    for (size_t i = 2; i < top.items.size(); ++i) {
        const SExpr& sec = expect_list(top.items[i], "domain section");
        if (sec.items.empty()) throw SyntaxError(sec.loc, "empty section");
        const auto& head = expect_atom(sec.items[0], "section keyword");
        if (head == ":types") {
            for (size_t k = 1; k < sec.items.size(); ++k) {
                const SExpr& t = sec.items[k];
                if (t.is_atom()) {
                    d.types.declare(Symbol(t.atom), {});
                    continue;
                }
                if (t.items.empty()) throw SyntaxError(t.loc, "empty type entry");
                std::vector<Symbol> parents;
                for (size_t j = 1; j < t.items.size(); ++j) parents.emplace_back(expect_atom(t.items[j], "type"));
                d.types.declare(Symbol(expect_atom(t.items[0], "type")), std::move(parents));
            }
            if (auto bad = d.types.find_unknown_parent()) throw SemanticError(sec.loc, "unknown type " + bad->str());
            if (auto cyc = d.types.find_cycle()) throw SemanticError(sec.loc, "type cycle through " + cyc->str());
        } else if (head == ":predicates") {
            for (size_t k = 1; k < sec.items.size(); ++k) {
                const SExpr& p = expect_list(sec.items[k], "predicate declaration");
                if (p.items.empty()) throw SyntaxError(p.loc, "empty predicate declaration");
                PredicateDecl decl;
                decl.name = Symbol(expect_atom(p.items[0], "predicate name"));
                decl.loc = p.loc;
                SExpr rest;
                rest.is_list = true;
                rest.loc = p.loc;
                rest.items.assign(p.items.begin() + 1, p.items.end());
                decl.args = parse_typed_list(rest, true);
                for (const auto& a : decl.args) {
                    if (!d.types.contains(a.type)) throw SemanticError(p.loc, "unknown type " + a.type.str());
                }
                if (!d.predicates.emplace(decl.name, decl).second) {
                    throw SemanticError(p.loc, "duplicate predicate " + decl.name.str());
                }
            }
        } else if (head == ":functional") {
            for (size_t k = 1; k < sec.items.size(); ++k) {
                functional.emplace_back(Symbol(expect_atom(sec.items[k], "predicate name")), sec.items[k].loc);
            }
        } else if (head == ":numeric-floor") {
            if (sec.items.size() != 2 || !is_integer(expect_atom(sec.items[1], "integer"))) {
                throw SyntaxError(sec.loc, "expected (:numeric-floor N)");
            }
            d.numeric_floor = std::stol(sec.items[1].atom);
        } else if (head == ":operator" || head == ":event") {
            auto kind = head == ":operator" ? SchemaKind::Operator : SchemaKind::Event;
            auto s = std::make_shared<Schema>(parse_schema(sec, kind));
            if (d.find_operator(s->name) || d.find_event(s->name)) {
                throw SemanticError(sec.loc, "duplicate schema " + s->name.str());
            }
            (kind == SchemaKind::Operator ? d.operators : d.events).push_back(std::move(s));
        } else {
            throw SyntaxError(sec.items[0].loc, "unknown domain section " + head);
        }
    }
    for (const auto& [name, loc] : functional) {
        auto it = d.predicates.find(name);
        if (it == d.predicates.end()) throw SemanticError(loc, "unknown predicate " + name.str());
        if (it->second.args.empty()) throw SemanticError(loc, "functional predicate needs a value argument");
        it->second.functional = true;
    }
    SchemaChecker check{d};
    for (const auto* list : {&d.operators, &d.events}) {
        for (const auto& s : *list) check.schema(*s);
    }
    d.finalize();
    return d;
}

Problem parse_problem(std::string_view text) {
    const SExpr top = single_top(text, "problem");
    Problem p;
    p.loc = top.loc;
    if (top.items.size() < 2) throw SyntaxError(top.loc, "problem needs a name");
    p.name = Symbol(expect_atom(top.items[1], "problem name"));
    auto ground_atom = [](const SExpr& e) {
        Literal l = parse_literal(e);
        Atom a{l.predicate, {}};
        for (const auto& t : l.args) {
            if (t.kind == Term::Kind::Variable || t.kind == Term::Kind::Decrement) {
                throw SyntaxError(e.loc, "problem facts must be ground");
            }
            a.args.push_back(t.kind == Term::Kind::Integer ? Symbol(std::to_string(t.value)) : t.name);
        }
        return std::make_pair(a, l.positive);
    };
    for (size_t i = 2; i < top.items.size(); ++i) {
        const SExpr& sec = expect_list(top.items[i], "problem section");
        if (sec.items.empty()) throw SyntaxError(sec.loc, "empty section");
        const auto& head = expect_atom(sec.items[0], "section keyword");
        if (head == ":domain") {
            if (sec.items.size() != 2) throw SyntaxError(sec.loc, "expected (:domain name)");
            p.domain_name = Symbol(expect_atom(sec.items[1], "domain name"));
        } else if (head == ":objects") {
            SExpr rest;
            rest.is_list = true;
            rest.loc = sec.loc;
            rest.items.assign(sec.items.begin() + 1, sec.items.end());
            size_t k = 0;
            for (const auto& obj : parse_typed_list(rest, false)) {
                p.objects.emplace_back(obj.var, obj.type);
                // Locate the object's own token for diagnostics.
                while (k < rest.items.size() && !rest.items[k].is_atom(obj.var.str())) ++k;
                p.object_locs.push_back(k < rest.items.size() ? rest.items[k].loc : sec.loc);
            }
        } else if (head == ":init") {
            for (size_t k = 1; k < sec.items.size(); ++k) {
                auto [atom, positive] = ground_atom(sec.items[k]);
                if (!positive) throw SyntaxError(sec.items[k].loc, "initial facts are positive (closed world)");
                p.init.push_back(std::move(atom));
                p.init_locs.push_back(sec.items[k].loc);
            }
        } else if (head == ":goal") {
            if (sec.items.size() != 2) throw SyntaxError(sec.loc, "expected (:goal formula)");
            const SExpr& f = sec.items[1];
            std::vector<const SExpr*> parts;
            if (f.has_head("and")) {
                for (size_t k = 1; k < f.items.size(); ++k) parts.push_back(&f.items[k]);
            } else if (f.is_list && !f.items.empty()) {
                parts.push_back(&f);
            }
            for (const SExpr* part : parts) {
                auto [atom, positive] = ground_atom(*part);
                p.goal.push_back({std::move(atom), positive});
                p.goal_locs.push_back(part->loc);
            }
        } else {
            throw SyntaxError(sec.items[0].loc, "unknown problem section " + head);
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Diagnostic> validate(const Domain& domain, const Problem& problem) {
    std::vector<Diagnostic> out;
    if (problem.domain_name.valid() && problem.domain_name != domain.name) {
        out.push_back({problem.loc, "problem is for domain " + problem.domain_name.str() + ", not " +
                                        domain.name.str()});
    }
    std::map<Symbol, Symbol> objects;
    for (size_t i = 0; i < problem.objects.size(); ++i) {
        const auto& [obj, type] = problem.objects[i];
        SourceLoc loc = i < problem.object_locs.size() ? problem.object_locs[i] : problem.loc;
        if (!domain.types.contains(type)) out.push_back({loc, "unknown type " + type.str()});
        if (!objects.emplace(obj, type).second) out.push_back({loc, "duplicate object " + obj.str()});
    }
    auto check_atom = [&](const Atom& a, SourceLoc loc) {
        const PredicateDecl* decl = domain.predicate(a.predicate);
        if (decl == nullptr) {
            out.push_back({loc, "unknown predicate " + a.predicate.str()});
            return;
        }
        if (decl->args.size() != a.args.size()) {
            out.push_back({loc, a.predicate.str() + " takes " + std::to_string(decl->args.size()) + " arguments"});
            return;
        }
        for (size_t i = 0; i < a.args.size(); ++i) {
            Symbol expected = decl->args[i].type;
            Symbol arg = a.args[i];
            if (expected == number_type()) {
                if (!as_integer(arg)) out.push_back({loc, arg.str() + " is not a number"});
                continue;
            }
            auto it = objects.find(arg);
            if (it == objects.end()) {
                out.push_back({loc, "undeclared object " + arg.str()});
            } else if (!domain.types.is_subtype(it->second, expected)) {
                out.push_back({loc, arg.str() + " of type " + it->second.str() + " does not fit " + expected.str()});
            }
        }
    };
    std::map<std::pair<Symbol, std::vector<Symbol>>, Symbol> functional_values;
    for (size_t i = 0; i < problem.init.size(); ++i) {
        const Atom& a = problem.init[i];
        SourceLoc loc = i < problem.init_locs.size() ? problem.init_locs[i] : problem.loc;
        check_atom(a, loc);
        if (domain.is_functional(a.predicate) && !a.args.empty()) {
            std::vector<Symbol> key(a.args.begin(), a.args.end() - 1);
            auto [it, inserted] = functional_values.emplace(std::make_pair(a.predicate, key), a.args.back());
            if (!inserted && it->second != a.args.back()) {
                out.push_back({loc, "functional conflict: " + a.str() + " contradicts value " + it->second.str()});
            }
        }
    }
    for (size_t i = 0; i < problem.goal.size(); ++i) {
        check_atom(problem.goal[i].atom, i < problem.goal_locs.size() ? problem.goal_locs[i] : problem.loc);
    }
    // Constants used inside schemas must be declared objects.
    for (const auto* list : {&domain.operators, &domain.events}) {
        for (const auto& s : *list) {
            auto check_lit = [&](const Literal& l) {
                for (const auto& t : l.args) {
                    if (t.kind == Term::Kind::Constant && !objects.count(t.name)) {
                        out.push_back({l.loc, "schema " + s->name.str() + " uses undeclared constant " +
                                                  t.name.str()});
                    }
                }
            };
            for (const auto& l : s->pre) check_lit(l);
            for (const auto* e : {&s->plain, &s->initial, &s->final_}) {
                for (const auto* fx : {&e->adds, &e->dels}) {
                    for (const auto& x : *fx) {
                        check_lit(x.atom);
                        for (const auto& w : x.when) check_lit(w);
                    }
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string typed_list(const std::vector<Param>& ps) {
    std::string s;
    for (size_t i = 0; i < ps.size(); ++i) {
        if (i) s += " ";
        s += ps[i].var.str();
        if (i + 1 == ps.size() || ps[i + 1].type != ps[i].type) s += " - " + ps[i].type.str();
    }
    return s;
}

std::string formula_str(const std::vector<Literal>& f) {
    std::string s = "(and";
    for (const auto& l : f) s += " " + l.str();
    return s + ")";
}

std::string effects_str(const std::vector<Effect>& effects) {
    std::string s = "(";
    for (size_t i = 0; i < effects.size(); ++i) {
        const auto& e = effects[i];
        if (i) s += " ";
        if (e.forall.empty()) {
            s += e.atom.str();
        } else if (e.when.empty()) {
            s += "(forall (" + typed_list(e.forall) + ") " + e.atom.str() + ")";
        } else {
            s += "(forall (" + typed_list(e.forall) + ") (when " + formula_str(e.when) + " " + e.atom.str() + "))";
        }
    }
    return s + ")";
}

std::string schema_str(const Schema& s) {
    std::ostringstream os;
    os << "  (" << (s.is_event() ? ":event " : ":operator ") << s.name.str() << "\n";
    os << "    :params (" << typed_list(s.params) << ")\n";
    os << "    :duration " << s.duration << "\n";
    if (s.is_event()) os << "    :probability " << s.probability << "\n";
    os << "    :pre " << formula_str(s.pre);
    auto emit = [&](const char* key, const std::vector<Effect>& e) {
        if (!e.empty()) os << "\n    " << key << " " << effects_str(e);
    };
    emit(":del", s.plain.dels);
    emit(":add", s.plain.adds);
    emit(":initial-del", s.initial.dels);
    emit(":initial-add", s.initial.adds);
    emit(":final-del", s.final_.dels);
    emit(":final-add", s.final_.adds);
    os << ")\n";
    return os.str();
}

}  // namespace

std::string serialize_domain(const Domain& d) {
    std::ostringstream os;
    os.precision(17);
    os << "(domain " << d.name.str() << "\n  (:types";
    for (const auto& [t, parents] : d.types.parents()) {
        if (t == object_type() || t == number_type()) continue;
        os << " (" << t.str();
        for (Symbol p : parents) os << " " << p.str();
        os << ")";
    }
    os << ")\n  (:predicates";
    for (const auto& [name, decl] : d.predicates) {
        os << " (" << name.str();
        if (!decl.args.empty()) os << " " << typed_list(decl.args);
        os << ")";
    }
    os << ")\n  (:functional";
    for (const auto& [name, decl] : d.predicates) {
        if (decl.functional) os << " " << name.str();
    }
    os << ")\n  (:numeric-floor " << d.numeric_floor << ")\n";
    for (const auto& s : d.operators) os << schema_str(*s);
    for (const auto& s : d.events) {
        std::ostringstream es;
        es.precision(17);
        es << schema_str(*s);
        os << es.str();
    }
    os << ")\n";
    return os.str();
}

std::string serialize_problem(const Problem& p) {
    std::ostringstream os;
    os << "(problem " << p.name.str() << "\n";
    if (p.domain_name.valid()) os << "  (:domain " << p.domain_name.str() << ")\n";
    os << "  (:objects";
    for (const auto& [obj, type] : p.objects) os << " " << obj.str() << " - " << type.str();
    os << ")\n  (:init";
    for (const auto& a : p.init) os << "\n    " << a.str();
    os << ")\n  (:goal (and";
    for (const auto& g : p.goal) os << " " << g.str();
    os << ")))\n";
    return os.str();
}

namespace {

void write_plan(std::ostringstream& os, const ConditionalPlan& plan, int indent) {
    std::string pad(static_cast<size_t>(indent), ' ');
    for (const auto& step : plan.steps) os << "\n" << pad << step.str();
    if (plan.branch) {
        const Branch& b = *plan.branch;
        os << "\n" << pad << "(branch " << (b.condition.empty() ? "(and)" : conjunction_str(b.condition));
        os << "\n" << pad << "  (then";
        write_plan(os, b.then_plan, indent + 4);
        os << ")\n" << pad << "  (else";
        write_plan(os, b.else_plan, indent + 4);
        os << "))";
    }
}

ConditionalPlan read_plan_items(const std::vector<SExpr>& items, size_t first, const Task& task) {
    ConditionalPlan plan;
    for (size_t i = first; i < items.size(); ++i) {
        const SExpr& e = expect_list(items[i], "plan step");
        if (e.has_head("branch")) {
            if (i + 1 != items.size()) throw SyntaxError(e.loc, "a branch must end its step list");
            if (e.items.size() != 4 || !e.items[2].has_head("then") || !e.items[3].has_head("else")) {
                throw SyntaxError(e.loc, "expected (branch condition (then ...) (else ...))");
            }
            Conjunction cond;
            for (const auto& l : parse_formula(e.items[1])) {
                Atom a{l.predicate, {}};
                for (const auto& t : l.args) {
                    if (t.kind == Term::Kind::Variable || t.kind == Term::Kind::Decrement) {
                        throw SyntaxError(l.loc, "branch conditions must be ground");
                    }
                    a.args.push_back(t.kind == Term::Kind::Integer ? Symbol(std::to_string(t.value)) : t.name);
                }
                if (task.domain().predicate(a.predicate) == nullptr) {
                    throw UnknownPredicate(l.loc.str() + ": unknown predicate " + a.predicate.str());
                }
                cond.push_back({std::move(a), l.positive});
            }
            return make_branch(std::move(plan.steps), std::move(cond), read_plan_items(e.items[2].items, 1, task),
                               read_plan_items(e.items[3].items, 1, task));
        }
        if (e.items.empty()) throw SyntaxError(e.loc, "empty step");
        Symbol name(expect_atom(e.items[0], "operator name"));
        SchemaPtr schema = task.domain().find_operator(name);
        if (!schema) throw UnknownOperator(e.loc.str() + ": unknown operator " + name.str());
        std::vector<Symbol> args;
        for (size_t k = 1; k < e.items.size(); ++k) args.emplace_back(expect_atom(e.items[k], "argument"));
        plan.steps.push_back(ground(task, schema, args));
    }
    return plan;
}

}  // namespace

std::string serialize_plan(const ConditionalPlan& plan) {
    std::ostringstream os;
    os << "(plan";
    write_plan(os, plan, 2);
    os << ")\n";
    return os.str();
}

ConditionalPlan parse_plan(std::string_view text, const Task& task) {
    const SExpr top = single_top(text, "plan");
    return read_plan_items(top.items, 1, task);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace evplan
