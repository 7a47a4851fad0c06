#pragma once

// Random micro-domains: one robot, two places, a charge that drains and a
// position that drifts. Three objects, two event schemas, at most five steps
// and six ticks.

#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "evplan/parser.hpp"

namespace micro {

struct Instance {
    evplan::Task task;
    std::vector<evplan::GroundAction> path;
    std::string domain;
};

inline std::string domain_text(std::mt19937& rng) {
    std::uniform_int_distribution<int> move_d(0, 2);
    std::uniform_int_distribution<int> charge_d(1, 2);
    std::uniform_real_distribution<double> prob(0.05, 0.5);
    bool needs_charge = std::bernoulli_distribution(0.5)(rng);
    int md = move_d(rng);
    std::ostringstream d;
    d << "(domain micro\n"
         "  (:types (place object) (robot object))\n"
         "  (:predicates (at ?r - robot ?p - place) (charged ?r - robot) (link ?a ?b - place))\n"
         "  (:functional at)\n";
    d << "  (:operator move :params (?r - robot ?from ?to - place) :duration " << md
      << " :pre (and (link ?from ?to) (at ?r ?from)" << (needs_charge ? " (charged ?r)" : "") << ")";
    if (md == 0) {
        d << " :del ((at ?r ?from)) :add ((at ?r ?to)))\n";
    } else {
        d << " :final-del ((at ?r ?from)) :final-add ((at ?r ?to)))\n";
    }
    d << "  (:operator charge :params (?r - robot ?p - place) :duration " << charge_d(rng)
      << " :pre (and (at ?r ?p)) :final-add ((charged ?r)))\n";
    d << "  (:event drift :params (?r - robot ?from ?to - place) :duration 0 :probability " << prob(rng)
      << " :pre (and (link ?from ?to) (at ?r ?from)) :del ((at ?r ?from)) :add ((at ?r ?to)))\n";
    d << "  (:event drain :params (?r - robot) :duration 0 :probability " << prob(rng)
      << " :pre (and (charged ?r)) :del ((charged ?r))))\n";
    return d.str();
}

inline std::string problem_text(bool charged) {
    return std::string("(problem micro-task (:domain micro) (:objects r1 - robot p0 p1 - place)"
                       " (:init (at r1 p0) (link p0 p1) (link p1 p0)") +
           (charged ? " (charged r1)" : "") + ") (:goal (at r1 p0)))";
}

/// Event-free random walk; the goal becomes the state it reaches.
inline std::optional<Instance> generate(std::mt19937& rng) {
    std::string dom = domain_text(rng);
    bool charged = std::bernoulli_distribution(0.5)(rng);
    evplan::Domain d = evplan::parse_domain(dom);
    evplan::Problem p = evplan::parse_problem(problem_text(charged));
    evplan::Task probe(d, p);
    evplan::State s = probe.initial_state();
    std::vector<evplan::GroundAction> path;
    int ticks = 0;
    int len = std::uniform_int_distribution<int>(1, 5)(rng);
    for (int k = 0; k < len; ++k) {
        std::vector<evplan::GroundAction> ok;
        for (const auto& g : probe.ground_operators()) {
            if (evplan::applicable(probe, s, g) && ticks + g.duration() <= 6) ok.push_back(g);
        }
        if (ok.empty()) break;
        auto g = ok[std::uniform_int_distribution<size_t>(0, ok.size() - 1)(rng)];
        ticks += g.duration();
        s = evplan::apply_atomic(probe, s, g);
        path.push_back(g);
    }
    if (path.empty()) return std::nullopt;
    p.goal.clear();
    for (const auto& f : s.facts()) {
        if (f.predicate.str() != "link") p.goal.push_back({f, true});
    }
    evplan::Task task(d, p);
    return Instance{std::move(task), std::move(path), std::move(dom)};
}

}  // namespace micro
