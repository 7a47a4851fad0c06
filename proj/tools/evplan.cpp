// evplan: plan, analyze, simulate and repair plans in domains with
// exogenous events.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "evplan/monte_carlo.hpp"
#include "evplan/parser.hpp"
#include "evplan/repair.hpp"

using namespace evplan;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kBelowThreshold = 1, kInputError = 2, kBudgetExhausted = 3 };

struct Inputs {
    std::string domain;
    std::string problem;
    std::string plan;  // optional plan file
};

/// Errors in a named input file carry the file name in front of the location.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Domain load_domain(const std::string& path) {
    std::string text = read_file(path);
    try {
        return parse_domain(text);
    } catch (const Error& e) {
        throw InputError(path + ":" + e.what());
    }
}

Problem load_problem(const std::string& path) {
    std::string text = read_file(path);
    try {
        return parse_problem(text);
    } catch (const Error& e) {
        throw InputError(path + ":" + e.what());
    }
}

Task load_task(const Inputs& in) {
    Domain d = load_domain(in.domain);
    Problem p = load_problem(in.problem);
    auto diags = validate(d, p);
    if (!diags.empty()) throw InputError(in.problem + ":" + diags.front().str());
    return Task(std::move(d), std::move(p));
}

ConditionalPlan load_plan(const Task& task, const Inputs& in) {
    if (in.plan.empty()) return make_linear(plan(task));
    try {
        return parse_plan(read_file(in.plan), task);
    } catch (const Error& e) {
        throw InputError(in.plan + ":" + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

unsigned default_threads() {
    if (const char* env = std::getenv("EVPLAN_THREADS")) {
        try {
            return static_cast<unsigned>(std::stoul(env));
        } catch (const std::exception&) {
        }
    }
    return 0;
}

json failure_json(const FailureMode& m, const BeliefNet& net) {
    return {{"step", m.step_name},
            {"step_index", m.step_index},
            {"violated", m.violated.str()},
            {"event", net.nodes[m.terminal].event->str()},
            {"probability", m.probability},
            {"chain_length", m.chain_length},
            {"first_tick", m.first_tick},
            {"end_tick", m.end_tick}};
}

json report_json(const RepairReport& r) {
    json log = json::array();
    for (const auto& a : r.log) {
        log.push_back({{"iteration", a.iteration},
                       {"failure", a.failure},
                       {"method", to_string(a.method)},
                       {"detail", a.detail},
                       {"accepted", a.accepted},
                       {"before", a.before},
                       {"after", a.after}});
    }
    return {{"termination", to_string(r.termination)},
            {"probability", r.probability},
            {"initial_plans", r.initial_plans},
            {"log", log},
            {"plan", serialize_plan(r.plan)}};
}

int cmd_validate(const Inputs& in) {
    Domain d = load_domain(in.domain);
    Problem p = load_problem(in.problem);
    auto diags = validate(d, p);
    for (const auto& diag : diags) std::cout << in.problem << ":" << diag.str() << "\n";
    if (!diags.empty()) return kInputError;
    std::cout << "ok: " << d.operators.size() << " operators, " << d.events.size() << " events\n";
    return kOk;
}

int cmd_plan(const Inputs& in, const std::string& out) {
    Task task = load_task(in);
    std::string text = serialize_plan(make_linear(plan(task)));
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    return kOk;
}

int cmd_analyze(const Inputs& in, int max_chain, double threshold, const std::string& dot, bool as_json) {
    Task task = load_task(in);
    ConditionalPlan plan = load_plan(task, in);
    PlanAnalysis a = analyze_plan(task, plan, max_chain);
    if (!dot.empty()) write_text(dot, export_dot(a.net));
    if (as_json) {
        json failures = json::array();
        for (const auto& m : a.failures) failures.push_back(failure_json(m, a.net));
        json outcomes = json::array();
        for (const auto& [o, p] : a.outcomes.outcomes) outcomes.push_back({{"outcome", o.key()}, {"probability", p}});
        json out{{"success", a.success},
                 {"threshold", threshold},
                 {"failures", failures},
                 {"outcomes", outcomes},
                 {"net",
                  {{"nodes", a.net.nodes.size()},
                   {"events", a.net.event_count()},
                   {"rounds", a.net.rounds},
                   {"fixpoint", a.net.fixpoint}}}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout.precision(10);
        std::cout << "success probability: " << a.success << "\n";
        std::cout << "net: " << a.net.nodes.size() << " nodes, " << a.net.event_count() << " event nodes, "
                  << a.net.rounds << " rounds" << (a.net.fixpoint ? " (fixpoint)" : "") << "\n";
        std::cout << "failures:\n";
        for (const auto& m : a.failures) std::cout << "  " << m.describe(a.net) << "\n";
        std::cout << "outcomes:\n";
        for (const auto& [o, p] : a.outcomes.outcomes) std::cout << "  " << p << "  " << o.key() << "\n";
    }
    return a.success >= threshold ? kOk : kBelowThreshold;
}

int cmd_simulate(const Inputs& in, size_t trials, uint64_t seed, int trace, const std::string& csv, size_t stride,
                 unsigned threads, bool as_json) {
    Task task = load_task(in);
    ConditionalPlan plan = load_plan(task, in);
    for (int i = 0; i < trace; ++i) {
        std::cout << "trial " << i << ":\n" << simulate_once(task, plan, trial_seed(seed, i)).text() << "\n";
    }
    if (!csv.empty()) write_text(csv, convergence_series(task, plan, trials, stride, seed, threads).csv());
    TrialStats s = run_trials(task, plan, trials, seed, threads);
    if (as_json) {
        json failures = json::object();
        for (const auto& [k, c] : s.failures) failures[k] = static_cast<double>(c) / s.trials;
        json out{{"trials", s.trials},
                 {"seed", seed},
                 {"success", s.success_rate()},
                 {"standard_error", s.standard_error(s.success_rate())},
                 {"failures", failures}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout.precision(10);
        std::cout << "trials: " << s.trials << "\n";
        std::cout << "success: " << s.success_rate() << " (se " << s.standard_error(s.success_rate()) << ")\n";
        for (const auto& [k, c] : s.failures) {
            std::cout << "  " << static_cast<double>(c) / s.trials << "  " << k << "\n";
        }
    }
    return kOk;
}

int cmd_solve(const Inputs& in, const SolveOptions& options, const std::string& out, const std::string& report,
              bool as_json) {
    Task task = load_task(in);
    RepairReport r = solve(task, options);
    if (!out.empty()) write_text(out, serialize_plan(r.plan));
    if (!report.empty()) write_text(report, report_json(r).dump(2) + "\n");
    if (as_json) {
        std::cout << report_json(r).dump(2) << "\n";
    } else {
        std::cout << r.str();
        if (out.empty()) std::cout << serialize_plan(r.plan);
    }
    switch (r.termination) {
        case Termination::ThresholdMet: return kOk;
        case Termination::BudgetExhausted: return kBudgetExhausted;
        case Termination::NoRepairImproves: return kBelowThreshold;
    }
    return kBelowThreshold;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Planning with exogenous events"};
    app.require_subcommand(1);

    Inputs in;
    auto add_inputs = [&in](CLI::App* cmd) {
        cmd->add_option("domain", in.domain, "Domain file (.evd)")->required();
        cmd->add_option("problem", in.problem, "Problem file (.evp)")->required();
    };

    auto* validate_cmd = app.add_subcommand("validate", "Check a domain and problem");
    add_inputs(validate_cmd);

    std::string plan_out;
    auto* plan_cmd = app.add_subcommand("plan", "Find an initial plan, ignoring events");
    add_inputs(plan_cmd);
    plan_cmd->add_option("-o,--output", plan_out, "Write the plan here instead of stdout");

    int max_chain = 3;
    double threshold = 0.9;
    std::string dot;
    bool as_json = false;
    auto* analyze_cmd = app.add_subcommand("analyze", "Success probability and failure modes of a plan");
    add_inputs(analyze_cmd);
    analyze_cmd->add_option("--plan", in.plan, "Plan file (.evplan); default: plan from scratch");
    analyze_cmd->add_option("--max-chain", max_chain, "Longest event chain considered")->capture_default_str();
    analyze_cmd->add_option("--threshold", threshold, "Exit 1 below this probability")->capture_default_str();
    analyze_cmd->add_option("--dot", dot, "Write the belief net as Graphviz");
    analyze_cmd->add_flag("--json", as_json, "Machine-readable output");

    size_t trials = 10000;
    uint64_t seed = 1;
    int trace = 0;
    std::string csv;
    size_t stride = 100;
    unsigned threads = default_threads();
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo execution");
    add_inputs(simulate_cmd);
    simulate_cmd->add_option("--plan", in.plan, "Plan file (.evplan); default: plan from scratch");
    simulate_cmd->add_option("--trials", trials, "Number of trials")->capture_default_str()->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    simulate_cmd->add_option("--trace", trace, "Print the traces of the first N trials")
        ->expected(0, 1)
        ->default_str("1");
    simulate_cmd->add_option("--csv", csv, "Write convergence rows here");
    simulate_cmd->add_option("--stride", stride, "Trials between convergence rows")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--threads", threads, "Worker threads (0: all cores; env EVPLAN_THREADS)");
    simulate_cmd->add_flag("--json", as_json, "Machine-readable output");

    SolveOptions options;
    std::string report;
    auto* solve_cmd = app.add_subcommand("solve", "Plan, then repair until the threshold is met");
    add_inputs(solve_cmd);
    solve_cmd->add_option("--threshold", options.threshold, "Required success probability")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    solve_cmd->add_option("--budget", options.budget, "Repair attempts allowed")->capture_default_str();
    solve_cmd->add_option("--max-chain", options.max_chain, "Longest event chain considered")->capture_default_str();
    solve_cmd->add_option("-o,--output", plan_out, "Write the final plan here");
    solve_cmd->add_option("--report", report, "Write the repair report (JSON) here");
    solve_cmd->add_flag("--json", as_json, "Machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kInputError;
    }

    try {
        if (*validate_cmd) return cmd_validate(in);
        if (*plan_cmd) return cmd_plan(in, plan_out);
        if (*analyze_cmd) return cmd_analyze(in, max_chain, threshold, dot, as_json);
        if (*simulate_cmd) return cmd_simulate(in, trials, seed, trace, csv, stride, threads, as_json);
        if (*solve_cmd) return cmd_solve(in, options, plan_out, report, as_json);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const NoPlanFound& e) {
        std::cerr << "no plan: " << e.what() << "\n";
        return kBelowThreshold;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
