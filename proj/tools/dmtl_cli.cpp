#include "dmtl/analysis.hpp"
#include "dmtl/automata.hpp"
#include "dmtl/engine.hpp"
#include "dmtl/materialise.hpp"
#include "dmtl/parser.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

// Verdicts map to exit codes so scripts can branch without scraping stdout:
// 0 not entailed / consistent, 1 entailed / inconsistent, 2 usage or parse
// error, 3 indecisive within the configured budget.
constexpr int kExitNegative = 0;
constexpr int kExitPositive = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIndecisive = 3;

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

dmtl::MatMode toMatMode(const std::string& mode) {
    if (mode == "naive") return dmtl::MatMode::Naive;
    if (mode == "seminaive") return dmtl::MatMode::Seminaive;
    return dmtl::MatMode::Optimised;
}

struct LoadedInstance {
    dmtl::Program program;
    dmtl::Dataset dataset;
};

LoadedInstance load(dmtl::Parser& parser, const std::string& programPath,
                    const std::string& datasetPath) {
    LoadedInstance li;
    li.program = parser.parseProgram(readFile(programPath), programPath);
    if (!datasetPath.empty())
        li.dataset = parser.parseDataset(readFile(datasetPath), datasetPath);
    return li;
}

int runDecide(dmtl::SymbolTable& syms, dmtl::Parser& parser, const std::string& programPath,
              const std::string& datasetPath, const std::string& factText,
              const std::string& mode, std::size_t maxSteps, std::size_t budgetStates,
              std::optional<double> budgetSeconds, int threads) {
    LoadedInstance li = load(parser, programPath, datasetPath);
    dmtl::Fact query = parser.parseFact(factText);

    if (mode == "naive" || mode == "seminaive" || mode == "optimised") {
        dmtl::MatOptions mo;
        mo.mode = toMatMode(mode);
        mo.maxSteps = maxSteps;
        mo.query = &query;
        dmtl::MatResult r = dmtl::materialise(li.program, li.dataset, mo);
        switch (r.outcome) {
            case dmtl::MatOutcome::Entailed:
                std::cout << "entailed (materialisation, " << r.steps << " steps)\n";
                return kExitPositive;
            case dmtl::MatOutcome::Inconsistent:
                std::cout << "inconsistent (materialisation, " << r.steps << " steps)\n";
                return kExitPositive;
            case dmtl::MatOutcome::Fixpoint:
                std::cout << "not entailed (fixpoint after " << r.steps << " steps)\n";
                return kExitNegative;
            default:
                std::cout << "indecisive (step limit " << maxSteps << " reached)\n";
                return kExitIndecisive;
        }
    }

    if (mode == "automata") {
        dmtl::AutomataOptions ao;
        ao.maxStates = budgetStates;
        try {
            switch (dmtl::checkConsistency(li.program, li.dataset, syms, ao)) {
                case dmtl::ConsistencyVerdict::Inconsistent:
                    std::cout << "inconsistent (automata)\n";
                    return kExitPositive;
                case dmtl::ConsistencyVerdict::BudgetExceeded:
                    std::cout << "indecisive (state budget exhausted)\n";
                    return kExitIndecisive;
                case dmtl::ConsistencyVerdict::Consistent: break;
            }
            dmtl::Reduction red =
                dmtl::reduceEntailmentToInconsistency(li.program, li.dataset, query, syms);
            switch (dmtl::checkConsistency(red.program, red.dataset, syms, ao)) {
                case dmtl::ConsistencyVerdict::Inconsistent:
                    std::cout << "entailed (automata)\n";
                    return kExitPositive;
                case dmtl::ConsistencyVerdict::Consistent:
                    std::cout << "not entailed (automata)\n";
                    return kExitNegative;
                case dmtl::ConsistencyVerdict::BudgetExceeded:
                    std::cout << "indecisive (state budget exhausted)\n";
                    return kExitIndecisive;
            }
        } catch (const std::invalid_argument& e) {
            std::cout << "indecisive (" << e.what() << ")\n";
            return kExitIndecisive;
        }
        return kExitIndecisive;
    }

    // auto: bounded optimised run, then the materialisation/automata race.
    dmtl::DecideOptions opts;
    opts.maxSteps = maxSteps;
    opts.budgetStates = budgetStates;
    opts.budgetSeconds = budgetSeconds;
    opts.singleThread = threads <= 1;
    dmtl::DecideResult r = dmtl::decide(li.program, li.dataset, query, syms, opts);
    const char* via = r.provenance == dmtl::DecideProvenance::PreMaterialisation
                          ? "bounded materialisation"
                          : (r.provenance == dmtl::DecideProvenance::MaterialisationThread
                                 ? "materialisation arm"
                                 : "automata arm");
    switch (r.outcome) {
        case dmtl::DecideOutcome::Entailed:
            std::cout << "entailed (" << via << ")\n";
            return kExitPositive;
        case dmtl::DecideOutcome::Inconsistent:
            std::cout << "inconsistent (" << via << ")\n";
            return kExitPositive;
        case dmtl::DecideOutcome::NotEntailed:
            std::cout << "not entailed (" << via << ")\n";
            return kExitNegative;
        case dmtl::DecideOutcome::BudgetExceeded:
            std::cout << "indecisive (budget exhausted)\n";
            return kExitIndecisive;
    }
    return kExitIndecisive;
}

int runMaterialise(dmtl::SymbolTable& syms, dmtl::Parser& parser, const std::string& programPath,
                   const std::string& datasetPath, const std::string& mode, std::size_t maxSteps,
                   bool dump, bool disableDrops) {
    LoadedInstance li = load(parser, programPath, datasetPath);
    dmtl::MatOptions mo;
    mo.mode = toMatMode(mode);
    mo.maxSteps = maxSteps;
    mo.disableRuleDrops = disableDrops;
    dmtl::MatResult r = dmtl::materialise(li.program, li.dataset, mo);
    switch (r.outcome) {
        case dmtl::MatOutcome::Fixpoint:
            std::cerr << "fixpoint after " << r.steps << " steps, " << r.store.atomCount()
                      << " atoms, " << r.store.intervalCount() << " intervals\n";
            break;
        case dmtl::MatOutcome::Inconsistent:
            std::cerr << "inconsistent at step " << r.steps << "\n";
            break;
        default:
            std::cerr << "stopped at step limit " << maxSteps << "\n";
            break;
    }
    if (dump) std::cout << r.store.dump(syms);
    if (r.outcome == dmtl::MatOutcome::Inconsistent) return kExitPositive;
    return r.outcome == dmtl::MatOutcome::Fixpoint ? kExitNegative : kExitIndecisive;
}

int runConsistency(dmtl::SymbolTable& syms, dmtl::Parser& parser, const std::string& programPath,
                   const std::string& datasetPath, const std::string& method,
                   std::size_t budgetStates, std::size_t maxSteps) {
    LoadedInstance li = load(parser, programPath, datasetPath);
    if (method == "materialisation") {
        dmtl::MatOptions mo;
        mo.maxSteps = maxSteps;
        dmtl::MatResult r = dmtl::materialise(li.program, li.dataset, mo);
        switch (r.outcome) {
            case dmtl::MatOutcome::Inconsistent:
                std::cout << "inconsistent\n";
                return kExitPositive;
            case dmtl::MatOutcome::Fixpoint:
                std::cout << "consistent\n";
                return kExitNegative;
            default:
                std::cout << "indecisive (step limit reached)\n";
                return kExitIndecisive;
        }
    }
    dmtl::AutomataOptions ao;
    ao.maxStates = budgetStates;
    dmtl::AutomataStats stats;
    try {
        switch (dmtl::checkConsistency(li.program, li.dataset, syms, ao, &stats)) {
            case dmtl::ConsistencyVerdict::Inconsistent:
                std::cout << "inconsistent (" << stats.statesVisited << " states)\n";
                return kExitPositive;
            case dmtl::ConsistencyVerdict::Consistent:
                std::cout << "consistent (" << stats.statesVisited << " states)\n";
                return kExitNegative;
            case dmtl::ConsistencyVerdict::BudgetExceeded:
                std::cout << "indecisive (state budget exhausted)\n";
                return kExitIndecisive;
        }
    } catch (const std::invalid_argument& e) {
        std::cout << "indecisive (" << e.what() << ")\n";
        return kExitIndecisive;
    }
    return kExitIndecisive;
}

int runAnalyze(dmtl::SymbolTable& syms, dmtl::Parser& parser, const std::string& programPath,
               bool dot) {
    dmtl::Program program = parser.parseProgram(readFile(programPath), programPath);
    dmtl::DependencyGraph graph(program);
    dmtl::PredicateClassification cls = dmtl::classifyPredicates(program);

    if (dot) {
        std::cout << "digraph dependencies {\n";
        for (dmtl::SymbolId p : graph.predicates()) {
            std::cout << "  \"" << syms.name(p) << "\"";
            if (cls.isRecursive(p)) std::cout << " [style=bold]";
            std::cout << ";\n";
        }
        for (dmtl::SymbolId p : graph.predicates())
            for (dmtl::SymbolId q : graph.successors(p))
                std::cout << "  \"" << syms.name(p) << "\" -> \"" << syms.name(q) << "\";\n";
        std::cout << "}\n";
        return 0;
    }

    std::cout << "rules: " << program.rules.size() << "\n";
    std::cout << "predicates:";
    for (dmtl::SymbolId p : graph.predicates()) std::cout << " " << syms.name(p);
    std::cout << "\nrecursive:";
    for (dmtl::SymbolId p : cls.recursive) std::cout << " " << syms.name(p);
    std::cout << "\n";
    switch (dmtl::propagationClass(program.rules)) {
        case dmtl::Propagation::Forward: std::cout << "propagation: forward\n"; break;
        case dmtl::Propagation::Backward: std::cout << "propagation: backward\n"; break;
        case dmtl::Propagation::Mixed: std::cout << "propagation: mixed\n"; break;
    }
    for (std::size_t i = 0; i < program.rules.size(); ++i) {
        const dmtl::Rule& r = program.rules[i];
        std::cout << "rule " << i << ": "
                  << (r.isBottomRule() ? "constraint" : syms.name(r.headRel()->pred)) << " ["
                  << (dmtl::ruleForwardCompatible(r) ? "forward" : "-") << "/"
                  << (dmtl::ruleBackwardCompatible(r) ? "backward" : "-") << "]\n";
    }
    return 0;
}

int runBench(dmtl::Parser& parser, const std::string& programPath, const std::string& datasetPath,
             const std::string& mode, std::size_t maxSteps) {
    LoadedInstance li = load(parser, programPath, datasetPath);
    dmtl::MatOptions mo;
    mo.mode = toMatMode(mode);
    mo.maxSteps = maxSteps;
    mo.trace = [](const dmtl::StepTrace& t) {
        nlohmann::json line{{"step", t.step},
                            {"instances", t.instanceCount},
                            {"inserted", t.insertedPieces},
                            {"seconds", t.seconds}};
        std::cout << line.dump() << "\n";
    };
    dmtl::MatResult r = dmtl::materialise(li.program, li.dataset, mo);
    nlohmann::json total{{"outcome", r.outcome == dmtl::MatOutcome::Fixpoint ? "fixpoint"
                          : r.outcome == dmtl::MatOutcome::Inconsistent     ? "inconsistent"
                                                                            : "step-limit"},
                         {"steps", r.steps},
                         {"atoms", r.store.atomCount()},
                         {"intervals", r.store.intervalCount()}};
    std::cout << total.dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dmtl: reasoning over temporal datalog with metric operators"};
    app.require_subcommand(1);

    std::string programPath, datasetPath, factText;
    std::string mode = "auto";
    std::string method = "automata";
    std::size_t maxSteps = 1000;
    std::size_t budgetStates = 100000;
    double budgetSeconds = 0.0;
    bool haveBudgetSeconds = false;
    int threads = 2;
    bool dump = false, disableDrops = false, dot = false;

    CLI::App* decide = app.add_subcommand("decide", "decide whether a fact is entailed");
    decide->add_option("--program", programPath, "program file")->required();
    decide->add_option("--dataset", datasetPath, "dataset file");
    decide->add_option("--fact", factText, "query fact, e.g. 'R1(c1,c2)@[4,4]'")->required();
    decide->add_option("--mode", mode, "auto|naive|seminaive|optimised|automata")
        ->check(CLI::IsMember({"auto", "naive", "seminaive", "optimised", "automata"}));
    decide->add_option("--max-steps", maxSteps, "materialisation step bound");
    decide->add_option("--budget-states", budgetStates, "automata state budget");
    decide->add_option("--budget-seconds", budgetSeconds, "wall-clock budget for the race")
        ->each([&](const std::string&) { haveBudgetSeconds = true; });
    decide->add_option("--threads", threads, "1 = sequential, 2 = race arms in parallel")
        ->check(CLI::Range(1, 2));

    CLI::App* mat = app.add_subcommand("materialise", "run materialisation to fixpoint");
    mat->add_option("--program", programPath, "program file")->required();
    mat->add_option("--dataset", datasetPath, "dataset file");
    mat->add_option("--mode", mode, "naive|seminaive|optimised")
        ->check(CLI::IsMember({"naive", "seminaive", "optimised", "auto"}));
    mat->add_option("--max-steps", maxSteps, "step bound");
    mat->add_flag("--dump", dump, "print the final store, one atom per line");
    mat->add_flag("--disable-drops", disableDrops, "keep every rule active in optimised mode");

    CLI::App* cons = app.add_subcommand("consistency", "check satisfiability");
    cons->add_option("--program", programPath, "program file")->required();
    cons->add_option("--dataset", datasetPath, "dataset file");
    cons->add_option("--method", method, "automata|materialisation")
        ->check(CLI::IsMember({"automata", "materialisation"}));
    cons->add_option("--budget-states", budgetStates, "automata state budget");
    cons->add_option("--max-steps", maxSteps, "step bound for the materialisation method");

    CLI::App* ana = app.add_subcommand("analyze", "print program structure");
    ana->add_option("--program", programPath, "program file")->required();
    ana->add_flag("--dot", dot, "emit the predicate dependency graph as DOT");

    CLI::App* bench = app.add_subcommand("bench", "materialise and emit per-step JSON lines");
    bench->add_option("--program", programPath, "program file")->required();
    bench->add_option("--dataset", datasetPath, "dataset file");
    bench->add_option("--mode", mode, "naive|seminaive|optimised");
    bench->add_option("--max-steps", maxSteps, "step bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    dmtl::SymbolTable syms;
    dmtl::Parser parser(syms);
    try {
        if (decide->parsed())
            return runDecide(syms, parser, programPath, datasetPath, factText,
                             mode == "auto" && decide->count("--mode") == 0 ? "auto" : mode,
                             maxSteps, budgetStates,
                             haveBudgetSeconds ? std::optional<double>(budgetSeconds)
                                               : std::nullopt,
                             threads);
        if (mat->parsed())
            return runMaterialise(syms, parser, programPath, datasetPath,
                                  mode == "auto" ? "optimised" : mode, maxSteps, dump,
                                  disableDrops);
        if (cons->parsed())
            return runConsistency(syms, parser, programPath, datasetPath, method, budgetStates,
                                  maxSteps);
        if (ana->parsed()) return runAnalyze(syms, parser, programPath, dot);
        if (bench->parsed())
            return runBench(parser, programPath, datasetPath, mode == "auto" ? "optimised" : mode,
                            maxSteps);
    } catch (const dmtl::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
