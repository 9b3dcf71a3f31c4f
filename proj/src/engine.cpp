#include "dmtl/engine.hpp"

#include "dmtl/analysis.hpp"
#include "dmtl/automata.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <limits>
#include <mutex>
#include <set>
#include <stdexcept>
#include <stop_token>
#include <thread>
#include <utility>

namespace dmtl {

namespace {

std::atomic<int> g_activeTasks{0};

struct TaskGuard {
    TaskGuard() { g_activeTasks.fetch_add(1, std::memory_order_relaxed); }
    ~TaskGuard() { g_activeTasks.fetch_sub(1, std::memory_order_relaxed); }
};

struct Restricted {
    Program program;
    Dataset dataset;
};

Restricted restrictToQuery(const Program& program, const Dataset& dataset, const Fact& query) {
    Restricted out;
    for (std::size_t idx : relevantRules(program, query.atom.pred))
        out.program.rules.push_back(program.rules[idx]);
    std::set<SymbolId> preds{query.atom.pred};
    for (const Rule& r : out.program.rules) {
        collectPredicates(*r.head, preds);
        for (const AtomPtr& b : r.body) collectPredicates(*b, preds);
    }
    for (const Fact& f : dataset.facts)
        if (preds.count(f.atom.pred)) out.dataset.facts.push_back(f);
    return out;
}

DecideOutcome fromMatOutcome(MatOutcome o) {
    switch (o) {
        case MatOutcome::Entailed: return DecideOutcome::Entailed;
        case MatOutcome::Inconsistent: return DecideOutcome::Inconsistent;
        case MatOutcome::Fixpoint: return DecideOutcome::NotEntailed;
        default: return DecideOutcome::BudgetExceeded;
    }
}

// Automata arm: the residue must be consistent on its own (otherwise the
// instance is inconsistent and entails everything), and the query holds iff
// adding the query-violation constraint makes it inconsistent.
// Returns false when indecisive (budget, or an unsupported construct).
bool automataVerdict(const Program& residual, const Dataset& data, const Program& reducedProgram,
                     const Dataset& reducedData, bool haveReduction, const SymbolTable& syms,
                     const AutomataOptions& opts, DecideOutcome& out) {
    try {
        switch (checkConsistency(residual, data, syms, opts)) {
            case ConsistencyVerdict::Inconsistent: out = DecideOutcome::Inconsistent; return true;
            case ConsistencyVerdict::BudgetExceeded: return false;
            case ConsistencyVerdict::Consistent: break;
        }
        if (!haveReduction) return false;
        switch (checkConsistency(reducedProgram, reducedData, syms, opts)) {
            case ConsistencyVerdict::Inconsistent: out = DecideOutcome::Entailed; return true;
            case ConsistencyVerdict::Consistent: out = DecideOutcome::NotEntailed; return true;
            case ConsistencyVerdict::BudgetExceeded: return false;
        }
    } catch (const std::invalid_argument&) {
        // A construct outside the automata fragment: leave the verdict to the
        // materialisation arm.
        return false;
    }
    return false;
}

} // namespace

int engineActiveTasks() { return g_activeTasks.load(std::memory_order_relaxed); }

DecideResult decide(const Program& program, const Dataset& dataset, const Fact& query,
                    SymbolTable& syms, const DecideOptions& options) {
    Restricted sub = restrictToQuery(program, dataset, query);

    MatOptions preOpts;
    preOpts.mode = MatMode::Optimised;
    preOpts.maxSteps = options.maxSteps;
    preOpts.query = &query;
    HaltResult halt = materialiseHalt(sub.program, sub.dataset, preOpts);

    DecideResult res;
    res.steps = halt.steps;
    if (halt.kind == HaltResult::Kind::Verdict) {
        res.outcome = fromMatOutcome(halt.verdict);
        res.provenance = DecideProvenance::PreMaterialisation;
        res.partialStore = std::move(halt.store);
        return res;
    }

    // Race phase. Halted: the recursive residue continues from the pre-flip
    // store. StepLimit: no usable residue, race the restricted input itself.
    const bool halted = halt.kind == HaltResult::Kind::Halted;
    Program raceProgram = halted ? std::move(halt.residualProgram) : sub.program;
    Dataset raceData = halted ? halt.store.toDataset() : sub.dataset;
    std::size_t baseSteps = halted ? halt.steps : 0;

    // Symbol interning is not thread-safe: build the reduction up front.
    Program reducedProgram;
    Dataset reducedData;
    bool haveReduction = false;
    try {
        Reduction red = reduceEntailmentToInconsistency(raceProgram, raceData, query, syms);
        reducedProgram = std::move(red.program);
        reducedData = std::move(red.dataset);
        haveReduction = true;
    } catch (const std::invalid_argument&) {
        haveReduction = false;
    }

    struct Shared {
        std::mutex mu;
        std::condition_variable cv;
        bool done = false;
        int finished = 0;
        DecideOutcome outcome = DecideOutcome::BudgetExceeded;
        DecideProvenance prov = DecideProvenance::MaterialisationThread;
        std::size_t matSteps = 0;
        bool matCancelled = false;
        std::optional<FactStore> store;
    } sh;
    std::stop_source stop;

    auto report = [&](DecideOutcome o, DecideProvenance p, std::optional<FactStore> st) {
        bool won = false;
        {
            std::lock_guard<std::mutex> g(sh.mu);
            if (!sh.done) {
                sh.done = true;
                sh.outcome = o;
                sh.prov = p;
                if (st) sh.store = std::move(st);
                won = true;
            }
        }
        if (won) {
            stop.request_stop();
            sh.cv.notify_all();
        }
    };
    auto finishArm = [&] {
        {
            std::lock_guard<std::mutex> g(sh.mu);
            sh.finished++;
        }
        sh.cv.notify_all();
    };

    auto matArm = [&](std::stop_token tok) {
        TaskGuard guard;
        MatOptions mo;
        mo.mode = MatMode::Optimised;
        mo.maxSteps = std::numeric_limits<std::size_t>::max();
        mo.query = &query;
        mo.cancelled = [&tok] { return tok.stop_requested(); };
        MatResult mr = materialise(raceProgram, raceData, mo);
        {
            std::lock_guard<std::mutex> g(sh.mu);
            sh.matSteps = mr.steps;
            sh.matCancelled = mr.outcome == MatOutcome::Cancelled;
        }
        if (mr.outcome != MatOutcome::Cancelled && mr.outcome != MatOutcome::StepLimit)
            report(fromMatOutcome(mr.outcome), DecideProvenance::MaterialisationThread,
                   std::move(mr.store));
        finishArm();
    };
    auto autArm = [&](std::stop_token tok) {
        TaskGuard guard;
        AutomataOptions ao;
        ao.maxStates = options.budgetStates;
        ao.cancelled = [&tok] { return tok.stop_requested(); };
        DecideOutcome out;
        if (automataVerdict(raceProgram, raceData, reducedProgram, reducedData, haveReduction,
                            syms, ao, out))
            report(out, DecideProvenance::AutomataThread, std::nullopt);
        finishArm();
    };

    if (options.singleThread) {
        AutomataOptions ao;
        ao.maxStates = options.budgetStates;
        DecideOutcome out;
        if (automataVerdict(raceProgram, raceData, reducedProgram, reducedData, haveReduction,
                            syms, ao, out)) {
            res.outcome = out;
            res.provenance = DecideProvenance::AutomataThread;
            return res;
        }
        MatOptions mo;
        mo.mode = MatMode::Optimised;
        mo.maxSteps = options.maxSteps;
        mo.query = &query;
        MatResult mr = materialise(raceProgram, raceData, mo);
        res.steps = baseSteps + mr.steps;
        if (mr.outcome == MatOutcome::StepLimit) {
            res.outcome = DecideOutcome::BudgetExceeded;
            res.partialStore = std::move(mr.store);
        } else {
            res.outcome = fromMatOutcome(mr.outcome);
            res.provenance = DecideProvenance::MaterialisationThread;
            res.partialStore = std::move(mr.store);
        }
        return res;
    }

    {
        std::jthread mat(matArm, stop.get_token());
        std::jthread aut(autArm, stop.get_token());
        std::unique_lock<std::mutex> lk(sh.mu);
        auto decided = [&] { return sh.done || sh.finished == 2; };
        if (options.budgetSeconds) {
            if (!sh.cv.wait_for(lk, std::chrono::duration<double>(*options.budgetSeconds),
                                decided)) {
                lk.unlock();
                stop.request_stop();
                lk.lock();
            }
        }
        sh.cv.wait(lk, decided);
        if (sh.done) {
            // A verdict arrived; stop the loser and let both arms wind down so
            // their bookkeeping below is final.
            lk.unlock();
            stop.request_stop();
            lk.lock();
        }
        sh.cv.wait(lk, [&] { return sh.finished == 2; });
    } // jthreads join here

    res.outcome = sh.done ? sh.outcome : DecideOutcome::BudgetExceeded;
    res.provenance = sh.prov;
    res.steps = baseSteps + sh.matSteps;
    res.materialisationCancelled = sh.matCancelled;
    if (sh.store)
        res.partialStore = std::move(sh.store);
    else if (res.outcome == DecideOutcome::BudgetExceeded && halted)
        res.partialStore = std::move(halt.store);
    return res;
}

} // namespace dmtl
