#include "dmtl/materialise.hpp"

#include "dmtl/analysis.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>

namespace dmtl {

std::set<SymbolId> constantUniverse(const Program& program, const FactStore& store) {
    std::set<SymbolId> universe = store.constants();
    auto collect = [&](const MetricAtom& atom) {
        forEachRelLeaf(atom, [&](const RelAtom& r) {
            for (const Term& t : r.args) {
                if (!t.isVar) universe.insert(t.sym);
            }
        });
    };
    for (const Rule& rule : program.rules) {
        collect(*rule.head);
        for (const AtomPtr& atom : rule.body) collect(*atom);
    }
    return universe;
}

bool checkBottomRules(const Program& program, const FactStore& store,
                      const std::set<SymbolId>& universe) {
    for (const Rule& rule : program.rules) {
        if (!rule.isBottomRule()) continue;
        if (!instances(store, rule, universe).empty()) return true;
    }
    return false;
}

namespace {

struct Runner {
    const Program& program;
    const MatOptions& opts;
    bool haltAtFlip = false;

    FactStore store;
    std::set<SymbolId> universe;
    PredicateClassification cls;
    std::vector<bool> activeRule; // derivation rules still active (bottom-rules excluded)

    MatResult result;
    HaltResult halt;

    explicit Runner(const Program& p, const Dataset& d, const MatOptions& o, bool haltVariant)
        : program(p), opts(o), haltAtFlip(haltVariant), store(FactStore::fromDataset(d)) {
        universe = constantUniverse(program, store);
        cls = classifyPredicates(program);
        activeRule.assign(program.rules.size(), true);
        for (std::size_t i = 0; i < program.rules.size(); ++i) {
            if (program.rules[i].isBottomRule()) activeRule[i] = false;
        }
    }

    bool optimising() const { return opts.mode == MatMode::Optimised && !opts.disableRuleDrops; }

    void drop(std::size_t ruleIndex, std::size_t step, DropEvent::Reason reason,
              std::optional<TimePoint> bound = std::nullopt) {
        activeRule[ruleIndex] = false;
        result.dropEvents.push_back(DropEvent{ruleIndex, step, reason, std::move(bound)});
    }

    std::vector<Rule> activeFragment() const {
        std::vector<Rule> out;
        for (std::size_t i = 0; i < program.rules.size(); ++i) {
            if (activeRule[i]) out.push_back(program.rules[i]);
        }
        return out;
    }

    // Body atoms built only from non-recursive predicates are static once the
    // flag has flipped; the earliest/latest time one of them can hold bounds
    // where the rule can still fire.
    void dropStaticRules(std::size_t step, const std::vector<FactStore::NewPiece>& news) {
        Propagation dir = propagationClass(activeFragment());
        if (dir == Propagation::Mixed) return;
        for (std::size_t i = 0; i < program.rules.size(); ++i) {
            if (!activeRule[i]) continue;
            const Rule& rule = program.rules[i];
            bool haveStatic = false;
            TimePoint tr = dir == Propagation::Forward ? TimePoint::posInf() : TimePoint::negInf();
            for (const AtomPtr& atom : rule.body) {
                if (!atomNonRecursive(*atom, cls)) continue;
                haveStatic = true;
                if (dir == Propagation::Forward) {
                    tr = std::min(tr, atomLatestTime(store, *atom));
                } else {
                    tr = std::max(tr, atomEarliestTime(store, *atom));
                }
            }
            if (!haveStatic) continue;
            bool touched = false;
            for (const FactStore::NewPiece& p : news) {
                // Forward: does the piece reach into (-inf, t_r]? Backward:
                // into [t_r, +inf)?
                if (dir == Propagation::Forward) {
                    touched = p.piece.start() < Cut{tr, 1};
                } else {
                    touched = Cut{tr, 0} < p.piece.end();
                }
                if (touched) break;
            }
            if (!touched) drop(i, step, DropEvent::Reason::StaticBoundedBody, tr);
        }
    }

    void rollbackStep() {
        for (const FactStore::NewPiece& p : store.newPieces()) {
            store.subtractExact(p.atom, p.piece);
        }
    }

    void finish(MatOutcome outcome, std::size_t steps) {
        result.outcome = outcome;
        result.steps = steps;
    }

    void run() {
        const bool seminaiveDelta = opts.mode != MatMode::Naive;

        if (checkBottomRules(program, store, universe)) {
            finish(MatOutcome::Inconsistent, 0);
            return;
        }
        // The query is only tested after each step's bottom check, never against
        // the raw dataset: an inconsistency derivable in the first round must
        // win over a query the dataset happens to contain.

        bool flag = false;
        std::vector<FactStore::NewPiece> prevNew;
        bool firstStep = true;

        for (std::size_t step = 1; step <= opts.maxSteps; ++step) {
            if (opts.cancelled && opts.cancelled()) {
                finish(MatOutcome::Cancelled, step - 1);
                return;
            }
            auto t0 = std::chrono::steady_clock::now();

            // The semi-naive baseline: the store exactly as the previous step
            // evaluated it, reconstructed by removing that step's novel
            // sub-intervals. An instance is processed only if some maximal
            // body interval is not yet entailed by this baseline, which both
            // guarantees progress and makes every (rule, grounding, interval
            // tuple) fire at most once: truth values only grow, so a tuple
            // that fired before is entailed by every later baseline. On the
            // first step everything counts as new, so the baseline is empty.
            FactStore baseline;
            if (seminaiveDelta && !firstStep) {
                baseline = store;
                for (const FactStore::NewPiece& p : prevNew) {
                    baseline.subtractExact(p.atom, p.piece);
                }
            }

            std::vector<std::pair<std::size_t, RuleInstance>> derived;
            std::size_t stepInstances = 0;
            for (std::size_t i = 0; i < program.rules.size(); ++i) {
                if (!activeRule[i]) continue;
                const Rule& rule = program.rules[i];
                std::vector<RuleInstance> insts =
                    seminaiveDelta ? instancesRelative(store, baseline, rule, universe)
                                   : instances(store, rule, universe);
                stepInstances += insts.size();
                for (RuleInstance& inst : insts) {
                    if (opts.onInstance) opts.onInstance(step, i, inst);
                    derived.emplace_back(i, std::move(inst));
                }
            }
            result.totalInstances += stepInstances;

            store.beginStep();
            for (const auto& [ruleIdx, inst] : derived) {
                auto [head, iv] = deriveHead(program.rules[ruleIdx], inst.sigma, inst.meet);
                store.insertCoalescing(toGroundAtom(head), iv);
            }

            if (opts.trace) {
                double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                  .count();
                opts.trace(StepTrace{step, stepInstances, store.newPieces().size(), secs});
            }

            if (checkBottomRules(program, store, universe)) {
                finish(MatOutcome::Inconsistent, step);
                return;
            }
            if (opts.query &&
                store.entails(toGroundAtom(opts.query->atom), opts.query->interval)) {
                finish(MatOutcome::Entailed, step);
                return;
            }
            if (!store.anyNewPieces()) {
                finish(MatOutcome::Fixpoint, step);
                return;
            }

            bool justFlipped = false;
            if (optimising()) {
                if (!flag) {
                    bool nonRecursiveNews = false;
                    for (const FactStore::NewPiece& p : store.newPieces()) {
                        if (!cls.isRecursive(store.atom(p.atom).pred)) {
                            nonRecursiveNews = true;
                            break;
                        }
                    }
                    if (!nonRecursiveNews) {
                        flag = true;
                        justFlipped = true;
                        result.flagFlipped = true;
                        result.flipStep = step;
                        for (std::size_t i = 0; i < program.rules.size(); ++i) {
                            if (!activeRule[i]) continue;
                            const RelAtom* head = program.rules[i].headRel();
                            if (!head || !cls.isRecursive(head->pred)) {
                                drop(i, step, DropEvent::Reason::NonRecursiveFragment);
                            }
                        }
                        for (std::size_t i = 0; i < program.rules.size(); ++i) {
                            if (!activeRule[i]) continue;
                            for (const AtomPtr& atom : program.rules[i].body) {
                                if (!atomNonRecursive(*atom, cls)) continue;
                                if (atomLatestTime(store, *atom).isNegInf() ||
                                    atomEarliestTime(store, *atom).isPosInf()) {
                                    drop(i, step, DropEvent::Reason::UnsatisfiableBody);
                                    break;
                                }
                            }
                        }
                    }
                }
                if (flag) dropStaticRules(step, store.newPieces());
            }

            if (haltAtFlip && justFlipped) {
                halt.kind = HaltResult::Kind::Halted;
                for (std::size_t i = 0; i < program.rules.size(); ++i) {
                    if (activeRule[i] || program.rules[i].isBottomRule()) {
                        halt.residualProgram.rules.push_back(program.rules[i]);
                    }
                }
                rollbackStep();
                finish(MatOutcome::StepLimit, step - 1); // store/steps as of the pre-flip state
                return;
            }

            prevNew = store.newPieces();
            firstStep = false;
        }
        finish(MatOutcome::StepLimit, opts.maxSteps);
    }
};

} // namespace

MatResult materialise(const Program& program, const Dataset& dataset, const MatOptions& opts) {
    Runner r(program, dataset, opts, false);
    r.run();
    r.result.store = std::move(r.store);
    return std::move(r.result);
}

HaltResult materialiseHalt(const Program& program, const Dataset& dataset,
                           const MatOptions& opts) {
    Runner r(program, dataset, opts, true);
    r.run();
    HaltResult out = std::move(r.halt);
    out.store = std::move(r.store);
    out.steps = r.result.steps;
    out.dropEvents = std::move(r.result.dropEvents);
    if (out.kind != HaltResult::Kind::Halted) {
        out.kind = (r.result.outcome == MatOutcome::StepLimit ||
                    r.result.outcome == MatOutcome::Cancelled)
                       ? HaltResult::Kind::StepLimit
                       : HaltResult::Kind::Verdict;
        out.verdict = r.result.outcome;
    }
    return out;
}

} // namespace dmtl
