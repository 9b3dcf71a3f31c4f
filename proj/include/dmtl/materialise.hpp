#pragma once

#include "dmtl/ast.hpp"
#include "dmtl/eval.hpp"
#include "dmtl/store.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace dmtl {

enum class MatMode { Naive, Seminaive, Optimised };

enum class MatOutcome {
    Fixpoint,     // a step derived nothing new: the store is the canonical model
    Entailed,     // the query fact became entailed
    Inconsistent, // a bottom-rule body became satisfiable
    StepLimit,    // maxSteps exhausted without a verdict
    Cancelled,    // the cancellation callback fired
};

struct StepTrace {
    std::size_t step = 0;
    std::size_t instanceCount = 0;
    std::size_t insertedPieces = 0;
    double seconds = 0.0;
};

struct DropEvent {
    enum class Reason {
        NonRecursiveFragment, // head predicate is non-recursive; dropped at the flip
        UnsatisfiableBody,    // a non-recursive body atom can never hold again
        StaticBoundedBody,    // every new fact lies beyond the rule's static horizon t_r
    };

    std::size_t ruleIndex = 0; // index into the input program
    std::size_t step = 0;
    Reason reason = Reason::NonRecursiveFragment;
    std::optional<TimePoint> bound; // t_r, for StaticBoundedBody
};

struct MatOptions {
    MatMode mode = MatMode::Optimised;
    std::size_t maxSteps = 10000;
    bool disableRuleDrops = false; // optimised mode: keep every rule active
    const Fact* query = nullptr;   // stop as soon as this fact is entailed
    std::function<void(const StepTrace&)> trace;
    std::function<void(std::size_t step, std::size_t ruleIndex, const RuleInstance&)> onInstance;
    std::function<bool()> cancelled;
};

struct MatResult {
    MatOutcome outcome = MatOutcome::Fixpoint;
    std::size_t steps = 0; // derivation rounds executed when the run ended
    FactStore store;
    std::vector<DropEvent> dropEvents;
    std::size_t totalInstances = 0;
    bool flagFlipped = false;
    std::size_t flipStep = 0; // step during which new content became recursive-only
};

MatResult materialise(const Program& program, const Dataset& dataset, const MatOptions& = {});

// The halting variant: runs the optimised procedure but stops right after the
// step whose new content is recursive-only (after that step's rule drops),
// handing back the recursive rule fragment and the store as it was *before*
// that step — the state the combined decision procedure forks from.
struct HaltResult {
    enum class Kind { Verdict, Halted, StepLimit };

    Kind kind = Kind::Verdict;
    MatOutcome verdict = MatOutcome::Fixpoint; // when kind != Halted
    Program residualProgram;                   // surviving rules + bottom-rules
    FactStore store; // pre-flip store when halted, final store otherwise
    std::size_t steps = 0;
    std::vector<DropEvent> dropEvents;
};

HaltResult materialiseHalt(const Program& program, const Dataset& dataset,
                           const MatOptions& = {});

// True when some bottom-rule body is satisfiable over the store.
bool checkBottomRules(const Program& program, const FactStore& store,
                      const std::set<SymbolId>& universe);

// The constant universe groundings range over: store constants plus program
// constants.
std::set<SymbolId> constantUniverse(const Program& program, const FactStore& store);

} // namespace dmtl
