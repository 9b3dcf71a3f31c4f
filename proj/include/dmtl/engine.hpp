#pragma once

#include "dmtl/ast.hpp"
#include "dmtl/materialise.hpp"
#include "dmtl/store.hpp"
#include "dmtl/symbols.hpp"

#include <cstddef>
#include <optional>

namespace dmtl {

enum class DecideOutcome { Entailed, NotEntailed, Inconsistent, BudgetExceeded };

enum class DecideProvenance {
    PreMaterialisation,    // the bounded optimised run already produced a verdict
    MaterialisationThread, // the unbounded materialisation race arm decided
    AutomataThread,        // the automata race arm decided
};

struct DecideOptions {
    std::size_t maxSteps = 1000;      // bound on the initial optimised run
    std::size_t budgetStates = 100000; // automata state budget per consistency check
    std::optional<double> budgetSeconds; // wall-clock cap on the race phase
    bool singleThread = false; // automata first, then bounded materialisation
};

struct DecideResult {
    DecideOutcome outcome = DecideOutcome::BudgetExceeded;
    DecideProvenance provenance = DecideProvenance::PreMaterialisation;
    std::size_t steps = 0; // materialisation rounds executed in total
    bool materialisationCancelled = false; // race arm was stopped by the winner
    std::optional<FactStore> partialStore; // best store when no verdict was reached
};

// Decides whether (program, dataset) entails the query fact.
//
// The program is first restricted to the rules the query predicate depends on
// and the dataset to the predicates those rules mention. A bounded optimised
// materialisation run follows; if its rule-dropping analysis halts it with a
// purely recursive residue, the residue races two arms: unbounded
// materialisation, and the automata consistency check applied to the residue
// itself and to its extension with a constraint violated exactly when the
// query holds. The first arm with a verdict wins and the other is cancelled.
//
// Queries over intervals with no finite lower endpoint cannot take the
// automata arm; if materialisation diverges on such a query, only
// budgetSeconds bounds the call.
DecideResult decide(const Program& program, const Dataset& dataset, const Fact& query,
                    SymbolTable& syms, const DecideOptions& options = {});

// Number of race arms currently running across all decide() calls.
int engineActiveTasks();

} // namespace dmtl
