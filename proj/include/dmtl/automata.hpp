#pragma once

#include "dmtl/ast.hpp"
#include "dmtl/symbols.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

namespace dmtl {

// Timeline discretisation: every interval endpoint of the canonical model
// lies on the grid { origin + k * gridStep }. programStep is the gcd of the
// program's finite non-zero range endpoints; gridStep additionally divides
// the offsets between dataset anchors.
struct Discretisation {
    Rational programStep = 1;
    Rational gridStep = 1;
    Rational origin = 0;
    std::vector<Rational> anchors; // finite dataset endpoints, sorted, unique
};

Discretisation buildDiscretisation(const Program& program, const Dataset& dataset);

// Entailment-to-inconsistency reduction: (program, dataset) entails
// query.atom throughout query.interval iff the returned instance is
// inconsistent. Adds one probe fact at a representative time point inside the
// query interval and one bottom-rule that fires exactly when the query atom
// covers the whole interval around it.
struct Reduction {
    Program program;
    Dataset dataset;
    SymbolId marker = 0;   // the fresh probe predicate
    Rational probeTime = 0;
};

Reduction reduceEntailmentToInconsistency(const Program& program, const Dataset& dataset,
                                          const Fact& query, SymbolTable& syms);

enum class ConsistencyVerdict { Consistent, Inconsistent, BudgetExceeded };

struct AutomataOptions {
    std::size_t maxStates = 100000;       // cap on distinct explored states
    std::function<bool()> cancelled;      // cooperative cancellation
    std::ostream* debugWindows = nullptr; // dump explored windows when set
};

struct AutomataStats {
    std::size_t statesVisited = 0;
    std::size_t initialWindows = 0;
    std::size_t transitions = 0;
};

// Decides consistency by searching for a model of the grounded program: an
// initial window of the discretised timeline covering the dataset, extended
// to an ultimately periodic run both leftwards and rightwards by two Büchi
// automata whose states are windows and whose acceptance discharges the
// unbounded-operator obligations.
ConsistencyVerdict checkConsistency(const Program& program, const Dataset& dataset,
                                    const SymbolTable& syms, const AutomataOptions& opts = {},
                                    AutomataStats* stats = nullptr);

} // namespace dmtl
