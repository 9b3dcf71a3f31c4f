#pragma once

#include "dmtl/ast.hpp"

#include <map>
#include <set>
#include <vector>

namespace dmtl {

// Dependency graph over predicates: one edge from every body predicate to the
// head predicate of each rule. Bottom-rules target a virtual falsum vertex,
// which keeps them reachable for every query.
class DependencyGraph {
public:
    explicit DependencyGraph(const Program& program);

    // All predicates mentioned by the program.
    const std::set<SymbolId>& predicates() const { return preds_; }
    const std::set<SymbolId>& successors(SymbolId p) const;

    // Predicates on a dependency cycle (SCC with >1 vertex, or a self-loop).
    std::set<SymbolId> cyclePredicates() const;

private:
    std::set<SymbolId> preds_;
    std::map<SymbolId, std::set<SymbolId>> adj_;
};

struct PredicateClassification {
    std::set<SymbolId> recursive;
    std::set<SymbolId> mentioned;

    bool isRecursive(SymbolId p) const { return recursive.count(p) != 0; }
};

PredicateClassification classifyPredicates(const Program& program);

// True when every relational leaf of the atom has a non-recursive predicate.
bool atomNonRecursive(const MetricAtom& atom, const PredicateClassification& cls);

// Indices of the rules that can contribute to entailing queryPred: the rules
// defining it or falsum, plus everything feeding those transitively.
std::vector<std::size_t> relevantRules(const Program& program, SymbolId queryPred);

enum class Propagation { Forward, Backward, Mixed };

// A rule is forward-compatible when its body pulls information only from the
// past (diamonds-minus / SINCE; boxes are direction-neutral) and its head
// pushes only toward the future, and neither side mentions TOP or BOTTOM; the
// backward direction mirrors this. Rules without directed operators are both.
bool ruleForwardCompatible(const Rule& rule);
bool ruleBackwardCompatible(const Rule& rule);

Propagation propagationClass(const std::vector<Rule>& rules);

// Every ground instance of every rule over the union of the given constants
// and the program's own constants, in program order (|constants|^|vars| per
// rule). Intended for small instances only.
std::vector<Rule> groundRules(const Program& program, const std::set<SymbolId>& constants);

} // namespace dmtl
