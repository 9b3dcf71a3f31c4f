#pragma once

#include "dmtl/ast.hpp"
#include "dmtl/interval.hpp"
#include "dmtl/store.hpp"

#include <set>
#include <utility>
#include <vector>

namespace dmtl {

// Truth set of a ground metric atom over the store, under the continuous
// semantics. TOP is true everywhere, BOTTOM nowhere; relational atoms read the
// store; operators apply the exact interval algebra.
IntervalSeq evalMetricAtom(const FactStore& store, const MetricAtom& atom);

// n-way intersection of body truth sets (the times at which the whole body
// holds for one grounding).
IntervalSeq joinBody(const std::vector<IntervalSeq>& bodySets);

// One rule instance: a grounding plus one member interval from each body
// atom's truth set, with their non-empty intersection.
struct RuleInstance {
    Substitution sigma;
    std::vector<Interval> bodyIntervals;
    Interval meet = Interval::point(Rational(0));
};

// All instances of the rule with a non-empty meet. Groundings are enumerated
// from the store through the body's relational leaves; variables that occur
// only under the continuity operand of a zero-lag SINCE/UNTIL (and therefore
// never constrain the store) range over `universe`.
std::vector<RuleInstance> instances(const FactStore& store, const Rule& rule,
                                    const std::set<SymbolId>& universe);

// Same, but keeps only instances where at least one chosen body interval is
// not already entailed by `baseline` (the store with the previous step's
// delta removed) — the semi-naive filter.
std::vector<RuleInstance> instancesRelative(const FactStore& store, const FactStore& baseline,
                                            const Rule& rule, const std::set<SymbolId>& universe);

// Applies the head's boxes to the instance meet, outermost first: deriving
// BOXPLUS[r] H throughout I asserts H throughout the future dilation of I.
// Returns the ground head atom and the interval it must hold over. Must not
// be called on bottom-rules.
std::pair<RelAtom, Interval> deriveHead(const Rule& rule, const Substitution& sigma,
                                        const Interval& meet);

// Structural bounds on when a (possibly non-ground) atom can hold in the
// store, over every grounding at once. latest == -inf / earliest == +inf mean
// the atom can never hold. Exact for relational atoms and single-operator
// nests; a safe over-approximation in general.
TimePoint atomLatestTime(const FactStore& store, const MetricAtom& atom);
TimePoint atomEarliestTime(const FactStore& store, const MetricAtom& atom);

} // namespace dmtl
