#include "dmtl/eval.hpp"

#include <algorithm>
#include <cassert>

namespace dmtl {

namespace {

IntervalSeq everythingSeq() {
    return IntervalSeq::normalize({Interval::everything()});
}

} // namespace

IntervalSeq evalMetricAtom(const FactStore& store, const MetricAtom& atom) {
    switch (atom.op) {
        case Op::Top: return everythingSeq();
        case Op::Bottom: return {};
        case Op::Rel: {
            assert(atom.rel.isGround());
            auto id = store.findAtom(toGroundAtom(atom.rel));
            return id ? store.intervals(*id) : IntervalSeq{};
        }
        case Op::DiamondMinus:
            return dilateDiamondMinusSeq(evalMetricAtom(store, *atom.a), *atom.range);
        case Op::DiamondPlus:
            return dilateDiamondPlusSeq(evalMetricAtom(store, *atom.a), *atom.range);
        case Op::BoxMinus:
            return erodeBoxMinusSeq(evalMetricAtom(store, *atom.a), *atom.range);
        case Op::BoxPlus:
            return erodeBoxPlusSeq(evalMetricAtom(store, *atom.a), *atom.range);
        case Op::Since:
            return evalSince(evalMetricAtom(store, *atom.a), evalMetricAtom(store, *atom.b),
                             *atom.range);
        case Op::Until:
            return evalUntil(evalMetricAtom(store, *atom.a), evalMetricAtom(store, *atom.b),
                             *atom.range);
    }
    return {};
}

IntervalSeq joinBody(const std::vector<IntervalSeq>& bodySets) {
    if (bodySets.empty()) return everythingSeq();
    IntervalSeq acc = bodySets.front();
    for (std::size_t i = 1; i < bodySets.size() && !acc.empty(); ++i) {
        acc = acc.intersectWith(bodySets[i]);
    }
    return acc;
}

namespace {

struct LeafRef {
    const RelAtom* leaf = nullptr;
    std::size_t bodyPos = 0;
};

// Splits the body's relational leaves into "driving" leaves, which must match
// a stored atom for the instance to hold, and "residual" leaves, which sit
// under the continuity operand of a zero-lag SINCE/UNTIL and whose variables
// therefore do not constrain the store.
void splitLeaves(const MetricAtom& atom, std::size_t bodyPos, bool residual,
                 std::vector<LeafRef>& driving, std::vector<LeafRef>& residualLeaves) {
    switch (atom.op) {
        case Op::Top:
        case Op::Bottom: return;
        case Op::Rel:
            (residual ? residualLeaves : driving).push_back(LeafRef{&atom.rel, bodyPos});
            return;
        case Op::Since:
        case Op::Until: {
            bool zeroLag = containsPoint(*atom.range, TimePoint(Rational(0)));
            splitLeaves(*atom.a, bodyPos, residual || zeroLag, driving, residualLeaves);
            splitLeaves(*atom.b, bodyPos, residual, driving, residualLeaves);
            return;
        }
        default: splitLeaves(*atom.a, bodyPos, residual, driving, residualLeaves); return;
    }
}

// Enumerates every grounding of the rule body that can have a non-empty truth
// set: driving leaves bind against stored atoms, remaining variables range
// over the constant universe.
void enumerateGroundings(const FactStore& store, const Rule& rule,
                         const std::set<SymbolId>& universe,
                         const std::function<void(const Substitution&)>& yield) {
    std::vector<LeafRef> driving, residual;
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        splitLeaves(*rule.body[i], i, false, driving, residual);
    }

    // Cheapest leaf first: fewer candidate atoms means earlier pruning.
    std::stable_sort(driving.begin(), driving.end(), [&](const LeafRef& a, const LeafRef& b) {
        return store.atomsOfPred(a.leaf->pred).size() < store.atomsOfPred(b.leaf->pred).size();
    });

    std::set<SymbolId> boundByDriving;
    for (const LeafRef& l : driving) {
        for (const Term& t : l.leaf->args) {
            if (t.isVar) boundByDriving.insert(t.sym);
        }
    }
    std::vector<SymbolId> freeVars;
    for (const LeafRef& l : residual) {
        for (const Term& t : l.leaf->args) {
            if (t.isVar && !boundByDriving.count(t.sym)) {
                if (std::find(freeVars.begin(), freeVars.end(), t.sym) == freeVars.end()) {
                    freeVars.push_back(t.sym);
                }
            }
        }
    }

    std::vector<SymbolId> consts(universe.begin(), universe.end());

    std::function<void(std::size_t, const Substitution&)> go = [&](std::size_t i,
                                                                   const Substitution& sigma) {
        if (i < driving.size()) {
            store.matchAtom(*driving[i].leaf, sigma,
                            [&](const Substitution& extended, FactStore::AtomId) {
                                go(i + 1, extended);
                            });
            return;
        }
        if (freeVars.empty()) {
            yield(sigma);
            return;
        }
        if (consts.empty()) return; // no constant to ground the residual variables with
        std::vector<std::size_t> pick(freeVars.size(), 0);
        Substitution full = sigma;
        for (;;) {
            for (std::size_t k = 0; k < freeVars.size(); ++k) full[freeVars[k]] = consts[pick[k]];
            yield(full);
            std::size_t k = 0;
            while (k < pick.size() && ++pick[k] == consts.size()) pick[k++] = 0;
            if (k == pick.size()) break;
        }
    };
    go(0, {});
}

std::vector<RuleInstance> collectInstances(const FactStore& store, const FactStore* baseline,
                                           const Rule& rule, const std::set<SymbolId>& universe) {
    std::vector<RuleInstance> out;
    enumerateGroundings(store, rule, universe, [&](const Substitution& sigma) {
        std::vector<IntervalSeq> truth(rule.body.size());
        std::vector<IntervalSeq> base(baseline ? rule.body.size() : 0);
        for (std::size_t i = 0; i < rule.body.size(); ++i) {
            AtomPtr ground = substitute(rule.body[i], sigma);
            truth[i] = evalMetricAtom(store, *ground);
            if (truth[i].empty()) return;
            if (baseline) base[i] = evalMetricAtom(*baseline, *ground);
        }
        std::vector<const IntervalSeq*> lists(rule.body.size());
        for (std::size_t i = 0; i < rule.body.size(); ++i) lists[i] = &truth[i];
        sweepJoin(lists, [&](std::span<const std::size_t> idx, const Interval& meet) {
            RuleInstance inst;
            inst.sigma = sigma;
            inst.bodyIntervals.reserve(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                inst.bodyIntervals.push_back(truth[i][idx[i]]);
            }
            inst.meet = meet;
            if (baseline) {
                bool usesNew = false;
                for (std::size_t i = 0; i < idx.size() && !usesNew; ++i) {
                    usesNew = !base[i].entails(inst.bodyIntervals[i]);
                }
                if (!usesNew) return;
            }
            out.push_back(std::move(inst));
        });
    });
    return out;
}

} // namespace

std::vector<RuleInstance> instances(const FactStore& store, const Rule& rule,
                                    const std::set<SymbolId>& universe) {
    return collectInstances(store, nullptr, rule, universe);
}

std::vector<RuleInstance> instancesRelative(const FactStore& store, const FactStore& baseline,
                                            const Rule& rule, const std::set<SymbolId>& universe) {
    return collectInstances(store, &baseline, rule, universe);
}

std::pair<RelAtom, Interval> deriveHead(const Rule& rule, const Substitution& sigma,
                                        const Interval& meet) {
    assert(!rule.isBottomRule());
    Interval cur = meet;
    const MetricAtom* m = rule.head.get();
    while (m->op != Op::Rel) {
        // Asserting BOXPLUS[r] H throughout cur asserts H throughout every
        // shiftPlus(t, r), i.e. the future dilation of cur; BOXMINUS mirrors.
        assert(m->op == Op::BoxPlus || m->op == Op::BoxMinus);
        cur = m->op == Op::BoxPlus ? dilateDiamondMinus(cur, *m->range)
                                   : dilateDiamondPlus(cur, *m->range);
        m = m->a.get();
    }
    return {substitute(m->rel, sigma), cur};
}

namespace {

TimePoint latestStored(const FactStore& store, SymbolId pred) {
    TimePoint best = TimePoint::negInf();
    for (FactStore::AtomId id : store.atomsOfPred(pred)) {
        const IntervalSeq& ivs = store.intervals(id);
        if (ivs.empty()) continue;
        best = std::max(best, ivs[ivs.size() - 1].hi());
    }
    return best;
}

TimePoint earliestStored(const FactStore& store, SymbolId pred) {
    TimePoint best = TimePoint::posInf();
    for (FactStore::AtomId id : store.atomsOfPred(pred)) {
        const IntervalSeq& ivs = store.intervals(id);
        if (ivs.empty()) continue;
        best = std::min(best, ivs[0].lo());
    }
    return best;
}

} // namespace

TimePoint atomLatestTime(const FactStore& store, const MetricAtom& atom) {
    switch (atom.op) {
        case Op::Top: return TimePoint::posInf();
        case Op::Bottom: return TimePoint::negInf();
        case Op::Rel: return latestStored(store, atom.rel.pred);
        case Op::DiamondMinus: {
            TimePoint t = atomLatestTime(store, *atom.a);
            if (t.isNegInf()) return t;
            if (atom.range->hi().isPosInf()) return TimePoint::posInf();
            return t + atom.range->hi().value();
        }
        case Op::DiamondPlus: {
            TimePoint t = atomLatestTime(store, *atom.a);
            if (t.isNegInf()) return t;
            return t - atom.range->lo().value();
        }
        case Op::BoxMinus: {
            TimePoint t = atomLatestTime(store, *atom.a);
            if (t.isNegInf()) return t;
            return t + atom.range->lo().value();
        }
        case Op::BoxPlus: {
            TimePoint t = atomLatestTime(store, *atom.a);
            if (t.isNegInf()) return t;
            if (atom.range->hi().isPosInf()) {
                // Needs the operand on an unbounded future.
                return t.isPosInf() ? t : TimePoint::negInf();
            }
            return t - atom.range->hi().value();
        }
        case Op::Since: {
            TimePoint t = atomLatestTime(store, *atom.b);
            if (t.isNegInf()) return t;
            if (atom.range->hi().isPosInf()) return TimePoint::posInf();
            return t + atom.range->hi().value();
        }
        case Op::Until: return atomLatestTime(store, *atom.b);
    }
    return TimePoint::posInf();
}

TimePoint atomEarliestTime(const FactStore& store, const MetricAtom& atom) {
    switch (atom.op) {
        case Op::Top: return TimePoint::negInf();
        case Op::Bottom: return TimePoint::posInf();
        case Op::Rel: return earliestStored(store, atom.rel.pred);
        case Op::DiamondMinus: {
            TimePoint t = atomEarliestTime(store, *atom.a);
            if (t.isPosInf()) return t;
            return t + atom.range->lo().value();
        }
        case Op::DiamondPlus: {
            TimePoint t = atomEarliestTime(store, *atom.a);
            if (t.isPosInf()) return t;
            if (atom.range->hi().isPosInf()) return TimePoint::negInf();
            return t - atom.range->hi().value();
        }
        case Op::BoxMinus: {
            TimePoint t = atomEarliestTime(store, *atom.a);
            if (t.isPosInf()) return t;
            if (atom.range->hi().isPosInf()) {
                // Needs the operand on an unbounded past.
                return t.isNegInf() ? t : TimePoint::posInf();
            }
            return t + atom.range->hi().value();
        }
        case Op::BoxPlus: {
            TimePoint t = atomEarliestTime(store, *atom.a);
            if (t.isPosInf()) return t;
            return t - atom.range->lo().value();
        }
        case Op::Since: {
            TimePoint t = atomEarliestTime(store, *atom.b);
            if (t.isPosInf()) return t;
            return t + atom.range->lo().value();
        }
        case Op::Until: {
            TimePoint t = atomEarliestTime(store, *atom.b);
            if (t.isPosInf()) return t;
            if (atom.range->hi().isPosInf()) return TimePoint::negInf();
            return t - atom.range->hi().value();
        }
    }
    return TimePoint::negInf();
}

} // namespace dmtl
