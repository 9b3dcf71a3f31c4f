#include "dmtl/automata.hpp"

#include "dmtl/analysis.hpp"
#include "dmtl/store.hpp"

#include <boost/functional/hash.hpp>

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace dmtl {

namespace {

void collectRangeEndpoints(const MetricAtom& m, std::vector<Rational>& out) {
    if (m.range) {
        if (m.range->lo().isFinite() && m.range->lo().value() != 0)
            out.push_back(m.range->lo().value());
        if (m.range->hi().isFinite() && m.range->hi().value() != 0)
            out.push_back(m.range->hi().value());
    }
    if (m.a) collectRangeEndpoints(*m.a, out);
    if (m.b) collectRangeEndpoints(*m.b, out);
}

} // namespace

Discretisation buildDiscretisation(const Program& program, const Dataset& dataset) {
    Discretisation d;
    std::vector<Rational> endpoints;
    for (const Rule& r : program.rules) {
        collectRangeEndpoints(*r.head, endpoints);
        for (const AtomPtr& b : r.body) collectRangeEndpoints(*b, endpoints);
    }
    Rational step = 0;
    for (const Rational& e : endpoints) step = (step == 0) ? e : rationalGcd(step, e);
    if (step == 0) step = 1;
    d.programStep = step;

    std::set<Rational> anchorSet;
    for (const Fact& f : dataset.facts) {
        if (f.interval.lo().isFinite()) anchorSet.insert(f.interval.lo().value());
        if (f.interval.hi().isFinite()) anchorSet.insert(f.interval.hi().value());
    }
    if (anchorSet.empty()) anchorSet.insert(Rational(0));
    d.anchors.assign(anchorSet.begin(), anchorSet.end());
    d.origin = d.anchors.front();

    Rational g = d.programStep;
    for (const Rational& a : d.anchors)
        if (a != d.origin) g = rationalGcd(g, a - d.origin);
    d.gridStep = g;
    return d;
}

Reduction reduceEntailmentToInconsistency(const Program& program, const Dataset& dataset,
                                          const Fact& query, SymbolTable& syms) {
    const Interval& q = query.interval;
    if (!q.lo().isFinite())
        throw std::invalid_argument(
            "entailment reduction requires a query interval with a finite lower endpoint");

    // A representative point inside the query interval: its left endpoint when
    // that is included, the midpoint of a bounded open-left interval, and one
    // grid-agnostic unit into an unbounded one.
    Rational t;
    if (q.loClosed())
        t = q.lo().value();
    else if (q.hi().isFinite())
        t = (q.lo().value() + q.hi().value()) / 2;
    else
        t = q.lo().value() + 1;

    Interval rho1 = *Interval::make(TimePoint(Rational(0)), true, TimePoint(t - q.lo().value()),
                                    q.loClosed());
    TimePoint hi2 = q.hi().isFinite() ? TimePoint(q.hi().value() - t) : TimePoint::posInf();
    Interval rho2 = *Interval::make(TimePoint(Rational(0)), true, hi2, q.hiClosed());

    Reduction out;
    out.program = program;
    out.dataset = dataset;
    out.probeTime = t;
    out.marker = syms.fresh(syms.name(query.atom.pred) + "_probe");
    syms.fixArity(out.marker, static_cast<std::uint32_t>(query.atom.args.size()));

    RelAtom probe{out.marker, query.atom.args};
    Rule guard;
    guard.head = MetricAtom::bottom();
    guard.body.push_back(MetricAtom::relational(probe));
    guard.body.push_back(MetricAtom::unary(Op::BoxMinus, rho1, MetricAtom::relational(query.atom)));
    guard.body.push_back(MetricAtom::unary(Op::BoxPlus, rho2, MetricAtom::relational(query.atom)));
    out.program.rules.push_back(std::move(guard));
    out.dataset.facts.push_back(Fact{probe, Interval::point(t)});
    return out;
}

// ---------------------------------------------------------------------------
// Consistency via window automata.
//
// The timeline is cut into grid cells: cell 2k is the point origin + k*g and
// cell 2k+1 the open segment between points k and k+1. Every endpoint of the
// canonical model lies on the grid, so a model restricted to a window of L
// consecutive cells is a bit matrix: one bit per (cell, possible ground atom).
// Unbounded-range operators cannot be recomputed from a bounded window; for
// them one summary bit per atom is carried at a boundary column and extended
// across the window by exact per-cell recurrences. Two Büchi automata whose
// states are such windows extend an initial window (covering the dataset)
// rightwards and leftwards; Büchi acceptance discharges the existential
// obligations of the summary bits, and rule checks inside fully-guarded cells
// enforce the program. The instance is consistent iff some initial window has
// accepting runs in both directions.
// ---------------------------------------------------------------------------

namespace {

using TriBit = std::uint8_t;
constexpr TriBit kU = 0; // unknown
constexpr TriBit kF = 1;
constexpr TriBit kT = 2;

TriBit triOr(TriBit a, TriBit b) {
    if (a == kT || b == kT) return kT;
    if (a == kF && b == kF) return kF;
    return kU;
}
TriBit triAnd(TriBit a, TriBit b) {
    if (a == kF || b == kF) return kF;
    if (a == kT && b == kT) return kT;
    return kU;
}

long long roundUpEven(long long c) { return (c & 1LL) ? c + 1 : c; }
long long roundDownEven(long long c) { return (c & 1LL) ? c - 1 : c; }

struct Margin {
    long long past = 0;
    long long fut = 0;
};

// A tracked unbounded-range operator over fixed ground operands, normalised
// to range [0, inf). One summary bit per window, held at a boundary column:
// past-directed shapes at the leftmost trusted column, future-directed ones
// at the rightmost, extended across the window by the per-cell recurrences.
struct Shape {
    Op op = Op::Rel;
    AtomPtr a, b;
    Margin lag;       // columns at each edge where the recurrence inputs are untrusted
    bool past = false;
    int boundaryPos = 0; // index within the per-direction boundary vectors
};

struct GRule {
    Rule rule;
    long long gP = 0, gF = 0; // guard margins in cells
    bool bottom = false;
    bool forcible = false;            // head is a rel atom under bounded boxes
    int headAtom = -1;                // rel atom index when forcible
    std::vector<std::pair<Op, Interval>> headOps; // head box chain, outermost first
    bool usesShapes = false;
};

struct Labelling {
    long long first = 0;        // absolute cell index of column 0
    std::vector<TriBit> rel;    // L * nRel
    std::vector<TriBit> pastB;  // per past shape
    std::vector<TriBit> futB;   // per future shape
};

struct Ctx {
    const SymbolTable* syms = nullptr;
    const AutomataOptions* opts = nullptr;
    AutomataStats* stats = nullptr;
    std::ostream* dbg = nullptr;

    Rational g = 1;
    Rational origin = 0;
    long long L = 0;
    long long firstInit = 0;
    long long dHiCell = 0; // last anchor cell (first anchor is cell 0)

    int nRel = 0;
    std::vector<GroundAtom> relAtoms;
    std::unordered_map<GroundAtom, int, GroundAtomHash> relIdx;
    std::vector<IntervalSeq> forcedSeq; // dataset truth per rel atom

    std::vector<Shape> shapes; // registration order = children before parents
    std::unordered_map<const MetricAtom*, int> shapeOf;
    std::vector<int> pastShapes, futShapes;

    std::vector<GRule> rules;
    long long maxGP = 0, maxGF = 0;

    std::size_t used = 0;
    bool aborted = false;

    bool tick() {
        if (aborted) return false;
        if (opts->cancelled && opts->cancelled()) {
            aborted = true;
            return false;
        }
        if (++used > opts->maxStates) {
            aborted = true;
            return false;
        }
        if (stats) stats->statesVisited = used;
        return true;
    }

    long long ratioInt(const Rational& r) const {
        Rational q = r / g;
        assert(boost::multiprecision::denominator(q) == 1);
        return boost::multiprecision::numerator(q).convert_to<long long>();
    }

    long long cellsOf(const Rational& r) const { return 2 * ratioInt(r); }

    Interval cellInterval(long long c) const {
        long long k = (c - (c & 1LL)) / 2;
        Rational lo = origin + g * k;
        if ((c & 1LL) == 0) return Interval::point(lo);
        return *Interval::make(TimePoint(lo), false, TimePoint(lo + g), false);
    }

    // Absolute cell range [lo, hi] covered by iv, clipped to the window at
    // `first`; empty when lo > hi. Endpoints must be grid-aligned.
    std::pair<long long, long long> cellRange(const Interval& iv, long long first) const {
        long long lo, hi;
        const Cut& s = iv.start();
        if (s.v.isNegInf()) {
            lo = first;
        } else {
            long long k = ratioInt(s.v.value() - origin);
            lo = 2 * k + (s.eps ? 1 : 0);
        }
        const Cut& e = iv.end();
        if (e.v.isPosInf()) {
            hi = first + L - 1;
        } else {
            long long k = ratioInt(e.v.value() - origin);
            hi = 2 * k - (e.eps ? 0 : 1);
        }
        return {std::max(lo, first), std::min(hi, first + L - 1)};
    }

    // Shift applied when reducing an unbounded unary range to its [0, inf)
    // summary: <c..inf) composes as the bounded shift <c..c+something].
    Interval unboundedShift(const Interval& range) const {
        const Rational& c = range.lo().value();
        if (range.loClosed()) return Interval::point(c);
        return *Interval::make(TimePoint(c), false, TimePoint(c + g), true);
    }
};

void walkLeaves(const MetricAtom& m, bool residual,
                const std::function<void(const RelAtom&, bool)>& fn) {
    switch (m.op) {
        case Op::Rel: fn(m.rel, residual); return;
        case Op::Top:
        case Op::Bottom: return;
        case Op::Since:
        case Op::Until: {
            bool zeroLag = containsPoint(*m.range, TimePoint(Rational(0)));
            walkLeaves(*m.a, residual || zeroLag, fn);
            walkLeaves(*m.b, residual, fn);
            return;
        }
        default: walkLeaves(*m.a, residual, fn); return;
    }
}

struct AtomInfo {
    Margin m;
};

AtomInfo walkAtom(Ctx& cx, std::map<std::string, int>& shapeKeys, const MetricAtom* m);

int registerShape(Ctx& cx, std::map<std::string, int>& shapeKeys, const MetricAtom* m,
                  const Margin& childMargin) {
    std::string key = std::to_string(static_cast<int>(m->op)) + "|" +
                      printAtom(*cx.syms, *m->a) +
                      (m->b ? "|" + printAtom(*cx.syms, *m->b) : std::string());
    auto it = shapeKeys.find(key);
    int si;
    if (it != shapeKeys.end()) {
        si = it->second;
    } else {
        Shape s;
        s.op = m->op;
        s.a = m->a;
        s.b = m->b;
        s.lag = {childMargin.past + 2, childMargin.fut + 2};
        s.past = (m->op == Op::DiamondMinus || m->op == Op::BoxMinus || m->op == Op::Since);
        si = static_cast<int>(cx.shapes.size());
        if (s.past) {
            s.boundaryPos = static_cast<int>(cx.pastShapes.size());
            cx.pastShapes.push_back(si);
        } else {
            s.boundaryPos = static_cast<int>(cx.futShapes.size());
            cx.futShapes.push_back(si);
        }
        cx.shapes.push_back(std::move(s));
        shapeKeys.emplace(std::move(key), si);
    }
    cx.shapeOf.emplace(m, si);
    return si;
}

AtomInfo walkAtom(Ctx& cx, std::map<std::string, int>& shapeKeys, const MetricAtom* m) {
    switch (m->op) {
        case Op::Rel:
        case Op::Top:
        case Op::Bottom: return {{0, 0}};
        case Op::DiamondMinus:
        case Op::BoxMinus: {
            AtomInfo c = walkAtom(cx, shapeKeys, m->a.get());
            if (m->range->hi().isPosInf()) {
                int si = registerShape(cx, shapeKeys, m, c.m);
                long long sh = cx.cellsOf(m->range->lo().value()) + (m->range->loClosed() ? 0 : 2);
                return {{sh + cx.shapes[si].lag.past, cx.shapes[si].lag.fut}};
            }
            return {{c.m.past + cx.cellsOf(m->range->hi().value()), c.m.fut}};
        }
        case Op::DiamondPlus:
        case Op::BoxPlus: {
            AtomInfo c = walkAtom(cx, shapeKeys, m->a.get());
            if (m->range->hi().isPosInf()) {
                int si = registerShape(cx, shapeKeys, m, c.m);
                long long sh = cx.cellsOf(m->range->lo().value()) + (m->range->loClosed() ? 0 : 2);
                return {{cx.shapes[si].lag.past, sh + cx.shapes[si].lag.fut}};
            }
            return {{c.m.past, c.m.fut + cx.cellsOf(m->range->hi().value())}};
        }
        case Op::Since: {
            AtomInfo a = walkAtom(cx, shapeKeys, m->a.get());
            AtomInfo b = walkAtom(cx, shapeKeys, m->b.get());
            Margin mx{std::max(a.m.past, b.m.past), std::max(a.m.fut, b.m.fut)};
            if (m->range->hi().isPosInf()) {
                if (!m->range->loClosed())
                    throw std::invalid_argument(
                        "the automata consistency check does not support SINCE/UNTIL ranges "
                        "with an open lower bound and an infinite upper bound");
                int si = registerShape(cx, shapeKeys, m, mx);
                long long sh = cx.cellsOf(m->range->lo().value());
                return {{sh + cx.shapes[si].lag.past + a.m.past,
                         cx.shapes[si].lag.fut + a.m.fut}};
            }
            return {{mx.past + cx.cellsOf(m->range->hi().value()), mx.fut}};
        }
        case Op::Until: {
            AtomInfo a = walkAtom(cx, shapeKeys, m->a.get());
            AtomInfo b = walkAtom(cx, shapeKeys, m->b.get());
            Margin mx{std::max(a.m.past, b.m.past), std::max(a.m.fut, b.m.fut)};
            if (m->range->hi().isPosInf()) {
                if (!m->range->loClosed())
                    throw std::invalid_argument(
                        "the automata consistency check does not support SINCE/UNTIL ranges "
                        "with an open lower bound and an infinite upper bound");
                int si = registerShape(cx, shapeKeys, m, mx);
                long long sh = cx.cellsOf(m->range->lo().value());
                return {{cx.shapes[si].lag.past + a.m.past,
                         sh + cx.shapes[si].lag.fut + a.m.fut}};
            }
            return {{mx.past, mx.fut + cx.cellsOf(m->range->hi().value())}};
        }
    }
    return {{0, 0}};
}

void collectShapeUse(const Ctx& cx, const MetricAtom* m, bool& uses) {
    if (cx.shapeOf.count(m)) uses = true;
    if (m->a) collectShapeUse(cx, m->a.get(), uses);
    if (m->b) collectShapeUse(cx, m->b.get(), uses);
}

Ctx buildCtx(const Program& program, const Dataset& dataset, const SymbolTable& syms,
             const AutomataOptions& opts, AutomataStats& stats) {
    Ctx cx;
    cx.syms = &syms;
    cx.opts = &opts;
    cx.stats = &stats;
    cx.dbg = opts.debugWindows;

    Discretisation d = buildDiscretisation(program, dataset);
    cx.g = d.gridStep;
    cx.origin = d.origin;

    std::set<SymbolId> consts;
    for (const Fact& f : dataset.facts)
        for (const Term& t : f.atom.args) consts.insert(t.sym);
    std::vector<Rule> allGround = groundRules(program, consts);

    // Time-abstracted reachability: the ground atoms any model labelling needs
    // to mention. A rule can fire only if its non-residual body leaves are
    // possible (leaves under a zero-lag SINCE/UNTIL continuity operand are
    // unconstrained because the operand can hold vacuously).
    std::unordered_set<GroundAtom, GroundAtomHash> possible;
    for (const Fact& f : dataset.facts) possible.insert(toGroundAtom(f.atom));
    auto applicable = [&](const Rule& r) {
        bool ok = true;
        for (const AtomPtr& b : r.body)
            walkLeaves(*b, false, [&](const RelAtom& leaf, bool residual) {
                if (!residual && !possible.count(toGroundAtom(leaf))) ok = false;
            });
        return ok;
    };
    for (bool grew = true; grew;) {
        grew = false;
        for (const Rule& r : allGround) {
            if (r.isBottomRule()) continue;
            GroundAtom ha = toGroundAtom(*r.headRel());
            if (possible.count(ha)) continue;
            if (applicable(r)) {
                possible.insert(ha);
                grew = true;
            }
        }
    }

    std::vector<std::pair<std::string, GroundAtom>> named;
    named.reserve(possible.size());
    for (const GroundAtom& a : possible) named.emplace_back(printRelAtom(syms, toRelAtom(a)), a);
    std::sort(named.begin(), named.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto& [name, atom] : named) {
        cx.relIdx.emplace(atom, static_cast<int>(cx.relAtoms.size()));
        cx.relAtoms.push_back(atom);
    }
    cx.nRel = static_cast<int>(cx.relAtoms.size());

    cx.forcedSeq.assign(cx.relAtoms.size(), {});
    for (const Fact& f : dataset.facts)
        cx.forcedSeq[cx.relIdx.at(toGroundAtom(f.atom))].insertCoalescing(f.interval);

    std::map<std::string, int> shapeKeys;
    for (Rule& r : allGround) {
        if (!applicable(r)) continue; // can never fire against possible atoms
        GRule g;
        g.bottom = r.isBottomRule();
        Margin mm;
        auto pull = [&](const AtomPtr& a) {
            AtomInfo i = walkAtom(cx, shapeKeys, a.get());
            mm.past = std::max(mm.past, i.m.past);
            mm.fut = std::max(mm.fut, i.m.fut);
        };
        for (const AtomPtr& b : r.body) pull(b);
        if (!g.bottom) pull(r.head);
        g.gP = mm.past;
        g.gF = mm.fut;
        if (!g.bottom) {
            const MetricAtom* h = r.head.get();
            bool boundedBoxes = true;
            while (h->isUnaryOp()) {
                if (h->range->hi().isPosInf()) {
                    boundedBoxes = false;
                    break;
                }
                g.headOps.emplace_back(h->op, *h->range);
                h = h->a.get();
            }
            if (boundedBoxes && h->op == Op::Rel) {
                g.forcible = true;
                g.headAtom = cx.relIdx.at(toGroundAtom(h->rel));
            } else {
                g.headOps.clear();
            }
        }
        bool uses = false;
        for (const AtomPtr& b : r.body) collectShapeUse(cx, b.get(), uses);
        if (!g.bottom) collectShapeUse(cx, r.head.get(), uses);
        g.usesShapes = uses;
        g.rule = std::move(r);
        cx.maxGP = std::max(cx.maxGP, g.gP);
        cx.maxGF = std::max(cx.maxGF, g.gF);
        cx.rules.push_back(std::move(g));
    }

    cx.dHiCell = 2 * cx.ratioInt(d.anchors.back() - d.origin);
    long long pad = cx.maxGP + cx.maxGF + 4;
    cx.firstInit = -pad;
    cx.L = cx.dHiCell + 2 * pad + 1;
    return cx;
}

// --- evaluation of metric atoms over one window labelling -------------------

struct WindowEval {
    const Ctx& cx;
    const Labelling& w;
    bool definite; // all bits assigned: not-entailed means definitely false

    std::vector<IntervalSeq> relSeq;
    std::vector<std::vector<TriBit>> shapeVal; // per shape, per column
    std::vector<IntervalSeq> shapeSeq;
    std::map<const MetricAtom*, IntervalSeq> cache; // node-stable references

    WindowEval(const Ctx& c, const Labelling& lab, bool def) : cx(c), w(lab), definite(def) {
        relSeq.resize(cx.relAtoms.size());
        for (int a = 0; a < cx.nRel; ++a)
            relSeq[a] = seqFromBits([&](long long col) { return w.rel[col * cx.nRel + a] == kT; });
        shapeVal.assign(cx.shapes.size(), {});
        shapeSeq.resize(cx.shapes.size());
        for (int si = 0; si < static_cast<int>(cx.shapes.size()); ++si) computeShape(si);
    }

    IntervalSeq seqFromBits(const std::function<bool(long long)>& on) const {
        std::vector<Interval> runs;
        long long runStart = -1;
        for (long long col = 0; col <= cx.L; ++col) {
            bool v = col < cx.L && on(col);
            if (v && runStart < 0) runStart = col;
            if (!v && runStart >= 0) {
                Cut s = cx.cellInterval(w.first + runStart).start();
                Cut e = cx.cellInterval(w.first + col - 1).end();
                runs.push_back(*Interval::fromCuts(s, e));
                runStart = -1;
            }
        }
        return IntervalSeq::normalize(std::move(runs));
    }

    TriBit seqTruthAt(const IntervalSeq& s, long long absCell) const {
        if (s.entails(cx.cellInterval(absCell))) return kT;
        return definite ? kF : kU;
    }

    void computeShape(int si) {
        const Shape& s = cx.shapes[si];
        auto& vals = shapeVal[si];
        vals.assign(cx.L, kU);
        const IntervalSeq& A = eval(s.a.get());
        const IntervalSeq* B = s.b ? &eval(s.b.get()) : nullptr;
        long long pFirst = roundUpEven(w.first + s.lag.past);
        long long pLast = roundDownEven(w.first + cx.L - 1 - s.lag.fut);
        if (pFirst > pLast) return;
        auto MA = [&](long long cell) { return seqTruthAt(A, cell); };
        auto MB = [&](long long cell) { return seqTruthAt(*B, cell); };
        TriBit bnd = s.past ? w.pastB[s.boundaryPos] : w.futB[s.boundaryPos];
        if (s.past) {
            vals[pFirst - w.first] = bnd;
            for (long long p = pFirst + 2; p <= pLast; p += 2) {
                TriBit prev = vals[p - 2 - w.first];
                long long o = p - 1;
                TriBit open, cur;
                switch (s.op) {
                    case Op::DiamondMinus:
                        open = triOr(MA(o), prev);
                        cur = triOr(MA(p), open);
                        break;
                    case Op::BoxMinus:
                        open = triAnd(MA(o), prev);
                        cur = triAnd(MA(p), open);
                        break;
                    default: { // Since
                        TriBit zq = triOr(MB(p - 2), triAnd(prev, MA(p - 2)));
                        open = triOr(MB(o), triAnd(MA(o), zq));
                        cur = triOr(MB(p), triAnd(MA(o), triOr(MB(o), zq)));
                        break;
                    }
                }
                vals[o - w.first] = open;
                vals[p - w.first] = cur;
            }
        } else {
            vals[pLast - w.first] = bnd;
            for (long long p = pLast - 2; p >= pFirst; p -= 2) {
                TriBit nxt = vals[p + 2 - w.first];
                long long o = p + 1;
                TriBit open, cur;
                switch (s.op) {
                    case Op::DiamondPlus:
                        open = triOr(MA(o), nxt);
                        cur = triOr(MA(p), open);
                        break;
                    case Op::BoxPlus:
                        open = triAnd(MA(o), nxt);
                        cur = triAnd(MA(p), open);
                        break;
                    default: { // Until
                        TriBit zq = triOr(MB(p + 2), triAnd(nxt, MA(p + 2)));
                        open = triOr(MB(o), triAnd(MA(o), zq));
                        cur = triOr(MB(p), triAnd(MA(o), triOr(MB(o), zq)));
                        break;
                    }
                }
                vals[o - w.first] = open;
                vals[p - w.first] = cur;
            }
        }
        long long lo = pFirst - w.first, hi = pLast - w.first;
        shapeSeq[si] = seqFromBits(
            [&](long long col) { return col >= lo && col <= hi && vals[col] == kT; });
    }

    const IntervalSeq& eval(const MetricAtom* m) {
        auto it = cache.find(m);
        if (it != cache.end()) return it->second;
        IntervalSeq out;
        switch (m->op) {
            case Op::Top: out = IntervalSeq::normalize({Interval::everything()}); break;
            case Op::Bottom: break;
            case Op::Rel: {
                auto f = cx.relIdx.find(toGroundAtom(m->rel));
                if (f != cx.relIdx.end()) out = relSeq[f->second];
                break;
            }
            case Op::DiamondMinus:
            case Op::BoxMinus:
            case Op::DiamondPlus:
            case Op::BoxPlus: {
                if (m->range->hi().isPosInf()) {
                    const IntervalSeq& base = shapeSeq[cx.shapeOf.at(m)];
                    Interval shift = cx.unboundedShift(*m->range);
                    switch (m->op) {
                        case Op::DiamondMinus: out = dilateDiamondMinusSeq(base, shift); break;
                        case Op::BoxMinus: out = erodeBoxMinusSeq(base, shift); break;
                        case Op::DiamondPlus: out = dilateDiamondPlusSeq(base, shift); break;
                        default: out = erodeBoxPlusSeq(base, shift); break;
                    }
                } else {
                    const IntervalSeq& c = eval(m->a.get());
                    switch (m->op) {
                        case Op::DiamondMinus: out = dilateDiamondMinusSeq(c, *m->range); break;
                        case Op::BoxMinus: out = erodeBoxMinusSeq(c, *m->range); break;
                        case Op::DiamondPlus: out = dilateDiamondPlusSeq(c, *m->range); break;
                        default: out = erodeBoxPlusSeq(c, *m->range); break;
                    }
                }
                break;
            }
            case Op::Since:
            case Op::Until: {
                if (m->range->hi().isPosInf()) {
                    const Rational& c = m->range->lo().value();
                    const IntervalSeq& base = shapeSeq[cx.shapeOf.at(m)];
                    Interval shift = Interval::point(c);
                    IntervalSeq o = m->op == Op::Since ? dilateDiamondMinusSeq(base, shift)
                                                       : dilateDiamondPlusSeq(base, shift);
                    if (c > 0) {
                        Interval contRange =
                            *Interval::make(TimePoint(Rational(0)), false, TimePoint(c), true);
                        const IntervalSeq& m1 = eval(m->a.get());
                        o = o.intersectWith(m->op == Op::Since
                                                ? erodeBoxMinusSeq(m1, contRange)
                                                : erodeBoxPlusSeq(m1, contRange));
                    }
                    out = std::move(o);
                } else {
                    const IntervalSeq& a = eval(m->a.get());
                    const IntervalSeq& b = eval(m->b.get());
                    out = m->op == Op::Since ? evalSince(a, b, *m->range)
                                             : evalUntil(a, b, *m->range);
                }
                break;
            }
        }
        return cache.emplace(m, std::move(out)).first->second;
    }
};

// Acceptance family of one shape: an existential summary bit must see its
// witness at the probe column infinitely often (or go false); a universal
// summary that is false must see a refuting child cell.
bool famSatisfied(const Ctx& cx, WindowEval& we, int si) {
    const Shape& s = cx.shapes[si];
    long long probe = s.past ? roundUpEven(we.w.first + s.lag.past)
                             : roundDownEven(we.w.first + cx.L - 1 - s.lag.fut);
    TriBit v = we.shapeVal[si][probe - we.w.first];
    assert(v != kU);
    switch (s.op) {
        case Op::DiamondMinus:
        case Op::DiamondPlus:
            return v == kF || we.seqTruthAt(we.eval(s.a.get()), probe) == kT;
        case Op::BoxMinus:
        case Op::BoxPlus:
            return v == kT || we.seqTruthAt(we.eval(s.a.get()), probe) != kT;
        default: // Since / Until
            return v == kF || we.seqTruthAt(we.eval(s.b.get()), probe) == kT;
    }
}

// --- completion search over one window's unknown bits -----------------------

enum class SearchStatus { Yielded, Exhausted, Aborted };

struct Continuity {
    int shapeIdx = 0;
    long long absCell = 0;
    TriBit expected = kF;
};

// Three-valued DFS over the unknown bits of one window, false-first, with
// monotone rule forcing as propagation and conflict-directed backjumping.
// next() pulls one completed labelling at a time, smallest labelling first,
// so callers can explore cheap completions without paying for the rest.
class WindowSearch {
public:
    WindowSearch(Ctx& cx, long long first, std::vector<TriBit> rel, std::vector<TriBit> pastB,
                 std::vector<TriBit> futB, std::vector<Continuity> cont)
        : cx_(cx), first_(first), cont_(std::move(cont)) {
        nRelBits_ = static_cast<int>(rel.size());
        nPast_ = static_cast<int>(pastB.size());
        nFut_ = static_cast<int>(futB.size());
        val_.reserve(rel.size() + pastB.size() + futB.size());
        val_.insert(val_.end(), rel.begin(), rel.end());
        val_.insert(val_.end(), pastB.begin(), pastB.end());
        val_.insert(val_.end(), futB.begin(), futB.end());
        cause_.assign(val_.size(), 0);
    }

    SearchStatus next(Labelling& out) {
        if (!started_) {
            started_ = true;
            if (!cx_.tick()) return SearchStatus::Aborted;
            if (!propagate(0)) return SearchStatus::Exhausted;
        } else if (!backtrackTo(static_cast<int>(decs_.size()))) {
            return SearchStatus::Exhausted;
        }
        while (true) {
            if (cx_.aborted) return SearchStatus::Aborted;
            int bit = nextUnknown();
            if (bit < 0) {
                int cl = 0;
                if (finalCheck(cl)) {
                    out = snapshot();
                    return SearchStatus::Yielded;
                }
                if (!backtrackTo(cl)) return SearchStatus::Exhausted;
                continue;
            }
            if (!cx_.tick()) return SearchStatus::Aborted;
            decs_.push_back({bit, false, trail_.size()});
            assignBit(bit, kF, static_cast<int>(decs_.size()));
        }
    }

private:
    struct Dec {
        int bit;
        bool flipped;
        std::size_t mark;
    };

    Ctx& cx_;
    long long first_;
    int nRelBits_ = 0, nPast_ = 0, nFut_ = 0;
    bool started_ = false;
    std::vector<TriBit> val_;
    std::vector<int> cause_;
    std::vector<int> trail_;
    std::vector<Dec> decs_;
    std::vector<Continuity> cont_;
    int conflictLevel_ = 0;

    void assignBit(int bit, TriBit v, int level) {
        val_[bit] = v;
        cause_[bit] = level;
        trail_.push_back(bit);
    }

    void undoTo(std::size_t mark) {
        while (trail_.size() > mark) {
            int bit = trail_.back();
            trail_.pop_back();
            val_[bit] = kU;
            cause_[bit] = 0;
        }
    }

    int nextUnknown() const {
        for (int i = nRelBits_; i < nRelBits_ + nPast_; ++i)
            if (val_[i] == kU) return i;
        for (int i = 0; i < nRelBits_; ++i)
            if (val_[i] == kU) return i;
        for (int i = nRelBits_ + nPast_; i < static_cast<int>(val_.size()); ++i)
            if (val_[i] == kU) return i;
        return -1;
    }

    Labelling snapshot() const {
        Labelling lab;
        lab.first = first_;
        lab.rel.assign(val_.begin(), val_.begin() + nRelBits_);
        lab.pastB.assign(val_.begin() + nRelBits_, val_.begin() + nRelBits_ + nPast_);
        lab.futB.assign(val_.begin() + nRelBits_ + nPast_, val_.end());
        return lab;
    }

    // Highest decision level among the true bits a rule application at `col`
    // can depend on. Rules touching summary shapes may depend on bits across
    // the whole window, so they fall back to the current level (chronological
    // backtracking); purely bounded rules read only their guard span.
    int causeFor(const GRule& r, long long col) const {
        if (r.usesShapes) return static_cast<int>(decs_.size());
        int c = 0;
        long long lo = std::max<long long>(0, col - r.gP);
        long long hi = std::min<long long>(cx_.L - 1, col + r.gF);
        for (long long cc = lo; cc <= hi; ++cc)
            for (int a = 0; a < cx_.nRel; ++a) {
                int bit = static_cast<int>(cc) * cx_.nRel + a;
                if (val_[bit] == kT) c = std::max(c, cause_[bit]);
            }
        return c;
    }

    bool propagate(int level) {
        (void)level;
        bool changed = true;
        while (changed) {
            changed = false;
            Labelling lab = snapshot();
            WindowEval we(cx_, lab, false);
            for (const GRule& r : cx_.rules) {
                bool dead = false;
                std::vector<const IntervalSeq*> seqs;
                seqs.reserve(r.rule.body.size());
                for (const AtomPtr& b : r.rule.body) {
                    const IntervalSeq& s = we.eval(b.get());
                    if (s.empty()) {
                        dead = true;
                        break;
                    }
                    seqs.push_back(&s);
                }
                if (dead) continue;
                for (long long col = r.gP; col + r.gF < cx_.L; ++col) {
                    Interval civ = cx_.cellInterval(first_ + col);
                    bool all = true;
                    for (const IntervalSeq* s : seqs)
                        if (!s->entails(civ)) {
                            all = false;
                            break;
                        }
                    if (!all) continue;
                    if (r.bottom) {
                        conflictLevel_ = causeFor(r, col);
                        return false;
                    }
                    if (!r.forcible) continue;
                    Interval req = civ;
                    for (const auto& [op, rng] : r.headOps)
                        req = op == Op::BoxPlus ? dilateDiamondMinus(req, rng)
                                                : dilateDiamondPlus(req, rng);
                    auto [clo, chi] = cx_.cellRange(req, first_);
                    for (long long rc = clo; rc <= chi; ++rc) {
                        int bit = static_cast<int>(rc - first_) * cx_.nRel + r.headAtom;
                        if (val_[bit] == kT) continue;
                        int cl = causeFor(r, col);
                        if (val_[bit] == kF) {
                            conflictLevel_ = std::max(cl, cause_[bit]);
                            return false;
                        }
                        assignBit(bit, kT, cl);
                        changed = true;
                    }
                }
            }
        }
        return true;
    }

    bool finalCheck(int& cl) {
        Labelling lab = snapshot();
        WindowEval we(cx_, lab, true);
        for (const GRule& r : cx_.rules) {
            bool dead = false;
            std::vector<const IntervalSeq*> seqs;
            seqs.reserve(r.rule.body.size());
            for (const AtomPtr& b : r.rule.body) {
                const IntervalSeq& s = we.eval(b.get());
                if (s.empty()) {
                    dead = true;
                    break;
                }
                seqs.push_back(&s);
            }
            if (dead) continue;
            const IntervalSeq* head = r.bottom ? nullptr : &we.eval(r.rule.head.get());
            for (long long col = r.gP; col + r.gF < cx_.L; ++col) {
                Interval civ = cx_.cellInterval(first_ + col);
                bool all = true;
                for (const IntervalSeq* s : seqs)
                    if (!s->entails(civ)) {
                        all = false;
                        break;
                    }
                if (!all) continue;
                if (r.bottom || !head->entails(civ)) {
                    cl = causeFor(r, col);
                    return false;
                }
            }
        }
        for (const Continuity& c : cont_) {
            if (we.shapeVal[c.shapeIdx][c.absCell - first_] != c.expected) {
                cl = static_cast<int>(decs_.size());
                return false;
            }
        }
        return true;
    }

    bool backtrackTo(int cl) {
        while (!decs_.empty()) {
            if (static_cast<int>(decs_.size()) > cl) {
                Dec d = decs_.back();
                decs_.pop_back();
                undoTo(d.mark);
                continue;
            }
            Dec& d = decs_.back();
            if (d.flipped) {
                std::size_t mark = d.mark;
                decs_.pop_back();
                undoTo(mark);
                cl = static_cast<int>(decs_.size());
                continue;
            }
            undoTo(d.mark);
            d.flipped = true;
            assignBit(d.bit, kT, static_cast<int>(decs_.size()));
            if (propagate(static_cast<int>(decs_.size()))) return true;
            cl = conflictLevel_;
        }
        return false;
    }
};

// --- the two Büchi automata --------------------------------------------------

std::vector<std::uint8_t> makeKey(const Ctx& cx, const Labelling& lab, int counter, bool right) {
    std::vector<std::uint8_t> key;
    key.reserve(lab.rel.size() / 8 + lab.pastB.size() + lab.futB.size() + 16);
    std::uint8_t acc = 0;
    int nb = 0;
    auto pushBit = [&](bool b) {
        acc = static_cast<std::uint8_t>((acc << 1) | (b ? 1 : 0));
        if (++nb == 8) {
            key.push_back(acc);
            acc = 0;
            nb = 0;
        }
    };
    for (TriBit v : lab.rel) pushBit(v == kT);
    for (TriBit v : lab.pastB) pushBit(v == kT);
    for (TriBit v : lab.futB) pushBit(v == kT);
    if (nb) key.push_back(static_cast<std::uint8_t>(acc << (8 - nb)));

    // Windows strictly beyond the dataset span behave identically up to
    // translation by a whole grid step, so their absolute position is dropped
    // (only the cell parity is kept); that is what lets runs form lassos.
    bool positionless = right ? lab.first > cx.dHiCell : lab.first + cx.L - 1 < 0;
    long long token = positionless ? std::numeric_limits<long long>::max() : lab.first;
    for (int i = 0; i < 8; ++i) key.push_back(static_cast<std::uint8_t>(token >> (8 * i)));
    key.push_back(static_cast<std::uint8_t>(lab.first & 1LL));
    key.push_back(static_cast<std::uint8_t>(counter));
    return key;
}

struct KeyHash {
    std::size_t operator()(const std::vector<std::uint8_t>& v) const {
        return boost::hash_range(v.begin(), v.end());
    }
};

class DirAutomaton {
public:
    DirAutomaton(Ctx& cx, bool right) : cx_(cx), right_(right) {
        const auto& fams = right_ ? cx_.futShapes : cx_.pastShapes;
        m_ = std::max<int>(1, static_cast<int>(fams.size()));
    }

    // 1 = accepting run found, 0 = none reachable, 2 = aborted (budget/cancel).
    //
    // Nested depth-first search with lazily pulled successors: each frame asks
    // its completion search for one child at a time, smallest first, so a run
    // that only ever takes the least completion reaches the translation-
    // invariant tail and closes a lasso after linearly many states instead of
    // enumerating the exponentially many sibling completions up front. A cycle
    // through the stack is accepted on sight when the looped segment holds an
    // accepting state; the red search keeps completeness for the rest.
    int nonEmptyFrom(const Labelling& init) {
        int root = intern(init, 0);
        if (root < 0) return 2;
        if (states_[root].hasRun) return 1;
        if (states_[root].blue) return 0;
        struct Frame {
            int sid = -1;
            std::unique_ptr<WindowSearch> gen; // null when succ is memoised
            std::size_t idx = 0;               // cursor into memoised succ
            std::vector<int> got;              // children pulled so far
            int accDepth = -1; // deepest accepting depth at or below this frame
        };
        std::vector<Frame> stk;
        auto push = [&](int sid) {
            Frame f;
            f.sid = sid;
            states_[sid].blue = true;
            states_[sid].onstack = true;
            states_[sid].depth = static_cast<int>(stk.size());
            int below = stk.empty() ? -1 : stk.back().accDepth;
            f.accDepth = states_[sid].accepting ? states_[sid].depth : below;
            if (!states_[sid].succ) f.gen = makeSuccGen(sid);
            stk.push_back(std::move(f));
        };
        // States still on the stack were not exhaustively explored, so their
        // blue marks are not emptiness proofs for later searches; when a run
        // is found they are exactly the states known to reach its cycle.
        auto foundRun = [&] {
            for (Frame& f : stk) {
                states_[f.sid].blue = false;
                states_[f.sid].onstack = false;
                states_[f.sid].hasRun = true;
            }
            return 1;
        };
        auto aborted = [&] {
            for (Frame& f : stk) {
                states_[f.sid].blue = false;
                states_[f.sid].onstack = false;
            }
            return 2;
        };
        push(root);
        while (!stk.empty()) {
            Frame& f = stk.back();
            int child = -1;
            if (states_[f.sid].succ) {
                const std::vector<int>& s = *states_[f.sid].succ;
                if (f.idx < s.size()) child = s[f.idx++];
            } else {
                Labelling lab;
                SearchStatus st = f.gen->next(lab);
                if (st == SearchStatus::Aborted) return aborted();
                if (st == SearchStatus::Yielded) {
                    if (cx_.stats) cx_.stats->transitions++;
                    child = intern(lab, states_[f.sid].nextCounter);
                    if (child < 0) return aborted();
                    f.got.push_back(child);
                }
            }
            if (child >= 0) {
                StateEntry& ce = states_[child];
                if (ce.hasRun) return foundRun();
                if (ce.onstack) {
                    if (stk.back().accDepth >= ce.depth) return foundRun();
                    continue;
                }
                if (!ce.blue) push(child);
                continue;
            }
            // Every successor is known: memoise the list and pop in post-order.
            int sid = f.sid;
            if (!states_[sid].succ) states_[sid].succ = std::move(f.got);
            if (states_[sid].accepting && !states_[sid].red) {
                int r = redSearch(sid);
                if (r == 1) return foundRun();
                if (r == 2) return aborted();
            }
            states_[sid].onstack = false;
            stk.pop_back();
        }
        return 0;
    }

private:
    struct StateEntry {
        Labelling lab;
        int counter = 0;
        int nextCounter = 0;
        int depth = 0; // blue-stack depth, meaningful while onstack
        bool accepting = false;
        bool blue = false, red = false, onstack = false, hasRun = false;
        std::optional<std::vector<int>> succ;
    };

    Ctx& cx_;
    bool right_;
    int m_ = 1;
    std::unordered_map<std::vector<std::uint8_t>, int, KeyHash> ids_;
    std::vector<StateEntry> states_;

    int intern(const Labelling& lab, int counter) {
        std::vector<std::uint8_t> key = makeKey(cx_, lab, counter, right_);
        auto it = ids_.find(key);
        if (it != ids_.end()) return it->second;
        if (!cx_.tick()) return -1;
        StateEntry e;
        e.lab = lab;
        e.counter = counter;
        const auto& fams = right_ ? cx_.futShapes : cx_.pastShapes;
        bool sat = true;
        if (!fams.empty()) {
            WindowEval we(cx_, e.lab, true);
            sat = famSatisfied(cx_, we, fams[counter]);
        }
        e.nextCounter = (counter + (sat ? 1 : 0)) % m_;
        e.accepting = sat && counter == m_ - 1;
        int id = static_cast<int>(states_.size());
        states_.push_back(std::move(e));
        ids_.emplace(std::move(key), id);
        return id;
    }

    std::unique_ptr<WindowSearch> makeSuccGen(int sid) {
        Labelling P = states_[sid].lab; // copy: states_ may reallocate later
        WindowEval pe(cx_, P, true);
        long long nf = P.first + (right_ ? 1 : -1);

        std::vector<TriBit> rel(P.rel.size(), kU);
        std::vector<TriBit> pastB(cx_.pastShapes.size(), kU);
        std::vector<TriBit> futB(cx_.futShapes.size(), kU);
        std::vector<Continuity> cont;

        for (long long col = 0; col < cx_.L; ++col) {
            long long src = right_ ? col + 1 : col - 1;
            if (src < 0 || src >= cx_.L) continue;
            for (int a = 0; a < cx_.nRel; ++a)
                rel[col * cx_.nRel + a] = P.rel[src * cx_.nRel + a];
        }
        long long newCol = right_ ? cx_.L - 1 : 0;
        for (int a = 0; a < cx_.nRel; ++a)
            if (cx_.forcedSeq[a].entails(cx_.cellInterval(nf + newCol)))
                rel[newCol * cx_.nRel + a] = kT;

        for (std::size_t i = 0; i < cx_.pastShapes.size(); ++i) {
            int si = cx_.pastShapes[i];
            const Shape& s = cx_.shapes[si];
            long long np0 = roundUpEven(nf + s.lag.past);
            long long pp0 = roundUpEven(P.first + s.lag.past);
            if (right_) {
                pastB[i] = pe.shapeVal[si][np0 - P.first];
            } else if (np0 == pp0) {
                pastB[i] = pe.shapeVal[si][pp0 - P.first];
            } else {
                // The guessed boundary moved one grid step left: the forward
                // recurrence from the new guess must reproduce the old value.
                cont.push_back({si, pp0, pe.shapeVal[si][pp0 - P.first]});
            }
        }
        for (std::size_t i = 0; i < cx_.futShapes.size(); ++i) {
            int si = cx_.futShapes[i];
            const Shape& s = cx_.shapes[si];
            long long np1 = roundDownEven(nf + cx_.L - 1 - s.lag.fut);
            long long pp1 = roundDownEven(P.first + cx_.L - 1 - s.lag.fut);
            if (!right_) {
                futB[i] = pe.shapeVal[si][np1 - P.first];
            } else if (np1 == pp1) {
                futB[i] = pe.shapeVal[si][pp1 - P.first];
            } else {
                cont.push_back({si, pp1, pe.shapeVal[si][pp1 - P.first]});
            }
        }

        return std::make_unique<WindowSearch>(cx_, nf, std::move(rel), std::move(pastB),
                                              std::move(futB), std::move(cont));
    }

    // Full successor list, expanding on demand (the red search only ever sees
    // states whose blue exploration completed, so this usually just returns
    // the memoised list).
    const std::vector<int>* successors(int sid) {
        if (!states_[sid].succ) {
            std::unique_ptr<WindowSearch> gen = makeSuccGen(sid);
            std::vector<int> out;
            Labelling lab;
            while (true) {
                SearchStatus st = gen->next(lab);
                if (st == SearchStatus::Aborted) return nullptr;
                if (st == SearchStatus::Exhausted) break;
                if (cx_.stats) cx_.stats->transitions++;
                int id = intern(lab, states_[sid].nextCounter);
                if (id < 0) return nullptr;
                out.push_back(id);
            }
            states_[sid].succ = std::move(out);
        }
        return &*states_[sid].succ;
    }

    int redSearch(int seed) {
        std::vector<int> stk{seed};
        std::vector<int> marked{seed};
        states_[seed].red = true;
        while (!stk.empty()) {
            int sid = stk.back();
            stk.pop_back();
            const std::vector<int>* succ = successors(sid);
            if (!succ) return 2;
            for (int t : *succ) {
                if (states_[t].onstack) {
                    // This red search did not complete, so its marks prove
                    // nothing; the blue search unwinds the rest.
                    for (int s : marked) states_[s].red = false;
                    return 1;
                }
                if (!states_[t].red) {
                    states_[t].red = true;
                    marked.push_back(t);
                    stk.push_back(t);
                }
            }
        }
        return 0;
    }
};

void dumpWindow(const Ctx& cx, const Labelling& lab) {
    std::ostream& os = *cx.dbg;
    os << "window: cells " << lab.first << ".." << (lab.first + cx.L - 1) << "\n";
    for (long long col = 0; col < cx.L; ++col) {
        std::string names;
        for (int a = 0; a < cx.nRel; ++a)
            if (lab.rel[col * cx.nRel + a] == kT)
                names += (names.empty() ? "" : " ") + printRelAtom(*cx.syms, toRelAtom(cx.relAtoms[a]));
        if (!names.empty())
            os << "  " << cx.cellInterval(lab.first + col).str() << ": " << names << "\n";
    }
}

} // namespace

ConsistencyVerdict checkConsistency(const Program& program, const Dataset& dataset,
                                    const SymbolTable& syms, const AutomataOptions& opts,
                                    AutomataStats* stats) {
    AutomataStats local;
    if (!stats) stats = &local;
    *stats = {};

    Ctx cx = buildCtx(program, dataset, syms, opts, *stats);

    DirAutomaton rightA(cx, true);
    DirAutomaton leftA(cx, false);
    bool consistent = false;

    std::vector<TriBit> rel(static_cast<std::size_t>(cx.L) * cx.nRel, kU);
    for (long long col = 0; col < cx.L; ++col)
        for (int a = 0; a < cx.nRel; ++a)
            if (cx.forcedSeq[a].entails(cx.cellInterval(cx.firstInit + col)))
                rel[col * cx.nRel + a] = kT;

    WindowSearch init(cx, cx.firstInit, std::move(rel),
                      std::vector<TriBit>(cx.pastShapes.size(), kU),
                      std::vector<TriBit>(cx.futShapes.size(), kU), {});
    Labelling lab;
    while (init.next(lab) == SearchStatus::Yielded) {
        if (cx.stats) cx.stats->initialWindows++;
        if (cx.dbg) dumpWindow(cx, lab);
        int r = rightA.nonEmptyFrom(lab);
        if (r == 2) break;
        if (r == 0) continue;
        int l = leftA.nonEmptyFrom(lab);
        if (l == 2) break;
        if (l == 0) continue;
        consistent = true;
        break;
    }

    if (cx.aborted) return ConsistencyVerdict::BudgetExceeded;
    return consistent ? ConsistencyVerdict::Consistent : ConsistencyVerdict::Inconsistent;
}

} // namespace dmtl
