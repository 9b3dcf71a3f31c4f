#pragma once

#include "dmtl/time.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dmtl {

// A Cut is a position *between* timeline points: (v, 0) sits immediately
// before v, (v, 1) immediately after it. Every interval, whatever its
// brackets, is the half-open cut range [start, end):
//
//   [a, b] = [(a,0), (b,1))     (a, b] = [(a,1), (b,1))
//   [a, b) = [(a,0), (b,0))     (a, b) = [(a,1), (b,0))
//
// This turns bracket bookkeeping in intersection/union/subtraction into
// plain total-order comparisons. Infinite cuts are normalised so that a
// start at -inf is (-inf,1) and an end at +inf is (+inf,0).
struct Cut {
    TimePoint v;
    std::uint8_t eps = 0;

    friend bool operator==(const Cut& a, const Cut& b) {
        return a.eps == b.eps && a.v == b.v;
    }
    friend std::strong_ordering operator<=>(const Cut& a, const Cut& b) {
        if (auto c = a.v <=> b.v; c != std::strong_ordering::equal) return c;
        return a.eps <=> b.eps;
    }
};

class Interval {
public:
    // Factories return nullopt when the described set is empty. Brackets at
    // infinities are forced open.
    static std::optional<Interval> make(TimePoint lo, bool loClosed, TimePoint hi,
                                        bool hiClosed);
    static std::optional<Interval> fromCuts(Cut start, Cut end);
    static Interval point(const Rational& t);
    static Interval closed(const Rational& lo, const Rational& hi);
    static Interval everything();

    const Cut& start() const { return start_; }
    const Cut& end() const { return end_; }
    const TimePoint& lo() const { return start_.v; }
    const TimePoint& hi() const { return end_.v; }
    bool loClosed() const { return start_.eps == 0; }
    bool hiClosed() const { return end_.eps == 1; }
    bool isPunctual() const { return lo() == hi(); }
    bool isBounded() const { return lo().isFinite() && hi().isFinite(); }

    std::string str() const;

    friend bool operator==(const Interval& a, const Interval& b) {
        return a.start_ == b.start_ && a.end_ == b.end_;
    }

private:
    Interval(Cut s, Cut e) : start_(s), end_(e) {}
    Cut start_;
    Cut end_;
};

bool containsPoint(const Interval& iv, const TimePoint& t);
bool contains(const Interval& outer, const Interval& inner);
bool unionCompatible(const Interval& a, const Interval& b);
std::optional<Interval> intersect(const Interval& a, const Interval& b);
// Smallest interval covering both; only meaningful when unionCompatible.
Interval hull(const Interval& a, const Interval& b);

// Single-interval union when the operands overlap or are adjacent, nullopt
// otherwise (the union of separated intervals is not an interval).
std::optional<Interval> coalescePair(const Interval& a, const Interval& b);

// shiftMinus(t, r) = { t' : t - t' in r },  shiftPlus(t, r) = { t' : t' - t in r }.
// t must be finite; r is a non-negative range so the results are never empty.
Interval shiftMinus(const TimePoint& t, const Interval& range);
Interval shiftPlus(const TimePoint& t, const Interval& range);

// Pointwise semantics of the four unary operators, lifted to a single source
// interval I of the operand:
//   diamondMinus: { t : exists u in I with t - u in r }  (Minkowski sum)
//   diamondPlus : { t : exists u in I with u - t in r }
//   boxMinus    : { t : shiftMinus(t, r) subset of I }   (erosion; may be empty)
//   boxPlus     : { t : shiftPlus(t, r) subset of I }
Interval dilateDiamondMinus(const Interval& iv, const Interval& range);
Interval dilateDiamondPlus(const Interval& iv, const Interval& range);
std::optional<Interval> erodeBoxMinus(const Interval& iv, const Interval& range);
std::optional<Interval> erodeBoxPlus(const Interval& iv, const Interval& range);

// Sorted list of pairwise non-union-compatible intervals: the unique maximal
// representation of a set of timeline points. All mutators preserve this.
class IntervalSeq {
public:
    struct InsertOutcome {
        bool added = false;              // some sub-interval was not covered before
        std::vector<Interval> newPieces; // exactly the freshly covered sub-intervals
    };

    IntervalSeq() = default;
    static IntervalSeq normalize(std::vector<Interval> ivs);

    InsertOutcome insertCoalescing(const Interval& iv);
    // True when some member fully covers iv.
    bool entails(const Interval& iv) const;
    bool containsPoint(const TimePoint& t) const;

    void subtract(const Interval& iv);
    void subtractSeq(const IntervalSeq& other);
    IntervalSeq intersectWith(const IntervalSeq& other) const;
    IntervalSeq unionWith(const IntervalSeq& other) const;
    IntervalSeq clip(const Interval& window) const;
    IntervalSeq complementWithin(const Interval& window) const;

    bool empty() const { return v_.empty(); }
    std::size_t size() const { return v_.size(); }
    const Interval& operator[](std::size_t i) const { return v_[i]; }
    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }
    const std::vector<Interval>& items() const { return v_; }

    std::string str() const;
    friend bool operator==(const IntervalSeq& a, const IntervalSeq& b) = default;

private:
    std::vector<Interval> v_;
};

// Operator application to a whole truth set. Erosion distributes over the
// members only because the members are pairwise separated; that invariant is
// what IntervalSeq maintains.
IntervalSeq dilateDiamondMinusSeq(const IntervalSeq& s, const Interval& range);
IntervalSeq dilateDiamondPlusSeq(const IntervalSeq& s, const Interval& range);
IntervalSeq erodeBoxMinusSeq(const IntervalSeq& s, const Interval& range);
IntervalSeq erodeBoxPlusSeq(const IntervalSeq& s, const Interval& range);

// "m1 since[r] m2" / "m1 until[r] m2" over the operands' truth sets.
IntervalSeq evalSince(const IntervalSeq& m1, const IntervalSeq& m2, const Interval& range);
IntervalSeq evalUntil(const IntervalSeq& m1, const IntervalSeq& m2, const Interval& range);

// Sort-merge sweep over n truth sets: invokes `emit` once per tuple of
// members with a non-empty common intersection, in increasing order of meet.
// `idx[i]` is the member index into `lists[i]`. Linear in the total number of
// intervals plus the number of emitted tuples.
void sweepJoin(std::span<const IntervalSeq* const> lists,
               const std::function<void(std::span<const std::size_t>, const Interval&)>& emit);

} // namespace dmtl
