#include "dmtl/interval.hpp"

#include <algorithm>
#include <cassert>

namespace dmtl {

namespace {

Cut normStart(Cut c) {
    if (c.v.isNegInf()) c.eps = 1;
    if (c.v.isPosInf()) c.eps = 0;
    return c;
}

Cut normEnd(Cut c) {
    if (c.v.isPosInf()) c.eps = 0;
    if (c.v.isNegInf()) c.eps = 1;
    return c;
}

Cut negInfStart() { return Cut{TimePoint::negInf(), 1}; }
Cut posInfEnd() { return Cut{TimePoint::posInf(), 0}; }

// Positive part of the lag range, excluding the lag 0: the "strictly earlier
// witness" region used by since/until. Empty exactly for the range [0,0].
std::optional<Interval> stripZero(const Interval& range) {
    Cut floor{TimePoint(Rational(0)), 1};
    return Interval::fromCuts(std::max(range.start(), floor), range.end());
}

} // namespace

std::optional<Interval> Interval::make(TimePoint lo, bool loClosed, TimePoint hi,
                                       bool hiClosed) {
    Cut s{std::move(lo), static_cast<std::uint8_t>(loClosed ? 0 : 1)};
    Cut e{std::move(hi), static_cast<std::uint8_t>(hiClosed ? 1 : 0)};
    return fromCuts(s, e);
}

std::optional<Interval> Interval::fromCuts(Cut start, Cut end) {
    start = normStart(start);
    end = normEnd(end);
    if (!(start < end)) return std::nullopt;
    return Interval(start, end);
}

Interval Interval::point(const Rational& t) {
    return Interval(Cut{TimePoint(t), 0}, Cut{TimePoint(t), 1});
}

Interval Interval::closed(const Rational& lo, const Rational& hi) {
    assert(lo <= hi);
    return Interval(Cut{TimePoint(lo), 0}, Cut{TimePoint(hi), 1});
}

Interval Interval::everything() {
    return Interval(negInfStart(), posInfEnd());
}

std::string Interval::str() const {
    std::string out;
    out += loClosed() ? '[' : '(';
    out += lo().str();
    out += ',';
    out += hi().str();
    out += hiClosed() ? ']' : ')';
    return out;
}

bool containsPoint(const Interval& iv, const TimePoint& t) {
    Cut c{t, 0};
    return !(c < iv.start()) && c < iv.end();
}

bool contains(const Interval& outer, const Interval& inner) {
    return !(inner.start() < outer.start()) && !(outer.end() < inner.end());
}

bool unionCompatible(const Interval& a, const Interval& b) {
    // No gap between them: each one's end reaches the other's start.
    return !(a.end() < b.start()) && !(b.end() < a.start());
}

std::optional<Interval> intersect(const Interval& a, const Interval& b) {
    return Interval::fromCuts(std::max(a.start(), b.start()), std::min(a.end(), b.end()));
}

Interval hull(const Interval& a, const Interval& b) {
    auto h = Interval::fromCuts(std::min(a.start(), b.start()), std::max(a.end(), b.end()));
    assert(h);
    return *h;
}

std::optional<Interval> coalescePair(const Interval& a, const Interval& b) {
    if (!unionCompatible(a, b)) return std::nullopt;
    return hull(a, b);
}

Interval shiftMinus(const TimePoint& t, const Interval& range) {
    assert(t.isFinite());
    // Reflection of the range translated to t: brackets swap sides.
    Cut s{t - range.end().v, static_cast<std::uint8_t>(1 - range.end().eps)};
    Cut e{t - range.start().v, static_cast<std::uint8_t>(1 - range.start().eps)};
    auto iv = Interval::fromCuts(s, e);
    assert(iv);
    return *iv;
}

Interval shiftPlus(const TimePoint& t, const Interval& range) {
    assert(t.isFinite());
    Cut s{t + range.start().v, range.start().eps};
    Cut e{t + range.end().v, range.end().eps};
    auto iv = Interval::fromCuts(s, e);
    assert(iv);
    return *iv;
}

Interval dilateDiamondMinus(const Interval& iv, const Interval& range) {
    Cut s{iv.start().v + range.start().v, std::max(iv.start().eps, range.start().eps)};
    Cut e{iv.end().v + range.end().v, std::min(iv.end().eps, range.end().eps)};
    auto out = Interval::fromCuts(s, e);
    assert(out);
    return *out;
}

Interval dilateDiamondPlus(const Interval& iv, const Interval& range) {
    Cut s{iv.start().v - range.end().v,
          std::max(iv.start().eps, static_cast<std::uint8_t>(1 - range.end().eps))};
    Cut e{iv.end().v - range.start().v,
          std::min(iv.end().eps, static_cast<std::uint8_t>(1 - range.start().eps))};
    auto out = Interval::fromCuts(s, e);
    assert(out);
    return *out;
}

std::optional<Interval> erodeBoxMinus(const Interval& iv, const Interval& range) {
    Cut e{iv.end().v + range.start().v, std::max(iv.end().eps, range.start().eps)};
    Cut s;
    if (range.hi().isPosInf()) {
        // The whole past must lie inside iv.
        if (!iv.lo().isNegInf()) return std::nullopt;
        s = negInfStart();
    } else {
        s = Cut{iv.start().v + range.end().v, std::min(iv.start().eps, range.end().eps)};
    }
    return Interval::fromCuts(s, e);
}

std::optional<Interval> erodeBoxPlus(const Interval& iv, const Interval& range) {
    Cut s{iv.start().v - range.start().v,
          std::min(iv.start().eps, static_cast<std::uint8_t>(1 - range.start().eps))};
    Cut e;
    if (range.hi().isPosInf()) {
        if (!iv.hi().isPosInf()) return std::nullopt;
        e = posInfEnd();
    } else {
        e = Cut{iv.end().v - range.end().v,
                std::max(iv.end().eps, static_cast<std::uint8_t>(1 - range.end().eps))};
    }
    return Interval::fromCuts(s, e);
}

IntervalSeq IntervalSeq::normalize(std::vector<Interval> ivs) {
    std::sort(ivs.begin(), ivs.end(),
              [](const Interval& a, const Interval& b) { return a.start() < b.start(); });
    IntervalSeq out;
    for (const Interval& iv : ivs) {
        if (!out.v_.empty() && !(out.v_.back().end() < iv.start())) {
            Cut e = std::max(out.v_.back().end(), iv.end());
            out.v_.back() = *Interval::fromCuts(out.v_.back().start(), e);
        } else {
            out.v_.push_back(iv);
        }
    }
    return out;
}

IntervalSeq::InsertOutcome IntervalSeq::insertCoalescing(const Interval& iv) {
    InsertOutcome outcome;
    // Members are disjoint and sorted, so their ends are sorted too: find the
    // first member whose end reaches iv's start (candidates for overlap/touch).
    auto first = std::lower_bound(v_.begin(), v_.end(), iv.start(),
                                  [](const Interval& m, const Cut& c) { return m.end() < c; });
    auto last = first;
    Cut cur = iv.start();
    while (last != v_.end() && !(iv.end() < last->start())) {
        // Gap before this member that iv newly covers (strict overlap only).
        Cut gapEnd = std::min(last->start(), iv.end());
        if (cur < gapEnd) {
            outcome.newPieces.push_back(*Interval::fromCuts(cur, gapEnd));
        }
        cur = std::max(cur, last->end());
        ++last;
    }
    if (cur < iv.end()) {
        outcome.newPieces.push_back(*Interval::fromCuts(cur, iv.end()));
    }
    outcome.added = !outcome.newPieces.empty();

    if (first == last) {
        v_.insert(first, iv);
        return outcome;
    }
    Cut s = std::min(first->start(), iv.start());
    Cut e = std::max(std::prev(last)->end(), iv.end());
    *first = *Interval::fromCuts(s, e);
    v_.erase(first + 1, last);
    return outcome;
}

bool IntervalSeq::entails(const Interval& iv) const {
    auto it = std::lower_bound(v_.begin(), v_.end(), iv.start(),
                               [](const Interval& m, const Cut& c) { return m.end() < c; });
    return it != v_.end() && contains(*it, iv);
}

bool IntervalSeq::containsPoint(const TimePoint& t) const {
    Cut c{t, 0};
    auto it = std::lower_bound(v_.begin(), v_.end(), c,
                               [](const Interval& m, const Cut& x) { return !(x < m.end()); });
    return it != v_.end() && dmtl::containsPoint(*it, t);
}

void IntervalSeq::subtract(const Interval& iv) {
    std::vector<Interval> out;
    out.reserve(v_.size() + 1);
    for (const Interval& m : v_) {
        auto leftPart = Interval::fromCuts(m.start(), std::min(m.end(), iv.start()));
        auto rightPart = Interval::fromCuts(std::max(m.start(), iv.end()), m.end());
        if (leftPart) out.push_back(*leftPart);
        if (rightPart) out.push_back(*rightPart);
    }
    v_ = std::move(out);
}

void IntervalSeq::subtractSeq(const IntervalSeq& other) {
    for (const Interval& iv : other.v_) subtract(iv);
}

IntervalSeq IntervalSeq::intersectWith(const IntervalSeq& other) const {
    IntervalSeq out;
    std::size_t i = 0, j = 0;
    while (i < v_.size() && j < other.v_.size()) {
        if (auto m = intersect(v_[i], other.v_[j])) out.v_.push_back(*m);
        if (v_[i].end() < other.v_[j].end()) {
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

IntervalSeq IntervalSeq::unionWith(const IntervalSeq& other) const {
    std::vector<Interval> all(v_);
    all.insert(all.end(), other.v_.begin(), other.v_.end());
    return normalize(std::move(all));
}

IntervalSeq IntervalSeq::clip(const Interval& window) const {
    IntervalSeq out;
    for (const Interval& m : v_) {
        if (auto p = intersect(m, window)) out.v_.push_back(*p);
    }
    return out;
}

IntervalSeq IntervalSeq::complementWithin(const Interval& window) const {
    IntervalSeq out;
    out.v_.push_back(window);
    out.subtractSeq(*this);
    return out;
}

std::string IntervalSeq::str() const {
    std::string out = "{";
    for (std::size_t i = 0; i < v_.size(); ++i) {
        if (i) out += ", ";
        out += v_[i].str();
    }
    out += "}";
    return out;
}

namespace {

template <typename F>
IntervalSeq mapMembers(const IntervalSeq& s, F&& f) {
    std::vector<Interval> out;
    out.reserve(s.size());
    for (const Interval& m : s) {
        if (auto r = f(m)) out.push_back(*r);
    }
    return IntervalSeq::normalize(std::move(out));
}

} // namespace

IntervalSeq dilateDiamondMinusSeq(const IntervalSeq& s, const Interval& range) {
    return mapMembers(s, [&](const Interval& m) -> std::optional<Interval> {
        return dilateDiamondMinus(m, range);
    });
}

IntervalSeq dilateDiamondPlusSeq(const IntervalSeq& s, const Interval& range) {
    return mapMembers(s, [&](const Interval& m) -> std::optional<Interval> {
        return dilateDiamondPlus(m, range);
    });
}

IntervalSeq erodeBoxMinusSeq(const IntervalSeq& s, const Interval& range) {
    return mapMembers(s, [&](const Interval& m) { return erodeBoxMinus(m, range); });
}

IntervalSeq erodeBoxPlusSeq(const IntervalSeq& s, const Interval& range) {
    return mapMembers(s, [&](const Interval& m) { return erodeBoxPlus(m, range); });
}

IntervalSeq evalSince(const IntervalSeq& m1, const IntervalSeq& m2, const Interval& range) {
    std::vector<Interval> parts;
    // Lag 0: the witness time is t itself and the continuity slice is empty.
    if (containsPoint(range, TimePoint(Rational(0)))) {
        for (const Interval& w : m2) parts.push_back(w);
    }
    auto strict = stripZero(range);
    if (strict) {
        for (const Interval& i1 : m1) {
            // Witness at or after i1's left edge, result at or before its
            // right edge; the open slice in between then sits in i1's interior.
            Cut from{i1.lo(), static_cast<std::uint8_t>(i1.lo().isNegInf() ? 1 : 0)};
            Cut to{i1.hi(), static_cast<std::uint8_t>(i1.hi().isPosInf() ? 0 : 1)};
            for (const Interval& i2 : m2) {
                auto witness = Interval::fromCuts(std::max(i2.start(), from), i2.end());
                if (!witness) continue;
                Interval reach = dilateDiamondMinus(*witness, *strict);
                if (auto res = Interval::fromCuts(reach.start(), std::min(reach.end(), to))) {
                    parts.push_back(*res);
                }
            }
        }
    }
    return IntervalSeq::normalize(std::move(parts));
}

IntervalSeq evalUntil(const IntervalSeq& m1, const IntervalSeq& m2, const Interval& range) {
    std::vector<Interval> parts;
    if (containsPoint(range, TimePoint(Rational(0)))) {
        for (const Interval& w : m2) parts.push_back(w);
    }
    auto strict = stripZero(range);
    if (strict) {
        for (const Interval& i1 : m1) {
            Cut from{i1.lo(), static_cast<std::uint8_t>(i1.lo().isNegInf() ? 1 : 0)};
            Cut to{i1.hi(), static_cast<std::uint8_t>(i1.hi().isPosInf() ? 0 : 1)};
            for (const Interval& i2 : m2) {
                auto witness = Interval::fromCuts(i2.start(), std::min(i2.end(), to));
                if (!witness) continue;
                Interval reach = dilateDiamondPlus(*witness, *strict);
                if (auto res = Interval::fromCuts(std::max(reach.start(), from), reach.end())) {
                    parts.push_back(*res);
                }
            }
        }
    }
    return IntervalSeq::normalize(std::move(parts));
}

void sweepJoin(std::span<const IntervalSeq* const> lists,
               const std::function<void(std::span<const std::size_t>, const Interval&)>& emit) {
    const std::size_t n = lists.size();
    if (n == 0) return;
    for (const IntervalSeq* s : lists) {
        if (s->empty()) return;
    }
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        Cut maxStart = (*lists[0])[idx[0]].start();
        Cut minEnd = (*lists[0])[idx[0]].end();
        std::size_t argmin = 0;
        for (std::size_t i = 1; i < n; ++i) {
            const Interval& m = (*lists[i])[idx[i]];
            if (maxStart < m.start()) maxStart = m.start();
            if (m.end() < minEnd) {
                minEnd = m.end();
                argmin = i;
            }
        }
        if (maxStart < minEnd) {
            emit(idx, *Interval::fromCuts(maxStart, minEnd));
        }
        if (++idx[argmin] == lists[argmin]->size()) return;
    }
}

} // namespace dmtl
