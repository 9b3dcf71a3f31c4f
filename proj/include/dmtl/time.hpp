#pragma once

#include "dmtl/rational.hpp"

#include <cassert>
#include <compare>
#include <string>

namespace dmtl {

// A point on the extended rational timeline. The two infinities only ever
// appear as interval endpoints (always with an open bracket); all dataset
// facts and query time points are finite.
class TimePoint {
public:
    enum class Kind { NegInf, Finite, PosInf };

    TimePoint() : kind_(Kind::Finite), value_(0) {}
    explicit TimePoint(Rational v) : kind_(Kind::Finite), value_(std::move(v)) {}

    static TimePoint negInf() { return TimePoint(Kind::NegInf); }
    static TimePoint posInf() { return TimePoint(Kind::PosInf); }

    Kind kind() const { return kind_; }
    bool isFinite() const { return kind_ == Kind::Finite; }
    bool isNegInf() const { return kind_ == Kind::NegInf; }
    bool isPosInf() const { return kind_ == Kind::PosInf; }

    // Only valid on finite points.
    const Rational& value() const {
        assert(isFinite());
        return value_;
    }

    friend bool operator==(const TimePoint& a, const TimePoint& b) {
        if (a.kind_ != b.kind_) return false;
        return a.kind_ != Kind::Finite || a.value_ == b.value_;
    }

    friend std::strong_ordering operator<=>(const TimePoint& a, const TimePoint& b) {
        auto rank = [](Kind k) { return k == Kind::NegInf ? 0 : (k == Kind::Finite ? 1 : 2); };
        if (int d = rank(a.kind_) - rank(b.kind_); d != 0)
            return d < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
        if (a.kind_ != Kind::Finite) return std::strong_ordering::equal;
        if (a.value_ < b.value_) return std::strong_ordering::less;
        if (a.value_ > b.value_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    // Infinities absorb finite offsets; adding opposite infinities is a logic
    // error and must be ruled out by the caller (the erosion/dilation code
    // special-cases unbounded ranges before doing arithmetic).
    TimePoint operator+(const Rational& r) const {
        if (!isFinite()) return *this;
        return TimePoint(value_ + r);
    }
    TimePoint operator-(const Rational& r) const {
        if (!isFinite()) return *this;
        return TimePoint(value_ - r);
    }
    TimePoint operator+(const TimePoint& o) const {
        if (isFinite() && o.isFinite()) return TimePoint(value_ + o.value_);
        if (!isFinite()) {
            assert(o.kind_ == kind_ || o.isFinite());
            return *this;
        }
        return o;
    }
    TimePoint operator-(const TimePoint& o) const {
        if (isFinite() && o.isFinite()) return TimePoint(value_ - o.value_);
        if (!isFinite()) {
            assert(o.kind_ != kind_);
            return *this;
        }
        return o.isPosInf() ? negInf() : posInf();
    }

    std::string str() const {
        switch (kind_) {
            case Kind::NegInf: return "-inf";
            case Kind::PosInf: return "+inf";
            default: return printRational(value_);
        }
    }

private:
    explicit TimePoint(Kind k) : kind_(k), value_(0) {}

    Kind kind_;
    Rational value_;
};

} // namespace dmtl
