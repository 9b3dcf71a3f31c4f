#pragma once

#include <boost/functional/hash.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace dmtl {

// Exact arithmetic throughout: endpoints coming from decimal literals are
// converted to fractions once at parse time and never rounded afterwards.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Accepts "3", "-3", "2.5", "-0.75", "5/2", "-7/3". Returns nullopt on
// malformed input (including division by zero).
std::optional<Rational> parseRational(std::string_view text);

// Canonical form: integers print without a denominator, everything else as
// "n/d" with d > 0 and gcd(|n|, d) = 1 (maintained by the representation).
std::string printRational(const Rational& value);

// gcd over the positive rationals: gcd(a/b, c/d) = gcd(a, c) / lcm(b, d).
// Used by the timeline discretisation; both arguments must be > 0.
Rational rationalGcd(const Rational& a, const Rational& b);

struct RationalHash {
    std::size_t operator()(const Rational& value) const {
        return boost::hash<Rational>{}(value);
    }
};

} // namespace dmtl
