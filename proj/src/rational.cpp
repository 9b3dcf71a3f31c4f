#include "dmtl/rational.hpp"

#include <cctype>

namespace dmtl {

namespace {

bool allDigits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

} // namespace

std::optional<Rational> parseRational(std::string_view text) {
    if (text.empty()) return std::nullopt;
    bool negative = false;
    if (text.front() == '+' || text.front() == '-') {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    if (text.empty()) return std::nullopt;

    auto slash = text.find('/');
    auto dot = text.find('.');
    if (slash != std::string_view::npos && dot != std::string_view::npos) return std::nullopt;

    Rational result;
    if (slash != std::string_view::npos) {
        std::string_view num = text.substr(0, slash);
        std::string_view den = text.substr(slash + 1);
        if (!allDigits(num) || !allDigits(den)) return std::nullopt;
        BigInt d{std::string(den)};
        if (d == 0) return std::nullopt;
        result = Rational(BigInt{std::string(num)}, d);
    } else if (dot != std::string_view::npos) {
        std::string_view whole = text.substr(0, dot);
        std::string_view frac = text.substr(dot + 1);
        if (whole.empty() && frac.empty()) return std::nullopt;
        if (!whole.empty() && !allDigits(whole)) return std::nullopt;
        if (!frac.empty() && !allDigits(frac)) return std::nullopt;
        BigInt w = whole.empty() ? BigInt{0} : BigInt{std::string(whole)};
        result = Rational(w);
        if (!frac.empty()) {
            BigInt scale{1};
            for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
            result += Rational(BigInt{std::string(frac)}, scale);
        }
    } else {
        if (!allDigits(text)) return std::nullopt;
        result = Rational(BigInt{std::string(text)});
    }
    if (negative) result = -result;
    return result;
}

std::string printRational(const Rational& value) {
    const BigInt& num = boost::multiprecision::numerator(value);
    const BigInt& den = boost::multiprecision::denominator(value);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

Rational rationalGcd(const Rational& a, const Rational& b) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::gcd;
    using boost::multiprecision::lcm;
    using boost::multiprecision::numerator;
    BigInt n = gcd(numerator(a), numerator(b));
    BigInt d = lcm(denominator(a), denominator(b));
    return Rational(n, d);
}

} // namespace dmtl
