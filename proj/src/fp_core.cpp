#include "htr/fp_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace htr {

std::string_view to_string(RoundingMode mode) {
    switch (mode) {
        case RoundingMode::NearestTiesEven: return "nearest";
        case RoundingMode::TowardPositive: return "up";
        case RoundingMode::TowardNegative: return "down";
        case RoundingMode::TowardZero: return "zero";
    }
    return "?";
}

RoundingMode parse_rounding_mode(std::string_view text) {
    if (text == "nearest" || text == "rne") return RoundingMode::NearestTiesEven;
    if (text == "up" || text == "rup") return RoundingMode::TowardPositive;
    if (text == "down" || text == "rdn") return RoundingMode::TowardNegative;
    if (text == "zero" || text == "rz") return RoundingMode::TowardZero;
    throw std::invalid_argument("unknown rounding mode: " + std::string(text));
}

// ---------------------------------------------------------------------------
// Fraction

namespace {
constexpr int kLimbBits = 64;

int limb_count(int width) { return (width + kLimbBits - 1) / kLimbBits; }
}  // namespace

Fraction::Fraction(int width) : width_(width), limbs_(static_cast<std::size_t>(limb_count(width)), 0) {
    if (width < 0) throw std::invalid_argument("Fraction: negative width");
}

Fraction Fraction::from_uint(std::uint64_t value, int width) {
    Fraction f(width);
    if (width < 64 && (value >> width) != 0) throw std::invalid_argument("Fraction: value does not fit width");
    if (width > 0) f.limbs_[0] = value;
    return f;
}

Fraction Fraction::from_limbs(std::span<const Limb> limbs, int width) {
    Fraction f(width);
    for (std::size_t i = 0; i < limbs.size(); ++i) {
        if (i < f.limbs_.size()) f.limbs_[i] = limbs[i];
        else if (limbs[i] != 0) throw std::invalid_argument("Fraction: value does not fit width");
    }
    const int rem = width % kLimbBits;
    if (rem != 0 && !f.limbs_.empty() && (f.limbs_.back() >> rem) != 0)
        throw std::invalid_argument("Fraction: value does not fit width");
    return f;
}

bool Fraction::digit(int index) const {
    if (index < 1 || index > width_) throw std::out_of_range("Fraction::digit index");
    const int bit = width_ - index;
    return (limbs_[static_cast<std::size_t>(bit / kLimbBits)] >> (bit % kLimbBits)) & 1U;
}

void Fraction::set_digit(int index, bool value) {
    if (index < 1 || index > width_) throw std::out_of_range("Fraction::set_digit index");
    const int bit = width_ - index;
    const Limb mask = Limb{1} << (bit % kLimbBits);
    auto& limb = limbs_[static_cast<std::size_t>(bit / kLimbBits)];
    limb = value ? (limb | mask) : (limb & ~mask);
}

void Fraction::clear_padding() noexcept {
    const int rem = width_ % kLimbBits;
    if (rem != 0 && !limbs_.empty()) limbs_.back() &= (Limb{1} << rem) - 1;
}

Fraction Fraction::leading(int count) const {
    if (count < 0 || count > width_) throw std::out_of_range("Fraction::leading count");
    // Right shift by width_ - count.
    Fraction out(count);
    const int shift = width_ - count;
    const int limb_shift = shift / kLimbBits;
    const int bit_shift = shift % kLimbBits;
    for (std::size_t i = 0; i < out.limbs_.size(); ++i) {
        const std::size_t src = i + static_cast<std::size_t>(limb_shift);
        Limb v = src < limbs_.size() ? limbs_[src] >> bit_shift : 0;
        if (bit_shift != 0 && src + 1 < limbs_.size()) v |= limbs_[src + 1] << (kLimbBits - bit_shift);
        out.limbs_[i] = v;
    }
    out.clear_padding();
    return out;
}

Fraction Fraction::widened(int width) const {
    if (width < width_) throw std::out_of_range("Fraction::widened width");
    // Left shift by width - width_.
    Fraction out(width);
    const int shift = width - width_;
    const int limb_shift = shift / kLimbBits;
    const int bit_shift = shift % kLimbBits;
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
        const std::size_t dst = i + static_cast<std::size_t>(limb_shift);
        if (dst < out.limbs_.size()) out.limbs_[dst] |= limbs_[i] << bit_shift;
        if (bit_shift != 0 && dst + 1 < out.limbs_.size()) out.limbs_[dst + 1] |= limbs_[i] >> (kLimbBits - bit_shift);
    }
    out.clear_padding();
    return out;
}

bool Fraction::increment() {
    for (auto& limb : limbs_) {
        if (++limb != 0) break;
    }
    const bool all_zero_after = is_zero();
    // Overflow past width_: either the padding bit got set or all limbs wrapped.
    const int rem = width_ % kLimbBits;
    bool carry = false;
    if (width_ == 0) {
        carry = true;
    } else if (rem != 0 && (limbs_.back() >> rem) != 0) {
        carry = true;
        clear_padding();
    } else if (rem == 0 && all_zero_after) {
        carry = true;
    }
    return carry;
}

bool Fraction::is_zero() const noexcept {
    return std::all_of(limbs_.begin(), limbs_.end(), [](Limb l) { return l == 0; });
}

bool Fraction::any_set_from(int index) const {
    for (int i = std::max(index, 1); i <= width_; ++i)
        if (digit(i)) return true;
    return false;
}

int Fraction::run_from(int index, bool bit) const {
    int count = 0;
    for (int i = index; i <= width_ && digit(i) == bit; ++i) ++count;
    return count;
}

bool Fraction::operator==(const Fraction& other) const noexcept {
    return width_ == other.width_ && std::equal(limbs_.begin(), limbs_.end(), other.limbs_.begin());
}

std::strong_ordering Fraction::operator<=>(const Fraction& other) const noexcept {
    if (width_ != other.width_) return width_ <=> other.width_;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
        if (limbs_[i] != other.limbs_[i]) return limbs_[i] <=> other.limbs_[i];
    }
    return std::strong_ordering::equal;
}

std::string Fraction::to_digit_string() const {
    std::string s;
    s.reserve(static_cast<std::size_t>(width_));
    for (int i = 1; i <= width_; ++i) s.push_back(digit(i) ? '1' : '0');
    return s;
}

// ---------------------------------------------------------------------------
// BinaryFloat

BinaryFloat::BinaryFloat(bool sign, Fraction fraction, std::int64_t exponent)
    : sign_(sign), fraction_(std::move(fraction)), exponent_(exponent) {
    if (fraction_.width() < 1) throw std::invalid_argument("BinaryFloat: precision must be positive");
}

BinaryFloat BinaryFloat::from_uint(std::uint64_t fraction, int prec, std::int64_t exponent, bool sign) {
    return BinaryFloat(sign, Fraction::from_uint(fraction, prec), exponent);
}

double BinaryFloat::to_double() const {
    double m = 1.0;
    double w = 0.5;
    for (int i = 1; i <= prec() && i <= 60; ++i, w *= 0.5)
        if (fraction_.digit(i)) m += w;
    const double v = std::ldexp(m, static_cast<int>(std::clamp<std::int64_t>(exponent_, -4000, 4000)));
    return sign_ ? -v : v;
}

std::strong_ordering compare_values(const ExtendedSignificand& a, const ExtendedSignificand& b) {
    if (a.sign != b.sign) return a.sign ? std::strong_ordering::less : std::strong_ordering::greater;
    std::strong_ordering mag = std::strong_ordering::equal;
    if (a.exponent != b.exponent) {
        mag = a.exponent <=> b.exponent;
    } else {
        const int w = std::max(a.prec(), b.prec());
        mag = a.digits.widened(w) <=> b.digits.widened(w);
    }
    if (a.sign && mag != std::strong_ordering::equal)
        return mag == std::strong_ordering::less ? std::strong_ordering::greater : std::strong_ordering::less;
    return mag;
}

// ---------------------------------------------------------------------------
// Rounding

BinaryFloat round(const ExtendedSignificand& y, int n, RoundingMode mode) {
    const int p = y.prec();
    if (n < 1 || n >= p) throw std::invalid_argument("round: requires 1 <= n < y.prec");

    Fraction kept = y.digits.leading(n);
    const bool guard = y.digits.digit(n + 1);
    // All digits beyond the guard are inspected, not a fixed window.
    const bool sticky = y.digits.any_set_from(n + 2);
    const bool inexact = guard || sticky;

    bool up = false;
    switch (mode) {
        case RoundingMode::NearestTiesEven:
            up = guard && (sticky || y.digits.digit(n));
            break;
        case RoundingMode::TowardZero: up = false; break;
        case RoundingMode::TowardPositive: up = inexact && !y.sign; break;
        case RoundingMode::TowardNegative: up = inexact && y.sign; break;
    }

    std::int64_t exponent = y.exponent;
    if (up && kept.increment()) ++exponent;  // 1.11..1 + ulp renormalizes to 1.00..0 * 2
    return BinaryFloat(y.sign, std::move(kept), exponent);
}

// ---------------------------------------------------------------------------
// Parsing and formatting

namespace {

constexpr std::string_view kMiddleDot = "\xC2\xB7";

}  // namespace

ExtendedSignificand parse_significand(std::string_view text) {
    std::size_t pos = 0;
    bool sign = false;
    if (pos < text.size() && text[pos] == '-') {
        sign = true;
        ++pos;
    }
    if (pos >= text.size() || text[pos] != '1') throw ParseError("expected leading '1'", pos);
    ++pos;
    if (pos >= text.size() || text[pos] != '.') throw ParseError("expected '.' after leading digit", pos);
    ++pos;

    const std::size_t digits_begin = pos;
    while (pos < text.size() && (text[pos] == '0' || text[pos] == '1')) ++pos;
    const std::size_t digit_count = pos - digits_begin;
    if (digit_count == 0) throw ParseError("expected at least one fraction digit", pos);

    std::int64_t exponent = 0;
    if (pos < text.size()) {
        std::string_view rest = text.substr(pos);
        std::size_t sep = 0;
        if (rest.starts_with(kMiddleDot)) sep = kMiddleDot.size();
        else if (rest.starts_with("*")) sep = 1;
        else throw ParseError("unexpected character", pos);
        if (rest.substr(sep).starts_with("2^")) sep += 2;
        else throw ParseError("expected '2^' after multiplication sign", pos + sep);
        pos += sep;

        const std::size_t exp_begin = pos;
        bool neg = false;
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
            neg = text[pos] == '-';
            ++pos;
        }
        if (pos >= text.size()) throw ParseError("expected exponent digits", pos);
        std::int64_t value = 0;
        while (pos < text.size()) {
            const char c = text[pos];
            if (c < '0' || c > '9') throw ParseError("invalid exponent character", pos);
            if (value > (INT64_MAX - 9) / 10) throw ParseError("exponent out of range", exp_begin);
            value = value * 10 + (c - '0');
            ++pos;
        }
        exponent = neg ? -value : value;
    }

    Fraction digits(static_cast<int>(digit_count));
    for (std::size_t i = 0; i < digit_count; ++i)
        if (text[digits_begin + i] == '1') digits.set_digit(static_cast<int>(i) + 1, true);
    return ExtendedSignificand(sign, std::move(digits), exponent);
}

BinaryFloat parse_binary_float(std::string_view text) {
    auto y = parse_significand(text);
    return BinaryFloat(y.sign, std::move(y.digits), y.exponent);
}

std::string format(const ExtendedSignificand& y) {
    std::string s = y.sign ? "-1." : "1.";
    s += y.digits.to_digit_string();
    if (y.exponent != 0) {
        s += kMiddleDot;
        s += "2^" + std::to_string(y.exponent);
    }
    return s;
}

std::string format(const BinaryFloat& x) { return format(ExtendedSignificand(x)); }

}  // namespace htr
