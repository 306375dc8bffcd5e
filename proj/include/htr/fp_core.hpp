#pragma once

#include <boost/container/small_vector.hpp>

#include <compare>
#include <cstdint>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace htr {

enum class RoundingMode { NearestTiesEven, TowardPositive, TowardNegative, TowardZero };

std::string_view to_string(RoundingMode mode);
RoundingMode parse_rounding_mode(std::string_view text);

inline bool is_directed(RoundingMode mode) { return mode != RoundingMode::NearestTiesEven; }

class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::invalid_argument(what), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Fixed-width unsigned integer holding the fraction digits m_1..m_width of a
/// significand. Digit 1 is the most significant bit. Widths up to 128 bits
/// live inline; wider fractions spill to the heap.
class Fraction {
public:
    using Limb = std::uint64_t;

    Fraction() = default;
    explicit Fraction(int width);

    static Fraction from_uint(std::uint64_t value, int width);
    /// Little-endian 64-bit limbs of the fraction read as an integer.
    static Fraction from_limbs(std::span<const Limb> limbs, int width);

    int width() const noexcept { return width_; }

    bool digit(int index) const;
    void set_digit(int index, bool value);

    /// Low 64 bits of the fraction as an integer. Exact when width() <= 64.
    std::uint64_t to_uint64() const noexcept { return limbs_.empty() ? 0 : limbs_[0]; }
    std::span<const Limb> limbs() const noexcept { return {limbs_.data(), limbs_.size()}; }

    /// Digits m_1..m_count as a fraction of width `count`.
    Fraction leading(int count) const;
    /// Digits m_1..m_width followed by zeros up to `width`.
    Fraction widened(int width) const;

    /// Adds one unit in the last place. Returns true on carry out (value wrapped to zero).
    bool increment();

    bool is_zero() const noexcept;
    bool any_set_from(int index) const;
    /// Count of consecutive digits equal to `bit` starting at `index` (stops at width()).
    int run_from(int index, bool bit) const;

    bool operator==(const Fraction& other) const noexcept;
    std::strong_ordering operator<=>(const Fraction& other) const noexcept;

    std::string to_digit_string() const;

private:
    int width_ = 0;
    boost::container::small_vector<Limb, 2> limbs_;

    void clear_padding() noexcept;
};

/// Normal binary floating-point number (-1)^sign * (1 + fraction * 2^-prec) * 2^exponent.
class BinaryFloat {
public:
    BinaryFloat(bool sign, Fraction fraction, std::int64_t exponent);
    static BinaryFloat from_uint(std::uint64_t fraction, int prec, std::int64_t exponent, bool sign = false);

    bool sign() const noexcept { return sign_; }
    const Fraction& fraction() const noexcept { return fraction_; }
    std::int64_t exponent() const noexcept { return exponent_; }
    int prec() const noexcept { return fraction_.width(); }

    /// Nearest double; exact when prec() <= 52 and the exponent is in range.
    double to_double() const;

    bool operator==(const BinaryFloat&) const = default;

private:
    bool sign_;
    Fraction fraction_;
    std::int64_t exponent_;
};

/// Precision-p value in the same normal form as BinaryFloat. Digits beyond
/// prec() are implicitly zero.
struct ExtendedSignificand {
    bool sign = false;
    Fraction digits;
    std::int64_t exponent = 0;

    ExtendedSignificand() = default;
    ExtendedSignificand(bool s, Fraction d, std::int64_t e) : sign(s), digits(std::move(d)), exponent(e) {}
    explicit ExtendedSignificand(const BinaryFloat& x) : sign(x.sign()), digits(x.fraction()), exponent(x.exponent()) {}

    int prec() const noexcept { return digits.width(); }
    bool digit(int index) const { return digits.digit(index); }

    bool operator==(const ExtendedSignificand&) const = default;
};

/// Exact comparison of the represented real values (precisions may differ).
std::strong_ordering compare_values(const ExtendedSignificand& a, const ExtendedSignificand& b);

BinaryFloat round(const ExtendedSignificand& y, int n, RoundingMode mode = RoundingMode::NearestTiesEven);

/// The 2^n positive precision-n values of the binade [2^e, 2^(e+1)), fraction ascending.
inline auto enumerate_binade(int n, std::int64_t e) {
    if (n < 1 || n > 63) throw std::invalid_argument("enumerate_binade: n must be in [1, 63]");
    return std::views::iota(std::uint64_t{0}, std::uint64_t{1} << n) |
           std::views::transform([n, e](std::uint64_t f) { return BinaryFloat::from_uint(f, n, e); });
}

/// Parses "1.<binary digits>" with an optional "·2^<int>" or "*2^<int>" suffix,
/// optionally preceded by '-'.
ExtendedSignificand parse_significand(std::string_view text);
BinaryFloat parse_binary_float(std::string_view text);

/// Inverse of parse_significand; the exponent suffix is omitted when zero.
std::string format(const ExtendedSignificand& y);
std::string format(const BinaryFloat& x);

}  // namespace htr
