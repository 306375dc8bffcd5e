#pragma once

// Fixed-point interval arithmetic over mpz_class. An Iv at scale W encloses
// the real interval [lo * 2^-W, hi * 2^-W]; every operation rounds lo down and
// hi up so enclosures are never lost.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>

namespace htr::detail {

struct Iv {
    mpz_class lo;
    mpz_class hi;
};

inline mpz_class floor_shift(const mpz_class& v, std::uint64_t bits) {
    mpz_class r;
    mpz_fdiv_q_2exp(r.get_mpz_t(), v.get_mpz_t(), bits);
    return r;
}

inline mpz_class ceil_shift(const mpz_class& v, std::uint64_t bits) {
    mpz_class r;
    mpz_cdiv_q_2exp(r.get_mpz_t(), v.get_mpz_t(), bits);
    return r;
}

inline mpz_class floor_div(const mpz_class& a, const mpz_class& b) {
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline mpz_class ceil_div(const mpz_class& a, const mpz_class& b) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Iv exact(const mpz_class& v) { return {v, v}; }

inline Iv operator+(const Iv& a, const Iv& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Iv operator-(const Iv& a, const Iv& b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Iv operator-(const Iv& a) { return {-a.hi, -a.lo}; }

inline Iv widen(const Iv& a, long ulps) { return {a.lo - ulps, a.hi + ulps}; }

/// Product at scale w (operands and result share the scale).
inline Iv mul(const Iv& a, const Iv& b, std::uint64_t w) {
    if (sgn(a.lo) >= 0 && sgn(b.lo) >= 0) {
        return {floor_shift(a.lo * b.lo, w), ceil_shift(a.hi * b.hi, w)};
    }
    const mpz_class p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    const mpz_class mn = std::min({p1, p2, p3, p4});
    const mpz_class mx = std::max({p1, p2, p3, p4});
    return {floor_shift(mn, w), ceil_shift(mx, w)};
}

inline Iv mul_int(const Iv& a, const mpz_class& k) {
    if (sgn(k) >= 0) return {a.lo * k, a.hi * k};
    return {a.hi * k, a.lo * k};
}

/// Division by a positive integer.
inline Iv div_int(const Iv& a, const mpz_class& k) { return {floor_div(a.lo, k), ceil_div(a.hi, k)}; }

/// Quotient a / b at scale w; b must be strictly positive.
inline Iv div(const Iv& a, const Iv& b, std::uint64_t w) {
    const mpz_class alo = a.lo << w;
    const mpz_class ahi = a.hi << w;
    const mpz_class lo = sgn(a.lo) >= 0 ? floor_div(alo, b.hi) : floor_div(alo, b.lo);
    const mpz_class hi = sgn(a.hi) >= 0 ? ceil_div(ahi, b.lo) : ceil_div(ahi, b.hi);
    return {lo, hi};
}

/// Re-expresses an interval at scale `from` at scale `to`.
inline Iv rescale(const Iv& a, std::int64_t from, std::int64_t to) {
    if (to >= from) {
        const auto s = static_cast<std::uint64_t>(to - from);
        return {a.lo << s, a.hi << s};
    }
    const auto s = static_cast<std::uint64_t>(from - to);
    return {floor_shift(a.lo, s), ceil_shift(a.hi, s)};
}

/// Largest magnitude of any endpoint.
inline mpz_class max_abs(const Iv& a) {
    mpz_class l = abs(a.lo), h = abs(a.hi);
    return l > h ? l : h;
}

inline std::int64_t bit_length(const mpz_class& v) {
    if (sgn(v) == 0) return 0;
    return static_cast<std::int64_t>(mpz_sizeinbase(v.get_mpz_t(), 2));
}

}  // namespace htr::detail
