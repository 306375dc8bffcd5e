#pragma once

#include <gmpxx.h>

#include <cstdint>

namespace htr {

/// Closed interval [lo * 2^exp, hi * 2^exp] with lo <= hi.
struct DyadicInterval {
    mpz_class lo;
    mpz_class hi;
    std::int64_t exp = 0;
};

/// Exact value (-1)^sign * magnitude * 2^exp; magnitude == 0 encodes zero.
struct ExactValue {
    bool sign = false;
    mpz_class magnitude;
    std::int64_t exp = 0;
};

}  // namespace htr
