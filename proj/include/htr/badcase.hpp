#pragma once

#include "htr/fp_core.hpp"
#include "htr/mp_eval.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>

namespace htr {

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Terminal digit strings that mark a bad case. For round-to-nearest the
/// strings start at the guard digit m_(n+1); for directed modes they cover
/// m_(n+1)..m_p entirely.
enum class BadPattern { GuardOneThenZeros, GuardZeroThenOnes, AllZeros, AllOnes };

std::string_view to_string(BadPattern pattern);

enum class PatternVariant {
    /// 10...0 / 01...1 over m_(n+1)..m_p; m_n is not inspected.
    MantissaAgnostic,
    /// 110...0 / 101...1 over m_n..m_p, as written for the flag circuit. Misses
    /// the symmetric bad cases with m_n = 0.
    PinnedLastDigit,
};

struct BadCaseVerdict {
    bool bad = false;
    std::optional<BadPattern> pattern;
    /// f(x) lies within [2^d, 2^(d+1)) * 2^e(f(x)) of the nearest decision boundary.
    std::optional<std::int64_t> distance_exp;
};

/// Offset c0 in required_precision = n + 1 + k + c0, where k is the length of
/// the run that keeps f(x) close to a boundary. With c0 = 1 the returned value
/// is the first working precision at which no admissible approximation is
/// ambiguous.
inline constexpr int kBoundaryOffset = 1;

BadCaseVerdict syntactic_bad(const ExtendedSignificand& y, int n, RoundingMode mode,
                             PatternVariant variant = PatternVariant::MantissaAgnostic);

BadCaseVerdict semantic_bad(const TailRecord& tail, int p, RoundingMode mode);
BadCaseVerdict semantic_bad(FunctionId f, const BinaryFloat& x, int n, int p, RoundingMode mode,
                            const EvalConfig& cfg = {});

int required_precision(const TailRecord& tail, RoundingMode mode);
int required_precision(FunctionId f, const BinaryFloat& x, int n, RoundingMode mode, const EvalConfig& cfg = {});

/// Index of the last digit of the dangerous run, n + 1 + k. This is the
/// count quoted in hand analyses ("n + k bits" with the implicit bit counted).
inline int run_end(const TailRecord& tail, RoundingMode mode) { return tail.n + 1 + tail.dangerous_run(mode); }

}  // namespace htr
