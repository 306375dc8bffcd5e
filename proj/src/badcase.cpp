#include "htr/badcase.hpp"

#include <algorithm>

namespace htr {

std::string_view to_string(BadPattern pattern) {
    switch (pattern) {
        case BadPattern::GuardOneThenZeros: return "10...0";
        case BadPattern::GuardZeroThenOnes: return "01...1";
        case BadPattern::AllZeros: return "00...0";
        case BadPattern::AllOnes: return "11...1";
    }
    return "?";
}

BadCaseVerdict syntactic_bad(const ExtendedSignificand& y, int n, RoundingMode mode, PatternVariant variant) {
    const int p = y.prec();
    if (n < 1 || p <= n + 1) throw PreconditionError("syntactic_bad: requires p > n + 1");

    const bool guard = y.digit(n + 1);
    BadCaseVerdict v;
    if (is_directed(mode)) {
        if (y.digits.run_from(n + 1, guard) == p - n) {
            v.bad = true;
            v.pattern = guard ? BadPattern::AllOnes : BadPattern::AllZeros;
        }
        return v;
    }
    if (y.digits.run_from(n + 2, !guard) != p - n - 1) return v;
    if (variant == PatternVariant::PinnedLastDigit && !y.digit(n)) return v;
    v.bad = true;
    v.pattern = guard ? BadPattern::GuardOneThenZeros : BadPattern::GuardZeroThenOnes;
    return v;
}

BadCaseVerdict semantic_bad(const TailRecord& tail, int p, RoundingMode mode) {
    const int n = tail.n;
    if (p <= n) throw PreconditionError("semantic_bad: requires p > n");
    BadCaseVerdict v;
    if (tail.exact) return v;
    if (!tail.resolved && p > tail.certain_digits) {
        throw UnresolvedPrecisionError("semantic_bad: tail unresolved beyond digit " +
                                           std::to_string(tail.certain_digits),
                                       tail);
    }
    const int k = tail.dangerous_run(mode);
    v.distance_exp = -static_cast<std::int64_t>(n + 2 + k);
    if (p <= n + 1 + k) {
        v.bad = true;
        if (is_directed(mode)) v.pattern = tail.guard ? BadPattern::AllOnes : BadPattern::AllZeros;
        else v.pattern = tail.guard ? BadPattern::GuardOneThenZeros : BadPattern::GuardZeroThenOnes;
    }
    return v;
}

BadCaseVerdict semantic_bad(FunctionId f, const BinaryFloat& x, int n, int p, RoundingMode mode,
                            const EvalConfig& cfg) {
    if (p <= n) throw PreconditionError("semantic_bad: requires p > n");
    if (is_exceptional(f, x, n)) return {};
    const TailRecord tail = eval_tail(f, x, n, std::max(default_run_cap(n), p + 8), cfg);
    return semantic_bad(tail, p, mode);
}

int required_precision(const TailRecord& tail, RoundingMode mode) {
    if (tail.exact) throw PreconditionError("required_precision: exceptional input has an exact value");
    if (!tail.resolved) throw UnresolvedPrecisionError("required_precision: unresolved tail", tail);
    return tail.n + 1 + tail.dangerous_run(mode) + kBoundaryOffset;
}

int required_precision(FunctionId f, const BinaryFloat& x, int n, RoundingMode mode, const EvalConfig& cfg) {
    if (is_exceptional(f, x, n)) throw PreconditionError("required_precision: exceptional input");
    return required_precision(eval_tail(f, x, n, 0, cfg), mode);
}

}  // namespace htr
