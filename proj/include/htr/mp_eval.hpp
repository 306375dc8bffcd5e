#pragma once

#include "htr/dyadic.hpp"
#include "htr/fp_core.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace htr {

/// Definition of a registered function. `evaluate` must return an interval
/// that encloses f(x) and whose absolute width is O(2^-abs_bits); `exact`
/// returns the exact value whenever f(x) is a dyadic rational.
struct FunctionDef {
    std::string id;
    std::function<DyadicInterval(const BinaryFloat& x, std::int64_t abs_bits)> evaluate;
    std::function<std::optional<ExactValue>(const BinaryFloat& x)> exact;
};

/// Handle into the function registry. The six builtins have fixed slots.
class FunctionId {
public:
    static FunctionId exp() { return FunctionId(0); }
    static FunctionId ln() { return FunctionId(1); }
    static FunctionId log2() { return FunctionId(2); }
    static FunctionId sin() { return FunctionId(3); }
    static FunctionId cos() { return FunctionId(4); }
    static FunctionId two_sin() { return FunctionId(5); }

    /// Looks up "exp", "ln", "log2", "sin", "cos", "2sin" or a registered id.
    static FunctionId from_name(std::string_view name);
    static FunctionId register_function(FunctionDef def);
    static std::vector<FunctionId> all();

    std::string_view name() const;
    const FunctionDef& def() const;
    std::uint32_t index() const noexcept { return index_; }

    bool operator==(const FunctionId&) const = default;

private:
    explicit FunctionId(std::uint32_t index) : index_(index) {}
    std::uint32_t index_;
};

struct EvalConfig {
    int initial_guard = 32;
    /// Ziv escalation stops once p + guard would exceed this many digits.
    int max_working_digits = 1 << 14;
    /// Results must have an exponent representable in a signed field of this
    /// many bits, IEEE style: [-(2^(d-1) - 2), 2^(d-1) - 1].
    int exponent_bits = 11;

    std::int64_t emax() const { return (std::int64_t{1} << (exponent_bits - 1)) - 1; }
    std::int64_t emin() const { return -((std::int64_t{1} << (exponent_bits - 1)) - 2); }
};

struct EvalResult {
    ExtendedSignificand value;  // truncation of f(x) to value.prec() digits
    std::int64_t error_bound_exp = 0;  // |value - f(x)| < 2^error_bound_exp
    bool exact = false;
    bool zero = false;  // f(x) == 0 exactly; `value` is unspecified
    int guard_bits_used = 0;
    int escalations = 0;
};

/// Digit structure of the infinite significand of f(x) beyond position n.
struct TailRecord {
    int n = 0;
    bool sign = false;
    std::int64_t exponent = 0;  // e(f(x))
    Fraction prefix;  // m_1..m_n
    bool guard = false;  // m_(n+1)
    bool run_bit = false;  // m_(n+2)
    int run_length = 0;  // digits n+2 .. n+1+run_length equal run_bit
    int resolved_at = 0;  // n+2+run_length: first digit breaking the run (0 when unresolved)
    bool resolved = false;
    int certain_digits = 0;  // digits known when the record was produced
    bool exact = false;
    bool zero = false;
    int zeros_from = 0;  // exact values: first index from which every digit is 0
    int escalations = 0;

    /// Length of the run that keeps f(x) near a decision boundary for `mode`.
    int dangerous_run(RoundingMode mode) const {
        const bool dangerous = is_directed(mode) ? run_bit == guard : run_bit != guard;
        return dangerous ? run_length : 0;
    }
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public EvalError {
public:
    using EvalError::EvalError;
};

class RangeError : public EvalError {
public:
    enum class Kind { Overflow, Underflow };
    RangeError(Kind kind, std::int64_t exponent, const std::string& what)
        : EvalError(what), kind_(kind), exponent_(exponent) {}
    Kind kind() const noexcept { return kind_; }
    std::int64_t exponent() const noexcept { return exponent_; }

private:
    Kind kind_;
    std::int64_t exponent_;
};

class UnresolvedPrecisionError : public EvalError {
public:
    UnresolvedPrecisionError(const std::string& what, TailRecord partial)
        : EvalError(what), partial_(std::move(partial)) {}
    const TailRecord& partial() const noexcept { return partial_; }

private:
    TailRecord partial_;
};

EvalResult eval(FunctionId f, const BinaryFloat& x, int p, const EvalConfig& cfg = {});

TailRecord eval_tail(FunctionId f, const BinaryFloat& x, int n, int run_cap = 0, const EvalConfig& cfg = {});

inline int default_run_cap(int n) { return 8 * n + 64; }

bool is_exceptional(FunctionId f, const BinaryFloat& x, int n);

/// High-precision enclosures of pi and ln 2 at scale `bits` (value = v * 2^-bits).
/// Backed by grow-only shared tables.
DyadicInterval pi_enclosure(std::int64_t bits);
DyadicInterval ln2_enclosure(std::int64_t bits);

}  // namespace htr
