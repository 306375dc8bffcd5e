#include "htr/mp_eval.hpp"

#include "fixed_interval.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>

namespace htr {

using detail::bit_length;
using detail::Iv;

namespace {

// ---------------------------------------------------------------------------
// Conversions

mpz_class mpz_from_limbs(std::span<const std::uint64_t> limbs) {
    mpz_class v;
    if (!limbs.empty()) mpz_import(v.get_mpz_t(), limbs.size(), -1, sizeof(std::uint64_t), 0, 0, limbs.data());
    return v;
}

Fraction fraction_from_mpz(const mpz_class& v, int width) {
    std::vector<std::uint64_t> limbs((static_cast<std::size_t>(width) + 63) / 64 + 1, 0);
    std::size_t count = 0;
    mpz_export(limbs.data(), &count, -1, sizeof(std::uint64_t), 0, 0, v.get_mpz_t());
    limbs.resize(std::max<std::size_t>(count, 1));
    return Fraction::from_limbs(limbs, width);
}

/// Integer significand M = 2^prec + fraction, so |x| = M * 2^(e - prec).
mpz_class significand_integer(const BinaryFloat& x) {
    mpz_class m = mpz_from_limbs(x.fraction().limbs());
    mpz_class one = 1;
    return m + (one << static_cast<unsigned long>(x.prec()));
}

/// Enclosure of x at scale w.
Iv input_at_scale(const BinaryFloat& x, std::int64_t w) {
    const mpz_class m = significand_integer(x);
    const std::int64_t shift = x.exponent() - x.prec() + w;
    Iv r = shift >= 0 ? detail::exact(m << static_cast<unsigned long>(shift))
                      : Iv{detail::floor_shift(m, static_cast<std::uint64_t>(-shift)),
                           detail::ceil_shift(m, static_cast<std::uint64_t>(-shift))};
    return x.sign() ? -r : r;
}

// ---------------------------------------------------------------------------
// Constants

/// sum_{j>=0} (+-1)^j / ((2j+1) k^(2j+1)) at scale w: atan(1/k) when
/// alternating, atanh(1/k) otherwise.
Iv arctan_inverse(unsigned long k, std::int64_t w, bool alternating) {
    const mpz_class k2 = mpz_class(k) * k;
    mpz_class one = 1;
    const mpz_class unit = one << static_cast<unsigned long>(w);
    Iv power{detail::floor_div(unit, mpz_class(k)), detail::ceil_div(unit, mpz_class(k))};
    Iv sum{0, 0};
    for (unsigned long j = 0;; ++j) {
        const Iv term = detail::div_int(power, mpz_class(2 * j + 1));
        sum = (alternating && (j & 1U)) ? sum - term : sum + term;
        power = detail::div_int(power, k2);
        if (power.hi <= 1) break;
    }
    // Remaining tail is below one unit (alternating) or below 1/(1 - 1/k^2) units.
    return alternating ? detail::widen(sum, 1) : Iv{sum.lo, sum.hi + 2};
}

Iv compute_pi(std::int64_t w) {
    const std::int64_t ww = w + 10;
    const Iv a = detail::mul_int(arctan_inverse(5, ww, true), 16);
    const Iv b = detail::mul_int(arctan_inverse(239, ww, true), 4);
    return detail::rescale(a - b, ww, w);
}

Iv compute_ln2(std::int64_t w) {
    const std::int64_t ww = w + 4;
    return detail::rescale(detail::mul_int(arctan_inverse(3, ww, false), 2), ww, w);
}

/// Grow-only table of a constant. Readers take a snapshot under a shared lock,
/// so they always see a complete entry; growth is exclusive.
class ConstantTable {
public:
    explicit ConstantTable(Iv (*compute)(std::int64_t)) : compute_(compute) {}

    Iv get(std::int64_t bits) {
        std::shared_ptr<const Entry> snapshot;
        {
            std::shared_lock lock(mutex_);
            snapshot = entry_;
        }
        if (!snapshot || snapshot->bits < bits) {
            std::unique_lock lock(mutex_);
            if (!entry_ || entry_->bits < bits) {
                const std::int64_t grow = std::max<std::int64_t>({bits, entry_ ? 2 * entry_->bits : 0, 256});
                entry_ = std::make_shared<const Entry>(Entry{grow, compute_(grow)});
            }
            snapshot = entry_;
        }
        return detail::rescale(snapshot->value, snapshot->bits, bits);
    }

private:
    struct Entry {
        std::int64_t bits;
        Iv value;
    };
    Iv (*compute_)(std::int64_t);
    std::shared_mutex mutex_;
    std::shared_ptr<const Entry> entry_;
};

ConstantTable& pi_table() {
    static ConstantTable table(&compute_pi);
    return table;
}

ConstantTable& ln2_table() {
    static ConstantTable table(&compute_ln2);
    return table;
}

// ---------------------------------------------------------------------------
// Series

/// exp(r) for |r| <= 1/2 at scale w.
Iv exp_taylor(const Iv& r, std::int64_t w) {
    mpz_class one = 1;
    const Iv unit = detail::exact(one << static_cast<unsigned long>(w));
    Iv sum = unit;
    Iv term = unit;
    for (long i = 1; i < 100000; ++i) {
        term = detail::div_int(detail::mul(term, r, static_cast<std::uint64_t>(w)), mpz_class(i));
        sum = sum + term;
        if (detail::max_abs(term) <= 1) break;
    }
    return detail::widen(sum, 2);
}

/// sin(r) and cos(r) for |r| < 1 at scale w.
Iv sin_taylor(const Iv& r, std::int64_t w) {
    const auto uw = static_cast<std::uint64_t>(w);
    const Iv r2 = detail::mul(r, r, uw);
    Iv term = r;
    Iv sum = r;
    for (long i = 1; i < 100000; ++i) {
        term = detail::div_int(detail::mul(term, r2, uw), mpz_class((2 * i) * (2 * i + 1)));
        sum = (i & 1) ? sum - term : sum + term;
        if (detail::max_abs(term) <= 1) break;
    }
    return detail::widen(sum, 2);
}

Iv cos_taylor(const Iv& r, std::int64_t w) {
    const auto uw = static_cast<std::uint64_t>(w);
    const Iv r2 = detail::mul(r, r, uw);
    mpz_class one = 1;
    Iv term = detail::exact(one << uw);
    Iv sum = term;
    for (long i = 1; i < 100000; ++i) {
        term = detail::div_int(detail::mul(term, r2, uw), mpz_class((2 * i - 1) * (2 * i)));
        sum = (i & 1) ? sum - term : sum + term;
        if (detail::max_abs(term) <= 1) break;
    }
    return detail::widen(sum, 2);
}

// ---------------------------------------------------------------------------
// Builtin evaluators

DyadicInterval eval_exp(const BinaryFloat& x, std::int64_t abs_bits) {
    if (x.exponent() >= 40) {
        throw RangeError(x.sign() ? RangeError::Kind::Underflow : RangeError::Kind::Overflow, 0,
                         "exp: argument magnitude exceeds supported range");
    }
    const double xd = x.to_double();
    const mpz_class k = static_cast<long>(std::llround(xd / std::numbers::ln2));
    const std::int64_t kb = bit_length(k);
    const std::int64_t kl = k.get_si();
    const std::int64_t halvings = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::sqrt(double(abs_bits))) / 2, 2, 24);
    const std::int64_t w = std::max<std::int64_t>(abs_bits + kl, 16) + halvings + 10;

    // r = x - k ln 2, then r / 2^halvings is the same integers read at a finer scale.
    const std::int64_t wl = w + kb + 2;
    const Iv kln2 = detail::rescale(detail::mul_int(ln2_table().get(wl), k), wl, w);
    const Iv r = input_at_scale(x, w) - kln2;
    const std::int64_t wt = w + halvings;

    Iv s = exp_taylor(r, wt);
    for (std::int64_t i = 0; i < halvings; ++i) s = detail::mul(s, s, static_cast<std::uint64_t>(wt));
    return {s.lo, s.hi, kl - wt};
}

struct LogParts {
    Iv ln_m;  // ln of the reduced significand, scale w
    std::int64_t binade;  // E with x = m * 2^E, m in [1/sqrt 2, sqrt 2)
};

LogParts log_parts(const BinaryFloat& x, std::int64_t w) {
    if (x.sign()) throw DomainError("logarithm of a negative number");
    const mpz_class m = significand_integer(x);
    mpz_class one = 1;
    mpz_class base = one << static_cast<unsigned long>(x.prec());
    std::int64_t e = x.exponent();
    if (m * m > 2 * base * base) {
        base <<= 1;
        ++e;
    }
    // ln m = 2 atanh(t), t = (M - B) / (M + B), |t| <= 3 - 2 sqrt 2.
    const mpz_class num = m - base;
    const mpz_class den = m + base;
    const mpz_class a = abs(num);
    const mpz_class a2 = a * a;
    const mpz_class d2 = den * den;
    const mpz_class scaled = a << static_cast<unsigned long>(w);
    Iv power{detail::floor_div(scaled, den), detail::ceil_div(scaled, den)};
    Iv sum{0, 0};
    if (sgn(a) != 0) {
        for (long j = 0; j < 1000000; ++j) {
            sum = sum + detail::div_int(power, mpz_class(2 * j + 1));
            power = {detail::floor_div(power.lo * a2, d2), detail::ceil_div(power.hi * a2, d2)};
            if (power.hi <= 1) break;
        }
        sum.hi += 2;
    }
    if (sgn(num) < 0) sum = -sum;
    return {detail::mul_int(sum, 2), e};
}

DyadicInterval eval_ln(const BinaryFloat& x, std::int64_t abs_bits) {
    const std::int64_t w = std::max<std::int64_t>(abs_bits, 16) + 12;
    const LogParts parts = log_parts(x, w);
    const mpz_class e = static_cast<long>(parts.binade);
    const std::int64_t wl = w + bit_length(e) + 2;
    const Iv r = parts.ln_m + detail::rescale(detail::mul_int(ln2_table().get(wl), e), wl, w);
    return {r.lo, r.hi, -w};
}

DyadicInterval eval_log2(const BinaryFloat& x, std::int64_t abs_bits) {
    const std::int64_t w = std::max<std::int64_t>(abs_bits, 16) + 12;
    const LogParts parts = log_parts(x, w);
    const Iv frac = detail::div(parts.ln_m, ln2_table().get(w), static_cast<std::uint64_t>(w));
    const mpz_class e = static_cast<long>(parts.binade);
    const Iv r = frac + detail::exact(e << static_cast<unsigned long>(w));
    return {r.lo, r.hi, -w};
}

enum class Trig { Sin, Cos };

DyadicInterval eval_trig(const BinaryFloat& x, std::int64_t abs_bits, Trig which) {
    if (x.exponent() > (1 << 20)) throw EvalError("trigonometric argument too large for range reduction");
    // k = round(x / (pi/2)) from a coarse enclosure; any k works as long as r is exact.
    const std::int64_t wq = std::max<std::int64_t>(x.exponent(), 0) + 66;
    const Iv pi_q = pi_table().get(wq);
    const Iv xq = input_at_scale(x, wq);
    const mpz_class k = detail::floor_div(4 * xq.lo + pi_q.lo, 2 * pi_q.lo);

    const std::int64_t w = std::max<std::int64_t>(abs_bits, 16) + 16;
    const std::int64_t wp = w + bit_length(k) + 3;
    // k * pi / 2 at scale w: read k * pi at scale wp + 1.
    const Iv half_pi_k = detail::rescale(detail::mul_int(pi_table().get(wp), k), wp + 1, w);
    const Iv r = input_at_scale(x, w) - half_pi_k;

    mpz_class quadrant;
    mpz_fdiv_r_ui(quadrant.get_mpz_t(), k.get_mpz_t(), 4);
    const unsigned long q = quadrant.get_ui();
    // sin(x) = [sin r, cos r, -sin r, -cos r][q]; cos(x) = sin(x + pi/2).
    const unsigned long shifted = which == Trig::Sin ? q : (q + 1) % 4;
    Iv v = (shifted % 2 == 0) ? sin_taylor(r, w) : cos_taylor(r, w);
    if (shifted >= 2) v = -v;
    return {v.lo, v.hi, -w};
}

// ---------------------------------------------------------------------------
// Exactness predicates

std::optional<ExactValue> never_exact(const BinaryFloat&) { return std::nullopt; }

std::optional<ExactValue> ln_exact(const BinaryFloat& x) {
    if (!x.sign() && x.exponent() == 0 && x.fraction().is_zero()) return ExactValue{false, 0, 0};
    return std::nullopt;
}

std::optional<ExactValue> log2_exact(const BinaryFloat& x) {
    if (x.sign() || !x.fraction().is_zero()) return std::nullopt;
    const std::int64_t e = x.exponent();
    return ExactValue{e < 0, mpz_class(static_cast<long>(e < 0 ? -e : e)), 0};
}

// ---------------------------------------------------------------------------
// Registry

class Registry {
public:
    Registry() {
        defs_.push_back({"exp", &eval_exp, &never_exact});
        defs_.push_back({"ln", &eval_ln, &ln_exact});
        defs_.push_back({"log2", &eval_log2, &log2_exact});
        defs_.push_back({"sin", [](const BinaryFloat& x, std::int64_t b) { return eval_trig(x, b, Trig::Sin); },
                         &never_exact});
        defs_.push_back({"cos", [](const BinaryFloat& x, std::int64_t b) { return eval_trig(x, b, Trig::Cos); },
                         &never_exact});
        defs_.push_back({"2sin",
                         [](const BinaryFloat& x, std::int64_t b) {
                             auto r = eval_trig(x, b, Trig::Sin);
                             r.exp += 1;
                             return r;
                         },
                         &never_exact});
    }

    std::uint32_t add(FunctionDef def) {
        std::unique_lock lock(mutex_);
        for (const auto& d : defs_)
            if (d.id == def.id) throw std::invalid_argument("function id already registered: " + def.id);
        if (!def.evaluate || !def.exact) throw std::invalid_argument("function definition incomplete: " + def.id);
        defs_.push_back(std::move(def));
        return static_cast<std::uint32_t>(defs_.size() - 1);
    }

    std::optional<std::uint32_t> find(std::string_view name) const {
        std::shared_lock lock(mutex_);
        for (std::size_t i = 0; i < defs_.size(); ++i)
            if (defs_[i].id == name) return static_cast<std::uint32_t>(i);
        return std::nullopt;
    }

    const FunctionDef& at(std::uint32_t index) const {
        std::shared_lock lock(mutex_);
        return defs_.at(index);
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return defs_.size();
    }

private:
    mutable std::shared_mutex mutex_;
    std::deque<FunctionDef> defs_;  // stable references across growth
};

Registry& registry() {
    static Registry r;
    return r;
}

// ---------------------------------------------------------------------------
// Ziv driver

struct CertainDigits {
    bool sign = false;
    std::int64_t exponent = 0;
    Fraction digits;  // every real in the final enclosure shares these digits
    int guard = 0;
    int escalations = 0;
};

void check_range(std::int64_t e, const EvalConfig& cfg) {
    if (e > cfg.emax())
        throw RangeError(RangeError::Kind::Overflow, e, "result exponent " + std::to_string(e) + " overflows");
    if (e < cfg.emin())
        throw RangeError(RangeError::Kind::Underflow, e, "result exponent " + std::to_string(e) + " underflows");
}

CertainDigits certain_digits(const FunctionDef& def, const BinaryFloat& x, int want, const EvalConfig& cfg,
                             int n_for_partial) {
    int guard = cfg.initial_guard;
    int escalations = 0;
    std::int64_t magnitude = 0;  // running estimate of e(f(x))
    std::int64_t abs_bits = want + guard + 4;
    TailRecord partial;
    partial.n = n_for_partial;

    for (int attempt = 0; attempt < 4096; ++attempt) {
        if (want + guard > cfg.max_working_digits) {
            throw UnresolvedPrecisionError(def.id + ": escalation ceiling reached at " + std::to_string(want + guard) +
                                               " digits for input " + format(x),
                                           partial);
        }
        const DyadicInterval iv = def.evaluate(x, abs_bits);
        if (sgn(iv.lo) <= 0 && sgn(iv.hi) >= 0) {
            // Magnitude unknown: the enclosure still contains zero.
            abs_bits = 2 * abs_bits + 64;
            ++escalations;
            if (abs_bits > 16 * static_cast<std::int64_t>(cfg.max_working_digits)) {
                throw UnresolvedPrecisionError(def.id + ": cannot separate result from zero for input " + format(x),
                                               partial);
            }
            continue;
        }
        const bool negative = sgn(iv.hi) < 0;
        const mpz_class lo = negative ? mpz_class(-iv.hi) : iv.lo;
        const mpz_class hi = negative ? mpz_class(-iv.lo) : iv.hi;
        const std::int64_t bl = bit_length(lo);
        const std::int64_t bh = bit_length(hi);
        const std::int64_t e_lo = bl - 1 + iv.exp;
        const std::int64_t e_hi = bh - 1 + iv.exp;
        if (e_lo > cfg.emax()) check_range(e_lo, cfg);
        if (e_hi < cfg.emin()) check_range(e_hi, cfg);
        magnitude = e_hi;

        if (e_lo == e_hi) {
            check_range(e_hi, cfg);
            const mpz_class diff = lo ^ hi;
            const std::int64_t certain = sgn(diff) == 0 ? std::numeric_limits<std::int64_t>::max() / 4
                                                        : bl - 1 - bit_length(diff);
            if (certain >= want) {
                const int count = static_cast<int>(std::min<std::int64_t>(certain, want + guard));
                const std::int64_t shift = bl - 1 - count;
                mpz_class one = 1;
                mpz_class field = shift >= 0 ? detail::floor_shift(lo, static_cast<std::uint64_t>(shift))
                                             : mpz_class(lo << static_cast<unsigned long>(-shift));
                field -= one << static_cast<unsigned long>(count);  // drop the leading 1
                return {negative, e_hi, fraction_from_mpz(field, count), guard, escalations};
            }
            if (certain > 0) {
                partial.sign = negative;
                partial.exponent = e_hi;
                partial.certain_digits = static_cast<int>(certain);
            }
        }

        const std::int64_t relative = abs_bits + magnitude;
        if (relative < want + guard) {
            abs_bits = want + guard - magnitude + 4;
        } else {
            guard *= 2;
            ++escalations;
            abs_bits = want + guard - magnitude + 4;
        }
    }
    throw UnresolvedPrecisionError(def.id + ": Ziv loop did not converge for input " + format(x), partial);
}

struct ExactDigits {
    bool zero = false;
    bool sign = false;
    std::int64_t exponent = 0;
    Fraction digits;  // all significant fraction digits; later digits are 0
};

ExactDigits exact_digits(const ExactValue& v) {
    ExactDigits d;
    if (sgn(v.magnitude) == 0) {
        d.zero = true;
        return d;
    }
    const std::int64_t bl = bit_length(v.magnitude);
    mpz_class one = 1;
    const mpz_class field = v.magnitude - (one << static_cast<unsigned long>(bl - 1));
    d.sign = v.sign;
    d.exponent = bl - 1 + v.exp;
    d.digits = fraction_from_mpz(field, static_cast<int>(bl - 1));
    return d;
}

Fraction resized(const Fraction& f, int width) {
    return width >= f.width() ? f.widened(width) : f.leading(width);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

FunctionId FunctionId::from_name(std::string_view name) {
    if (auto i = registry().find(name)) return FunctionId(*i);
    throw std::invalid_argument("unknown function: " + std::string(name));
}

FunctionId FunctionId::register_function(FunctionDef def) { return FunctionId(registry().add(std::move(def))); }

std::vector<FunctionId> FunctionId::all() {
    std::vector<FunctionId> out;
    for (std::uint32_t i = 0; i < registry().size(); ++i) out.push_back(FunctionId(i));
    return out;
}

std::string_view FunctionId::name() const { return registry().at(index_).id; }
const FunctionDef& FunctionId::def() const { return registry().at(index_); }

DyadicInterval pi_enclosure(std::int64_t bits) {
    Iv v = pi_table().get(bits);
    return {v.lo, v.hi, -bits};
}

DyadicInterval ln2_enclosure(std::int64_t bits) {
    Iv v = ln2_table().get(bits);
    return {v.lo, v.hi, -bits};
}

bool is_exceptional(FunctionId f, const BinaryFloat& x, int /*n*/) { return f.def().exact(x).has_value(); }

EvalResult eval(FunctionId f, const BinaryFloat& x, int p, const EvalConfig& cfg) {
    if (p <= x.prec()) throw std::invalid_argument("eval: working precision must exceed the input precision");
    const FunctionDef& def = f.def();
    EvalResult out;
    if (auto ex = def.exact(x)) {
        const ExactDigits d = exact_digits(*ex);
        out.exact = true;
        if (d.zero) {
            out.zero = true;
            out.value = ExtendedSignificand(false, Fraction(p), 0);
            return out;
        }
        check_range(d.exponent, cfg);
        out.exact = d.digits.width() <= p;
        out.value = ExtendedSignificand(d.sign, resized(d.digits, p), d.exponent);
        out.error_bound_exp = d.exponent - p;
        return out;
    }
    CertainDigits c = certain_digits(def, x, p, cfg, 0);
    out.value = ExtendedSignificand(c.sign, c.digits.leading(p), c.exponent);
    out.error_bound_exp = c.exponent - p;
    out.guard_bits_used = c.guard;
    out.escalations = c.escalations;
    return out;
}

TailRecord eval_tail(FunctionId f, const BinaryFloat& x, int n, int run_cap, const EvalConfig& cfg) {
    if (n < x.prec()) throw std::invalid_argument("eval_tail: n must be at least the input precision");
    const int cap = run_cap > 0 ? run_cap : default_run_cap(n);
    if (cap < n + 2) throw std::invalid_argument("eval_tail: run_cap must leave room for guard and run digits");
    const FunctionDef& def = f.def();

    TailRecord t;
    t.n = n;
    if (auto ex = def.exact(x)) {
        const ExactDigits d = exact_digits(*ex);
        t.exact = true;
        t.resolved = true;
        if (d.zero) {
            t.zero = true;
            t.prefix = Fraction(n);
            return t;
        }
        t.sign = d.sign;
        t.exponent = d.exponent;
        int last_one = 0;
        for (int i = 1; i <= d.digits.width(); ++i)
            if (d.digits.digit(i)) last_one = i;
        t.zeros_from = last_one + 1;
        const Fraction wide = resized(d.digits, std::max(d.digits.width(), n + 2));
        t.prefix = wide.leading(n);
        t.guard = wide.digit(n + 1);
        t.run_bit = wide.digit(n + 2);
        t.certain_digits = std::numeric_limits<int>::max();
        return t;
    }

    int want = std::min(n + 2 + cfg.initial_guard, cap);
    for (;;) {
        CertainDigits c;
        try {
            c = certain_digits(def, x, want, cfg, n);
        } catch (UnresolvedPrecisionError& e) {
            throw UnresolvedPrecisionError(e.what(), t);
        }
        t.sign = c.sign;
        t.exponent = c.exponent;
        t.escalations += c.escalations;
        // Digits past the cap are not trusted for resolution, even when available.
        t.certain_digits = std::min(c.digits.width(), cap);
        t.prefix = c.digits.leading(n);
        t.guard = c.digits.digit(n + 1);
        t.run_bit = c.digits.digit(n + 2);
        t.run_length = std::min(c.digits.run_from(n + 2, t.run_bit), t.certain_digits - n - 1);
        if (n + 2 + t.run_length <= t.certain_digits) {
            t.resolved = true;
            t.resolved_at = n + 2 + t.run_length;
            return t;
        }
        if (want >= cap) {
            throw UnresolvedPrecisionError(std::string(def.id) + ": run not resolved within " + std::to_string(cap) +
                                               " digits for input " + format(x),
                                           t);
        }
        want = std::min(2 * want, cap);
        ++t.escalations;
    }
}

}  // namespace htr
