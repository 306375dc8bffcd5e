#include "htr/mp_eval.hpp"
#include "reference.hpp"

#include <gtest/gtest.h>

#include <random>
#include <thread>

using namespace htr;

namespace {

// Binary32 input whose 2sin tail has guard 0 and a run of 21 ones.
constexpr const char* kTwoSinInput = "1.00101100110101010000101\xC2\xB7" "2^-1";

std::string value_digits(const EvalResult& r) { return r.value.digits.to_digit_string(); }

BinaryFloat random_input(std::mt19937_64& rng, int prec, std::int64_t e) {
    Fraction f(prec);
    for (int i = 1; i <= prec; ++i) f.set_digit(i, rng() & 1);
    return BinaryFloat(false, f, e);
}

}  // namespace

TEST(Eval, ExpOfOneAtTenDigits) {
    const auto r = eval(FunctionId::exp(), parse_binary_float("1.0"), 10);
    EXPECT_EQ(format(r.value), "1.0101101111\xC2\xB7" "2^1");
    EXPECT_FALSE(r.exact);
    EXPECT_EQ(r.error_bound_exp, 1 - 10);
}

TEST(Eval, TwoSinDigitsOfTheRunExample) {
    const auto r = eval(FunctionId::two_sin(), parse_binary_float(kTwoSinInput), 50);
    EXPECT_EQ(r.value.exponent, 0);
    EXPECT_EQ(value_digits(r).substr(0, 45), "000110111101000110110010" "111111111111111111111");
    EXPECT_EQ(value_digits(r).substr(45, 3), "000");
}

TEST(Eval, LogTwoOfPowerOfTwoIsExact) {
    const auto r = eval(FunctionId::log2(), parse_binary_float("1.0*2^1"), 10);
    EXPECT_TRUE(r.exact);
    EXPECT_EQ(format(r.value), "1.0000000000");
    const auto q = eval(FunctionId::log2(), parse_binary_float("1.0*2^-3"), 10);
    EXPECT_TRUE(q.exact);
    EXPECT_EQ(format(q.value), "-1.1000000000\xC2\xB7" "2^1");
}

TEST(Eval, LnOfOneIsExactZero) {
    const auto r = eval(FunctionId::ln(), parse_binary_float("1.0000"), 10);
    EXPECT_TRUE(r.exact);
    EXPECT_TRUE(r.zero);
}

TEST(Eval, RequiresPrecisionAboveInput) {
    EXPECT_THROW(eval(FunctionId::exp(), parse_binary_float("1.0101"), 4), std::invalid_argument);
}

TEST(Eval, OverflowAndUnderflowAreReported) {
    // exp(2^11) has exponent near 2954, far above the default emax of 1023.
    try {
        eval(FunctionId::exp(), parse_binary_float("1.0*2^11"), 20);
        FAIL() << "expected overflow";
    } catch (const RangeError& e) {
        EXPECT_EQ(e.kind(), RangeError::Kind::Overflow);
    }
    try {
        eval(FunctionId::exp(), parse_binary_float("-1.0*2^11"), 20);
        FAIL() << "expected underflow";
    } catch (const RangeError& e) {
        EXPECT_EQ(e.kind(), RangeError::Kind::Underflow);
    }
    EvalConfig wide;
    wide.exponent_bits = 14;
    EXPECT_NO_THROW(eval(FunctionId::exp(), parse_binary_float("1.0*2^11"), 20, wide));
}

TEST(Eval, LogOfNegativeInputIsDomainError) {
    EXPECT_THROW(eval(FunctionId::ln(), parse_binary_float("-1.1"), 10), DomainError);
    EXPECT_THROW(eval(FunctionId::log2(), parse_binary_float("-1.1"), 10), DomainError);
}

TEST(Eval, MatchesMpfrAt64DigitsForEveryFunction) {
    std::mt19937_64 rng(2024);
    const std::pair<FunctionId, std::vector<std::int64_t>> cases[] = {
        {FunctionId::exp(), {-12, -3, -1, 0, 1, 4, 8}},
        {FunctionId::ln(), {-40, -1, 0, 1, 9, 200}},
        {FunctionId::log2(), {-40, -1, 0, 1, 9, 200}},
        {FunctionId::sin(), {-20, -1, 0, 1, 3, 12, 40}},
        {FunctionId::cos(), {-20, -1, 0, 1, 3, 12, 40}},
        {FunctionId::two_sin(), {-20, -1, 0, 1, 3, 12}},
    };
    for (const auto& [f, exponents] : cases) {
        for (int i = 0; i < 1000; ++i) {
            const std::int64_t e = exponents[static_cast<std::size_t>(i) % exponents.size()];
            const BinaryFloat x = random_input(rng, 24, e);
            if (is_exceptional(f, x, 24)) continue;
            const auto got = eval(f, x, 64);
            const auto want = ref::evaluate(f.name(), x, 64);
            ASSERT_EQ(got.value.exponent, want.exponent) << f.name() << " " << format(x);
            ASSERT_EQ(got.value.sign, want.sign) << f.name() << " " << format(x);
            ASSERT_EQ(value_digits(got), want.fraction) << f.name() << " " << format(x);
        }
    }
}

TEST(Eval, CertifiedIntervalsNest) {
    std::mt19937_64 rng(17);
    for (auto f : {FunctionId::exp(), FunctionId::sin(), FunctionId::ln(), FunctionId::cos()}) {
        for (int i = 0; i < 40; ++i) {
            const int n = 8;
            const BinaryFloat x = random_input(rng, n, static_cast<std::int64_t>(rng() % 5) - 2);
            if (is_exceptional(f, x, n)) continue;
            // The certified interval at p is [v, v + 2^(E-p)] for the truncation v.
            for (int p = n + 1; p < 4 * n; ++p) {
                const auto r1 = eval(f, x, p);
                const auto r2 = eval(f, x, p + 1);
                ASSERT_EQ(r1.value.exponent, r2.value.exponent);
                // v2 truncated to p digits is v1, so [v2, v2 + 2^e2] lies inside [v1, v1 + 2^e1].
                ASSERT_EQ(r2.value.digits.leading(p), r1.value.digits) << f.name() << " " << format(x) << " p=" << p;
                ASSERT_EQ(r2.error_bound_exp, r1.error_bound_exp - 1);
            }
        }
    }
}

TEST(Eval, IsDeterministicAcrossThreads) {
    const BinaryFloat x = parse_binary_float("1.0110100111*2^3");
    const auto base = eval(FunctionId::sin(), x, 400);
    std::vector<std::jthread> pool;
    std::vector<EvalResult> results(4);
    for (std::size_t t = 0; t < results.size(); ++t)
        pool.emplace_back([&, t] { results[t] = eval(FunctionId::sin(), x, 400); });
    pool.clear();
    for (const auto& r : results) EXPECT_EQ(r.value, base.value);
}

TEST(Tail, TwoSinRunExample) {
    const auto t = eval_tail(FunctionId::two_sin(), parse_binary_float(kTwoSinInput), 23);
    EXPECT_TRUE(t.resolved);
    EXPECT_FALSE(t.guard);
    EXPECT_TRUE(t.run_bit);
    EXPECT_EQ(t.run_length, 21);
    EXPECT_EQ(t.resolved_at, 46);
    EXPECT_EQ(t.prefix.to_digit_string(), "00011011110100011011001");
}

TEST(Tail, PrintedBinary32InputHasShortTail) {
    // The same digits of 2sin are not produced by 1.00111011101100100011010 * 2^-1.
    const auto t = eval_tail(FunctionId::two_sin(), parse_binary_float("1.00111011101100100011010*2^-1"), 23);
    const auto want = ref::evaluate("2sin", parse_binary_float("1.00111011101100100011010*2^-1"), 30);
    EXPECT_EQ(t.prefix.to_digit_string(), want.fraction.substr(0, 23));
    EXPECT_NE(t.run_length, 21);
}

TEST(Tail, ExactLogTwoReportsTrailingZeros) {
    const auto t = eval_tail(FunctionId::log2(), parse_binary_float("1.0*2^1"), 24);
    EXPECT_TRUE(t.exact);
    EXPECT_LE(t.zeros_from, 2);
    EXPECT_FALSE(t.guard);
}

TEST(Tail, SinOfOneMatchesReferenceDigits) {
    const BinaryFloat x = parse_binary_float("1.000000");
    const auto t = eval_tail(FunctionId::sin(), x, 6);
    const auto want = ref::evaluate("sin", x, 100);
    EXPECT_EQ(t.prefix.to_digit_string(), want.fraction.substr(0, 6));
    EXPECT_EQ(t.guard, want.fraction[6] == '1');
    EXPECT_EQ(t.run_bit, want.fraction[7] == '1');
    const auto run = want.fraction.find(t.run_bit ? '0' : '1', 7) - 7;
    EXPECT_EQ(t.run_length, static_cast<int>(run));
}

TEST(Tail, RunStructureMatchesReferenceOnRandomInputs) {
    std::mt19937_64 rng(99);
    for (auto f : FunctionId::all()) {
        for (int i = 0; i < 150; ++i) {
            const int n = 4 + static_cast<int>(rng() % 12);
            const BinaryFloat x = random_input(rng, n, static_cast<std::int64_t>(rng() % 7) - 3);
            if (is_exceptional(f, x, n)) continue;
            const auto t = eval_tail(f, x, n);
            const auto want = ref::evaluate(f.name(), x, 8 * n + 64);
            const auto& d = want.fraction;
            ASSERT_EQ(t.exponent, want.exponent);
            ASSERT_EQ(t.prefix.to_digit_string(), d.substr(0, static_cast<std::size_t>(n)));
            ASSERT_EQ(t.guard, d[static_cast<std::size_t>(n)] == '1');
            const char bit = d[static_cast<std::size_t>(n) + 1];
            ASSERT_EQ(t.run_bit, bit == '1');
            const auto stop = d.find(bit == '1' ? '0' : '1', static_cast<std::size_t>(n) + 1);
            ASSERT_EQ(t.run_length, static_cast<int>(stop - static_cast<std::size_t>(n) - 1)) << f.name() << format(x);
            ASSERT_EQ(t.resolved_at, n + 2 + t.run_length);
        }
    }
}

TEST(Tail, PrefixAgreesWithEval) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 200; ++i) {
        const int n = 10;
        const BinaryFloat x = random_input(rng, n, 0);
        const auto t = eval_tail(FunctionId::exp(), x, n);
        const auto r = eval(FunctionId::exp(), x, 3 * n);
        ASSERT_EQ(r.value.digits.leading(n), t.prefix);
    }
}

TEST(Tail, RunCapExhaustionCarriesPartialRecord) {
    // A cap that leaves no room past the run start forces the unresolved path.
    const BinaryFloat x = parse_binary_float(kTwoSinInput);
    try {
        eval_tail(FunctionId::two_sin(), x, 23, 30);
        FAIL() << "expected unresolved";
    } catch (const UnresolvedPrecisionError& e) {
        EXPECT_EQ(e.partial().n, 23);
        EXPECT_FALSE(e.partial().resolved);
        EXPECT_GE(e.partial().run_length, 5);
    }
}

TEST(Exceptional, PredicatesPerFunction) {
    EXPECT_TRUE(is_exceptional(FunctionId::log2(), parse_binary_float("1.0*2^1"), 24));
    EXPECT_FALSE(is_exceptional(FunctionId::sin(), parse_binary_float("1.1"), 24));
    EXPECT_FALSE(is_exceptional(FunctionId::exp(), parse_binary_float("1.0"), 24));
    EXPECT_TRUE(is_exceptional(FunctionId::ln(), parse_binary_float("1.000"), 24));
    EXPECT_FALSE(is_exceptional(FunctionId::ln(), parse_binary_float("1.001"), 24));
    EXPECT_FALSE(is_exceptional(FunctionId::log2(), parse_binary_float("1.001*2^4"), 24));
}

TEST(Registry, BuiltinNamesAndCustomFunction) {
    for (const char* name : {"exp", "ln", "log2", "sin", "cos", "2sin"})
        EXPECT_EQ(FunctionId::from_name(name).name(), name);
    EXPECT_THROW(FunctionId::from_name("tan"), std::invalid_argument);

    // x -> 3x is exact for every input, so nothing is ever a bad case.
    FunctionDef triple;
    triple.id = "triple-test";
    triple.evaluate = [](const BinaryFloat&, std::int64_t) -> DyadicInterval { throw std::logic_error("unused"); };
    triple.exact = [](const BinaryFloat& x) -> std::optional<ExactValue> {
        mpz_class m = 1;
        m <<= static_cast<unsigned long>(x.prec());
        m += static_cast<unsigned long>(x.fraction().to_uint64());
        return ExactValue{x.sign(), 3 * m, x.exponent() - x.prec()};
    };
    const FunctionId id = FunctionId::register_function(triple);
    EXPECT_EQ(FunctionId::from_name("triple-test"), id);
    const auto r = eval(id, parse_binary_float("1.1"), 8);
    EXPECT_TRUE(r.exact);
    EXPECT_EQ(format(r.value), "1.00100000\xC2\xB7" "2^2");
}

TEST(Constants, PiAndLn2AgreeWithMpfr) {
    mpfr_t v;
    mpfr_init2(v, 3000);
    mpfr_const_pi(v, MPFR_RNDZ);
    mpz_class pi_floor;
    mpfr_mul_2ui(v, v, 2000, MPFR_RNDZ);
    mpfr_get_z(pi_floor.get_mpz_t(), v, MPFR_RNDZ);
    const auto pi = pi_enclosure(2000);
    EXPECT_EQ(pi.exp, -2000);
    EXPECT_LE(pi.lo, pi_floor);
    EXPECT_GE(pi.hi, pi_floor);
    EXPECT_LE(mpz_class(pi.hi - pi.lo), 16);

    mpfr_const_log2(v, MPFR_RNDZ);
    mpfr_mul_2ui(v, v, 2000, MPFR_RNDZ);
    mpz_class ln2_floor;
    mpfr_get_z(ln2_floor.get_mpz_t(), v, MPFR_RNDZ);
    const auto l2 = ln2_enclosure(2000);
    EXPECT_LE(l2.lo, ln2_floor);
    EXPECT_GE(l2.hi, ln2_floor);
    mpfr_clear(v);
}
