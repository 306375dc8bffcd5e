#include "htr/badcase.hpp"
#include "htr/htr_search.hpp"

#include <gtest/gtest.h>

#include <bit>

using namespace htr;

namespace {

// Worst required precision straight from per-input evaluation.
int direct_worst(FunctionId f, int n, std::int64_t e, RoundingMode mode) {
    int worst = n + 1;
    for (const auto& x : enumerate_binade(n, e)) {
        if (is_exceptional(f, x, n)) continue;
        worst = std::max(worst, required_precision(f, x, n, mode));
    }
    return worst;
}

HtrQuery query(FunctionId f, int n, int p_max = 0, std::int64_t e = 0,
               RoundingMode mode = RoundingMode::NearestTiesEven) {
    HtrQuery q;
    q.f = f;
    q.n = n;
    q.e = e;
    q.mode = mode;
    q.p_max = p_max;
    return q;
}

SearchOptions exact_options() {
    SearchOptions o;
    o.emptiness = exact_emptiness_test();
    return o;
}

}  // namespace

TEST(Brute, MatchesDirectEvaluation) {
    OracleCache cache;
    for (auto f : {FunctionId::exp(), FunctionId::sin(), FunctionId::cos(), FunctionId::ln()})
        for (int n : {4, 7, 9})
            for (auto mode : {RoundingMode::NearestTiesEven, RoundingMode::TowardPositive}) {
                const auto r = htr_brute(query(f, n, 0, 0, mode), cache);
                EXPECT_EQ(r.result, direct_worst(f, n, 0, mode)) << f.name() << " n=" << n;
                EXPECT_FALSE(r.capped);
                EXPECT_EQ(r.method, Method::Brute);
                ASSERT_FALSE(r.worst_cases.empty());
                for (const auto& w : r.worst_cases) EXPECT_EQ(w.required_precision, r.result);
            }
}

TEST(Brute, SinAtTenDigits) {
    OracleCache cache;
    EXPECT_EQ(htr_brute(query(FunctionId::sin(), 10, 36), cache).result, 24);
}

TEST(Brute, ExactInputIsNotAWorstCase) {
    OracleCache cache;
    const auto r = htr_brute(query(FunctionId::log2(), 6, 0, 1), cache);
    for (const auto& w : r.worst_cases) EXPECT_NE(w.fraction, 0u);
    EXPECT_EQ(r.build_stats.excluded, 1u);
}

TEST(Brute, CapsAtPMax) {
    OracleCache cache;
    const auto r = htr_brute(query(FunctionId::sin(), 8, 12), cache);
    EXPECT_TRUE(r.capped);
    EXPECT_EQ(r.result, 12);
}

TEST(Skeleton, ExactEmptinessReproducesBrute) {
    OracleCache cache;
    for (auto f : {FunctionId::exp(), FunctionId::sin(), FunctionId::log2()})
        for (int n = 3; n <= 10; ++n)
            for (int p_max : {0, n + 2, n + 5}) {
                const auto q = query(f, n, p_max, f == FunctionId::log2() ? 1 : 0);
                const auto b = htr_brute(q, cache);
                const auto s = htr_quantum(q, cache, exact_options());
                EXPECT_EQ(s.result, b.result) << f.name() << " n=" << n << " p_max=" << p_max;
                EXPECT_EQ(s.capped, b.capped);
            }
}

TEST(Skeleton, ProbeLogIsConsistentBinarySearch) {
    OracleCache cache;
    const auto q = query(FunctionId::exp(), 9);
    const auto r = htr_quantum(q, cache, exact_options());
    const int budget = probe_budget(q.effective_p_max());
    const auto caps = std::count_if(r.per_probe_log.begin(), r.per_probe_log.end(), [](const auto& p) { return p.cap_check; });
    EXPECT_LE(caps, 1);
    EXPECT_LE(static_cast<int>(r.per_probe_log.size() - static_cast<std::size_t>(caps)), budget);
    int lo = q.n + 1, hi = q.effective_p_max();
    for (const auto& p : r.per_probe_log) {
        if (p.cap_check) continue;
        EXPECT_GE(p.p, lo);
        EXPECT_LE(p.p, hi);
        if (p.found) lo = p.p + 1;
        else hi = p.p;
    }
}

TEST(Skeleton, DeltaPrimeSplitsAcrossProbes) {
    OracleCache cache;
    auto q = query(FunctionId::sin(), 6);
    q.delta = 0.2;
    const auto r = htr_quantum(q, cache);
    EXPECT_DOUBLE_EQ(r.delta_prime_used, 0.2 / std::bit_width(static_cast<unsigned>(q.effective_p_max())));
    EXPECT_EQ(probe_budget(44), 6);
    EXPECT_EQ(probe_budget(64), 7);
}

TEST(Quantum, AgreesWithBruteForFixedSeed) {
    OracleCache cache;
    auto q = query(FunctionId::sin(), 8, 32);
    q.seed = 42;
    const auto r = htr_quantum(q, cache);
    EXPECT_EQ(r.result, htr_brute(q, cache).result);
    EXPECT_EQ(r.method, Method::QuantumSim);
    EXPECT_GT(r.total_oracle_calls, 0u);
    std::uint64_t sum = 0;
    for (const auto& p : r.per_probe_log) sum += p.oracle_calls;
    EXPECT_EQ(sum, r.total_oracle_calls);
    ASSERT_EQ(r.worst_cases.size(), 1u);
    EXPECT_EQ(r.worst_cases[0].required_precision, r.result);
}

TEST(Quantum, IsReproducible) {
    OracleCache cache;
    auto q = query(FunctionId::exp(), 10);
    q.seed = 7;
    const auto a = htr_quantum(q, cache);
    const auto b = htr_quantum(q, cache);
    EXPECT_EQ(a.result, b.result);
    EXPECT_EQ(a.total_oracle_calls, b.total_oracle_calls);
    ASSERT_EQ(a.per_probe_log.size(), b.per_probe_log.size());
    for (std::size_t i = 0; i < a.per_probe_log.size(); ++i) EXPECT_EQ(a.per_probe_log[i].seed, b.per_probe_log[i].seed);
}

TEST(Quantum, ReportsCapWhenPMaxTooSmall) {
    OracleCache cache;
    auto q = query(FunctionId::sin(), 8, 12);
    const auto r = htr_quantum(q, cache);
    EXPECT_EQ(r.result, 12);
    EXPECT_TRUE(r.capped);
    EXPECT_TRUE(r.per_probe_log.back().cap_check);
}

TEST(Quantum, EnforcesSizeLimit) {
    OracleCache cache;
    SearchOptions small;
    small.max_n = 6;
    EXPECT_THROW(htr_quantum(query(FunctionId::exp(), 7), cache, small), PreconditionError);
}

TEST(Query, Validation) {
    EXPECT_THROW(query(FunctionId::exp(), 0).validate(), PreconditionError);
    EXPECT_THROW(query(FunctionId::exp(), 8, 9).validate(), PreconditionError);
    auto q = query(FunctionId::exp(), 8);
    q.delta = 1.0;
    EXPECT_THROW(q.validate(), PreconditionError);
    EXPECT_EQ(query(FunctionId::exp(), 8).effective_p_max(), 48);
}

TEST(Validate, SummarizesRunsAgainstBrute) {
    OracleCache cache;
    auto q = query(FunctionId::sin(), 7, 30);
    q.seed = 3;
    const auto v = validate(q, 12, cache);
    EXPECT_EQ(v.runs, 12);
    EXPECT_EQ(v.results.size(), 12u);
    EXPECT_EQ(v.reference, htr_brute(q, cache).result);
    int agree = 0;
    for (int r : v.results) agree += r == v.reference;
    EXPECT_EQ(agree, v.agreements);
    EXPECT_LE(static_cast<double>(v.min_oracle_calls), v.mean_oracle_calls);
    EXPECT_LE(v.mean_oracle_calls, static_cast<double>(v.max_oracle_calls));

    const auto again = validate(q, 12, cache);
    EXPECT_EQ(again.results, v.results);
    EXPECT_EQ(again.min_oracle_calls, v.min_oracle_calls);
}

TEST(Validate, LooseDeltaStillMostlyAgrees) {
    OracleCache cache;
    auto q = query(FunctionId::sin(), 8, 32);
    q.delta = 0.5;
    q.seed = 11;
    EXPECT_GE(validate(q, 100, cache).agreements, 50);
}
