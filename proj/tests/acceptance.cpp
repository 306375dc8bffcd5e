// Acceptance suite: one PASS/FAIL line per criterion.
//
//   htr_acceptance               run every criterion
//   htr_acceptance --criterion 3 run one

#include "htr/badcase.hpp"
#include "htr/cli.hpp"
#include "htr/htr_search.hpp"
#include "reference.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

using namespace htr;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> check;
};

constexpr RoundingMode kModes[] = {RoundingMode::NearestTiesEven, RoundingMode::TowardPositive,
                                   RoundingMode::TowardNegative, RoundingMode::TowardZero};

ref::Mode to_ref(RoundingMode m) {
    switch (m) {
        case RoundingMode::NearestTiesEven: return ref::Mode::Nearest;
        case RoundingMode::TowardPositive: return ref::Mode::Up;
        case RoundingMode::TowardNegative: return ref::Mode::Down;
        case RoundingMode::TowardZero: return ref::Mode::Zero;
    }
    return ref::Mode::Nearest;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

HtrQuery make_query(FunctionId f, int n, int p_max, std::uint64_t seed = 0, std::int64_t e = 0,
                    RoundingMode mode = RoundingMode::NearestTiesEven, double delta = 0.1) {
    HtrQuery q;
    q.f = f;
    q.n = n;
    q.e = e;
    q.mode = mode;
    q.p_max = p_max;
    q.delta = delta;
    q.seed = seed;
    return q;
}

// Binary32 run example: 2sin over [1/2, 1), 23 fraction digits (24 with the
// implicit one). The hand count "24 + 21 = 45" is the index of the last run
// digit with the implicit one counted as digit 0, i.e. run_end.
Outcome worked_example() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto printed = analyze_input(FunctionId::two_sin(), parse_binary_float("1.00111011101100100011010*2^-1"), 23,
                                       RoundingMode::NearestTiesEven);
    const double secs = seconds_since(t0);
    const auto& t = printed.tail;
    Outcome o;
    o.pass = !t.guard && t.run_bit && t.run_length == 21 && printed.run_end == 45 && secs < 1.0;
    std::ostringstream d;
    d << "printed input: guard " << t.guard << ", run bit " << t.run_bit << ", run " << t.run_length << ", run_end "
      << printed.run_end << ", required " << printed.required_precision << " (want 0, 1, 21, 45) in " << std::fixed
      << std::setprecision(3) << secs << " s";

    // The input whose 2sin tail does carry the described run.
    const auto fixed = analyze_input(FunctionId::two_sin(), parse_binary_float("1.00101100110101010000101*2^-1"), 23,
                                     RoundingMode::NearestTiesEven);
    d << "; 1.00101100110101010000101*2^-1: guard " << fixed.tail.guard << ", run bit " << fixed.tail.run_bit
      << ", run " << fixed.tail.run_length << ", run_end " << fixed.run_end << ", required "
      << fixed.required_precision;
    o.detail = d.str();
    return o;
}

Outcome rounding_reference() {
    std::uint64_t cases = 0, mismatches = 0;
    std::string first;
    for (int p = 2; p <= 12; ++p)
        for (int n = 1; n < p; ++n)
            for (std::uint64_t f = 0; f < (std::uint64_t{1} << p); ++f)
                for (bool sign : {false, true})
                    for (auto mode : kModes) {
                        ++cases;
                        const BinaryFloat got =
                            round(ExtendedSignificand(sign, Fraction::from_uint(f, p), 0), n, mode);
                        const auto want = ref::round(sign, f, p, 0, n, to_ref(mode));
                        if (got.fraction().to_uint64() != want.fraction || got.exponent() != want.exponent ||
                            got.sign() != want.sign) {
                            if (mismatches++ == 0)
                                first = "p=" + std::to_string(p) + " n=" + std::to_string(n) + " f=" + std::to_string(f);
                        }
                    }
    return {mismatches == 0, std::to_string(cases) + " cases, " + std::to_string(mismatches) + " mismatches" +
                                 (first.empty() ? "" : ", first " + first)};
}

Outcome grover_closed_form() {
    std::mt19937_64 rng(31);
    double worst = 0;
    std::uint64_t checks = 0;
    for (int n = 1; n <= 10; ++n) {
        const std::uint64_t N = std::uint64_t{1} << n;
        const auto r_max = static_cast<std::uint64_t>(std::floor(std::pow(2.0, n / 2.0))) + 4;
        std::vector<std::uint64_t> order(N);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::uint64_t s = 0; s <= N; ++s) {
            std::vector<std::uint64_t> members(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s));
            std::sort(members.begin(), members.end());
            const PhaseOracle oracle(n, members);
            const double half_theta = std::asin(std::sqrt(static_cast<double>(s) / static_cast<double>(N)));
            GroverState state = GroverState::uniform(n, Representation::Full);
            for (std::uint64_t r = 0; r <= r_max; ++r) {
                if (r > 0) state = grover_iterate(std::move(state), oracle, 1);
                const double want = std::pow(std::sin(static_cast<double>(2 * r + 1) * half_theta), 2);
                worst = std::max(worst, std::abs(state.marked_probability(oracle) - want));
                ++checks;
            }
        }
    }
    std::ostringstream d;
    d << checks << " (n, |S|, r) points, max deviation " << std::scientific << std::setprecision(2) << worst;
    return {worst <= 1e-12, d.str()};
}

Outcome search_success_rate() {
    OracleCache cache;
    bool pass = true;
    std::ostringstream d;
    for (auto f : {FunctionId::exp(), FunctionId::sin()})
        for (int n : {6, 8, 10}) {
            const auto q = make_query(f, n, 2 * n + 16, 1000 + static_cast<std::uint64_t>(n));
            const auto v = validate(q, 100, cache);
            pass = pass && v.agreements >= 80;
            d << f.name() << " n=" << n << ": " << v.agreements << "/100 (htr " << v.reference << ")  ";
        }
    return {pass, d.str()};
}

Outcome call_scaling() {
    OracleCache cache;
    bool pass = true;
    std::ostringstream d;
    d << std::fixed << std::setprecision(3);
    for (auto f : {FunctionId::exp(), FunctionId::sin()}) {
        std::vector<double> xs, ys;
        for (int n = 8; n <= 16; ++n) {
            const auto q = make_query(f, n, 2 * n + 16, 77);
            const auto v = validate(q, 24, cache);
            xs.push_back(n);
            ys.push_back(std::log2(v.mean_oracle_calls));
        }
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        const double alpha = sxy / sxx;
        pass = pass && alpha >= 0.4 && alpha <= 0.6;
        d << f.name() << " alpha=" << alpha << " (mean calls " << std::setprecision(0) << std::exp2(ys.front())
          << " at n=8, " << std::exp2(ys.back()) << " at n=16)" << std::setprecision(3) << "  ";
    }
    return {pass, d.str()};
}

Outcome monotonicity() {
    OracleCache cache;
    std::uint64_t pairs = 0, violations = 0;
    for (auto f : {FunctionId::exp(), FunctionId::sin()})
        for (int n = 1; n <= 10; ++n)
            for (auto mode : kModes)
                for (int p = n + 2; p <= 3 * n; ++p) {
                    const auto lo = cache.marked_set({f, n, 0, p, mode});
                    const auto hi = cache.marked_set({f, n, 0, p + 1, mode});
                    ++pairs;
                    if (!std::includes(lo->members.begin(), lo->members.end(), hi->members.begin(), hi->members.end()))
                        ++violations;
                }
    return {violations == 0, std::to_string(pairs) + " (p, p+1) pairs, " + std::to_string(violations) + " violations"};
}

Outcome detector_equivalence() {
    std::uint64_t checks = 0, disagreements = 0;
    std::string first;
    for (auto f : {FunctionId::exp(), FunctionId::sin()})
        for (int n = 4; n <= 8; ++n)
            for (const auto& x : enumerate_binade(n, 0))
                for (int p = n + 2; p <= 3 * n; ++p) {
                    const ExtendedSignificand y = eval(f, x, p).value;
                    for (auto mode : kModes) {
                        ++checks;
                        const bool syn = !is_exceptional(f, x, n) && syntactic_bad(y, n, mode).bad;
                        const bool sem = semantic_bad(f, x, n, p, mode).bad;
                        if (syn != sem && disagreements++ == 0)
                            first = std::string(f.name()) + " " + format(x) + " p=" + std::to_string(p);
                    }
                }
    return {disagreements == 0, std::to_string(checks) + " checks, " + std::to_string(disagreements) +
                                    " disagreements" + (first.empty() ? "" : ", first " + first)};
}

Outcome skeleton() {
    OracleCache cache;
    SearchOptions exact;
    exact.emptiness = exact_emptiness_test();
    std::uint64_t queries = 0, mismatches = 0;
    std::string first;
    for (auto f : FunctionId::all())
        for (int n = 1; n <= 10; ++n)
            for (std::int64_t e : {-1, 0, 1})
                for (auto mode : kModes)
                    for (int p_max : {0, n + 2, n + 5, 2 * n + 2}) {
                        const auto q = make_query(f, n, p_max, 0, e, mode);
                        const auto b = htr_brute(q, cache);
                        const auto s = htr_quantum(q, cache, exact);
                        ++queries;
                        if ((s.result != b.result || s.capped != b.capped) && mismatches++ == 0)
                            first = std::string(f.name()) + " n=" + std::to_string(n) + " e=" + std::to_string(e);
                    }
    return {mismatches == 0, std::to_string(queries) + " queries, " + std::to_string(mismatches) + " mismatches" +
                                 (first.empty() ? "" : ", first " + first)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-8)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "run-example", worked_example},
        {2, "rounding-reference", rounding_reference},
        {3, "grover-closed-form", grover_closed_form},
        {4, "search-success-rate", search_success_rate},
        {5, "call-scaling", call_scaling},
        {6, "bad-set-monotonicity", monotonicity},
        {7, "detector-equivalence", detector_equivalence},
        {8, "search-skeleton", skeleton},
    };

    bool all = true;
    bool ran = false;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        ran = true;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << "  " << o.detail << "  ("
                  << std::fixed << std::setprecision(1) << seconds_since(t0) << " s)" << std::endl;
    }
    if (!ran) {
        std::cerr << "no criterion " << only << "\n";
        return 2;
    }
    return all ? 0 : 1;
}
