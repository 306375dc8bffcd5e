#pragma once

#include "htr/grover.hpp"
#include "htr/oracle_sim.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace htr {

enum class Method { QuantumSim, Brute };

std::string_view to_string(Method method);

struct HtrQuery {
    FunctionId f = FunctionId::exp();
    int n = 8;
    std::int64_t e = 0;
    RoundingMode mode = RoundingMode::NearestTiesEven;
    int p_max = 0;  // 0: default_p_max(n)
    double delta = 0.1;
    std::uint64_t seed = 0;

    int effective_p_max() const;
    /// Throws PreconditionError on n < 1, p_max <= n + 1 or delta outside (0, 1).
    void validate() const;
};

/// Default upper bound on the working precision: roughly twice the target
/// precision, with headroom for unlucky binades.
inline int default_p_max(int n) { return 2 * n + 32; }

struct WorstCase {
    std::uint64_t fraction = 0;
    BinaryFloat input = BinaryFloat::from_uint(0, 1, 0);
    int required_precision = 0;
    int run_end = 0;
    bool guard = false;
    bool run_bit = false;
    int run_length = 0;
};

struct ProbeRecord {
    int p = 0;
    bool found = false;  // k of the binary search
    std::uint64_t oracle_calls = 0;
    std::uint64_t grover_iterations = 0;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> witness;
    bool cap_check = false;
};

struct HtrReport {
    Method method = Method::QuantumSim;
    HtrQuery query;
    int result = 0;
    /// result == p_max and the marked set at p_max is still nonempty: the true
    /// value exceeds p_max and `result` is only a lower bound.
    bool capped = false;
    std::vector<WorstCase> worst_cases;
    std::uint64_t total_oracle_calls = 0;
    std::vector<ProbeRecord> per_probe_log;
    double delta_prime_used = 0;
    BuildStats build_stats;
};

/// Decides whether a marked set is empty. The default runs qsearch; an
/// infallible variant inspects the set directly.
using EmptinessTest =
    std::function<ProbeRecord(const MarkedSet& set, double delta_prime, std::uint64_t seed)>;

EmptinessTest quantum_emptiness_test(QSearchConfig config = {});
EmptinessTest exact_emptiness_test();

struct SearchOptions {
    int max_n = 20;
    QSearchConfig qsearch;
    /// Replaces qsearch when set.
    EmptinessTest emptiness;
};

HtrReport htr_quantum(const HtrQuery& q, OracleCache& cache, const SearchOptions& options = {});
HtrReport htr_brute(const HtrQuery& q, OracleCache& cache);

/// (⌊log2 p_max⌋ + 1)
int probe_budget(int p_max);

/// Seed of the i-th run derived from a base seed.
inline std::uint64_t run_seed(std::uint64_t base, std::uint64_t run) { return mix_seed(base, run); }

struct ValidationSummary {
    int runs = 0;
    int agreements = 0;
    double agreement_rate = 0;
    int reference = 0;  // htr_brute result
    std::vector<int> results;
    std::uint64_t min_oracle_calls = 0;
    std::uint64_t max_oracle_calls = 0;
    double mean_oracle_calls = 0;
};

/// Runs htr_quantum with `runs` derived seeds (concurrently) against one
/// htr_brute reference. Per-run results are in seed order.
ValidationSummary validate(const HtrQuery& q, int runs, OracleCache& cache, const SearchOptions& options = {});

}  // namespace htr
