#include "htr/htr_search.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <future>
#include <thread>

namespace htr {

std::string_view to_string(Method method) { return method == Method::Brute ? "brute" : "quantum-sim"; }

int HtrQuery::effective_p_max() const { return p_max > 0 ? p_max : default_p_max(n); }

void HtrQuery::validate() const {
    if (n < 1) throw PreconditionError("query: n must be at least 1");
    if (effective_p_max() <= n + 1) throw PreconditionError("query: p_max must exceed n + 1");
    if (!(delta > 0 && delta < 1)) throw PreconditionError("query: delta must be in (0, 1)");
}

int probe_budget(int p_max) { return static_cast<int>(std::bit_width(static_cast<unsigned>(p_max))); }

EmptinessTest quantum_emptiness_test(QSearchConfig config) {
    return [config](const MarkedSet& set, double delta_prime, std::uint64_t seed) {
        const PhaseOracle oracle = phase_function(set);
        const QSearchOutcome out = qsearch(oracle, delta_prime, seed, config);
        ProbeRecord rec;
        rec.p = set.spec.p;
        rec.found = out.found;
        rec.oracle_calls = out.oracle_calls;
        rec.grover_iterations = out.grover_iterations;
        rec.seed = seed;
        rec.witness = out.witness;
        return rec;
    };
}

EmptinessTest exact_emptiness_test() {
    return [](const MarkedSet& set, double, std::uint64_t seed) {
        ProbeRecord rec;
        rec.p = set.spec.p;
        rec.found = !set.empty();
        rec.seed = seed;
        if (rec.found) rec.witness = set.members.front();
        return rec;
    };
}

namespace {

WorstCase describe(const HtrQuery& q, std::uint64_t fraction, const TailTable& table) {
    WorstCase w;
    w.fraction = fraction;
    w.input = BinaryFloat::from_uint(fraction, q.n, q.e);
    w.guard = table.guard(fraction);
    w.run_bit = table.run_bit(fraction);
    w.run_length = table.run_length(fraction);
    w.required_precision = table.required_precision(fraction, q.mode);
    w.run_end = w.required_precision - kBoundaryOffset;
    return w;
}

}  // namespace

HtrReport htr_quantum(const HtrQuery& q, OracleCache& cache, const SearchOptions& options) {
    q.validate();
    if (q.n > options.max_n)
        throw PreconditionError("htr_quantum: n exceeds the simulation limit " + std::to_string(options.max_n));
    const EmptinessTest test = options.emptiness ? options.emptiness : quantum_emptiness_test(options.qsearch);

    HtrReport report;
    report.method = Method::QuantumSim;
    report.query = q;
    const int p_max = q.effective_p_max();
    report.delta_prime_used = q.delta / probe_budget(p_max);

    std::uint64_t stream = 0;
    auto probe = [&](int p) {
        const auto set = cache.marked_set({q.f, q.n, q.e, p, q.mode});
        ProbeRecord rec = test(*set, report.delta_prime_used, mix_seed(q.seed, stream++));
        rec.p = p;
        report.total_oracle_calls += rec.oracle_calls;
        report.build_stats = set->build_stats;
        return rec;
    };

    int l = q.n + 1;
    int r = p_max;
    while (l < r) {
        const int p = l + (r - l) / 2;
        ProbeRecord rec = probe(p);
        if (rec.found) l = p + 1;
        else r = p;
        report.per_probe_log.push_back(std::move(rec));
    }
    report.result = l;
    if (l == p_max) {
        ProbeRecord rec = probe(p_max);
        rec.cap_check = true;
        report.capped = rec.found;
        report.per_probe_log.push_back(std::move(rec));
    }

    // The verified witness from the highest nonempty probe needs at least p + 1.
    const ProbeRecord* best = nullptr;
    for (const auto& rec : report.per_probe_log)
        if (rec.found && (!best || rec.p > best->p)) best = &rec;
    if (best) {
        const auto table = cache.tail_table(q.f, q.n, q.e);
        report.worst_cases.push_back(describe(q, *best->witness, *table));
    }
    return report;
}

HtrReport htr_brute(const HtrQuery& q, OracleCache& cache) {
    q.validate();
    const auto table = cache.tail_table(q.f, q.n, q.e);
    HtrReport report;
    report.method = Method::Brute;
    report.query = q;
    report.build_stats = table->stats();
    report.total_oracle_calls = table->stats().scanned;

    const int p_max = q.effective_p_max();
    const int worst = table->max_required_precision(q.mode);
    report.result = std::min(worst, p_max);
    report.capped = worst > p_max;
    const auto count = static_cast<std::uint64_t>(table->entries().size());
    for (std::uint64_t i = 0; i < count; ++i)
        if (table->required_precision(i, q.mode) == worst) report.worst_cases.push_back(describe(q, i, *table));
    return report;
}

ValidationSummary validate(const HtrQuery& q, int runs, OracleCache& cache, const SearchOptions& options) {
    if (runs < 1) throw PreconditionError("validate: runs must be at least 1");
    ValidationSummary summary;
    summary.runs = runs;
    summary.reference = htr_brute(q, cache).result;

    std::vector<HtrReport> reports(static_cast<std::size_t>(runs));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i; (i = next.fetch_add(1)) < runs;) {
            HtrQuery run = q;
            run.seed = run_seed(q.seed, static_cast<std::uint64_t>(i));
            reports[static_cast<std::size_t>(i)] = htr_quantum(run, cache, options);
        }
    };
    {
        const unsigned workers = std::min<unsigned>(static_cast<unsigned>(runs),
                                                    std::max(1U, std::thread::hardware_concurrency()));
        std::vector<std::future<void>> pool;
        for (unsigned w = 1; w < workers; ++w) pool.push_back(std::async(std::launch::async, work));
        work();
        for (auto& f : pool) f.get();
    }

    std::uint64_t total = 0;
    summary.min_oracle_calls = UINT64_MAX;
    for (const auto& rep : reports) {
        summary.results.push_back(rep.result);
        if (rep.result == summary.reference) ++summary.agreements;
        total += rep.total_oracle_calls;
        summary.min_oracle_calls = std::min(summary.min_oracle_calls, rep.total_oracle_calls);
        summary.max_oracle_calls = std::max(summary.max_oracle_calls, rep.total_oracle_calls);
    }
    summary.agreement_rate = static_cast<double>(summary.agreements) / runs;
    summary.mean_oracle_calls = static_cast<double>(total) / runs;
    return summary;
}

}  // namespace htr
